//! Gauge-averaged readouts: run a one-shot sampler under freshly drawn
//! gauges and map every returned configuration back to the base problem.

use super::model::Model;
use super::sa::{simulated_annealing, SaParams};
use super::sqa::{sqa_sample, SqaParams};
use super::SampleRecord;
use crate::instance::{
    apply_gauge, apply_gauge_noisy, random_gauge, ungauge_config, GaugeVector, Instance,
    NoisyInstance,
};
use crate::seeds::{child_seed, domain, stream};
use crate::{exec, Result};

/// Which one-shot sampler a gauge run drives.  The enumerating
/// parallel-tempering sampler has its own entry point; it produces hit
/// counts, not independent readouts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SamplerSpec {
    Sa(SaParams),
    Sqa(SqaParams),
}

impl SamplerSpec {
    pub fn id(&self) -> &'static str {
        match self {
            SamplerSpec::Sa(_) => "sa",
            SamplerSpec::Sqa(_) => "sqa",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SamplerSpec::Sa(p) => p.validate(),
            SamplerSpec::Sqa(p) => p.validate(),
        }
    }
}

enum Gauged {
    Base(Instance),
    Noisy(NoisyInstance),
}

impl Gauged {
    fn model(&self) -> Model<'_> {
        match self {
            Gauged::Base(inst) => Model::Base(inst),
            Gauged::Noisy(noisy) => Model::Noisy(noisy),
        }
    }
}

/// Runs `reads_per_gauge` independent reads under each of `gauges` gauges
/// (gauge 0 is the identity) and returns `gauges * reads_per_gauge` records,
/// each carrying the ungauged configuration.  Reads are independent work
/// items with derived seeds, so the output does not depend on thread count.
pub fn run_with_gauges(
    problem: Model<'_>,
    sampler: &SamplerSpec,
    gauges: u32,
    reads_per_gauge: u32,
    master_seed: u64,
) -> Result<Vec<SampleRecord>> {
    sampler.validate()?;
    let n = match problem {
        Model::Base(inst) => inst.num_spins(),
        Model::Noisy(noisy) => noisy.base().num_spins(),
    };
    let gauge_for = |g: u32| -> GaugeVector {
        if g == 0 {
            GaugeVector::identity(n)
        } else {
            let mut rng = stream(master_seed, domain::GAUGE, u64::from(g));
            match problem {
                Model::Base(inst) => random_gauge(inst.graph(), &mut rng),
                Model::Noisy(noisy) => random_gauge(noisy.base().graph(), &mut rng),
            }
        }
    };

    let total = gauges as usize * reads_per_gauge as usize;
    let results = exec::map_indexed(total, |item| -> Result<SampleRecord> {
        let g = (item / reads_per_gauge as usize) as u32;
        let gauge = gauge_for(g);
        let gauged = match problem {
            Model::Base(inst) => Gauged::Base(apply_gauge(inst, &gauge)?),
            Model::Noisy(noisy) => Gauged::Noisy(apply_gauge_noisy(noisy, &gauge)?),
        };
        let read_seed = child_seed(master_seed, domain::READ, item as u64);
        let mut record = match sampler {
            SamplerSpec::Sa(p) => simulated_annealing(gauged.model(), p, read_seed)?,
            SamplerSpec::Sqa(p) => sqa_sample(gauged.model(), p, read_seed)?,
        };
        record.gauge_id = g;
        record.config = ungauge_config(&record.config, &gauge)?;
        Ok(record)
    });
    results.into_iter().collect()
}
