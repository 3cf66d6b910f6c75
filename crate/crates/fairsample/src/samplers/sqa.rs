//! Simulated quantum annealing: path-integral Monte Carlo over Trotter
//! slices with a transverse field annealed to zero.
//!
//! The classical action couples each spin to its copies in the neighboring
//! slices with a ferromagnetic strength J_perp(G) = -(T/2) ln tanh(G/(M T)),
//! which diverges as the transverse field G vanishes and locks the slices
//! together.  The problem term of each slice enters with weight 1/M.

use super::model::Model;
use super::sa::random_config;
use super::{params_hash, SampleRecord};
use crate::ising::SpinConfig;
use crate::{Error, Result};
use rand::Rng;

/// Knobs for one simulated-quantum-annealing run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SqaParams {
    /// Number of Trotter slices M.
    pub trotter_slices: u32,
    /// Total sweeps across the whole schedule; each sweep updates every spin
    /// of every slice once.
    pub sweeps: u64,
    /// Simulation temperature, in units of the largest coupling magnitude.
    pub temperature: f64,
    /// Transverse-field values visited in order, positive and
    /// non-increasing, ending at no more than a hundredth of the start.
    pub gamma_schedule: Vec<f64>,
}

impl SqaParams {
    /// Defaults sized for small lattices: 16 slices at T = 0.15 with a linear
    /// field ramp.
    pub fn desk() -> Self {
        SqaParams {
            trotter_slices: 16,
            sweeps: 1 << 9,
            temperature: 0.15,
            gamma_schedule: default_gamma_schedule(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trotter_slices == 0 {
            return Err(Error::BadParams("need at least one Trotter slice".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::BadParams("sweeps must be positive".into()));
        }
        if self.temperature <= 0.0 {
            return Err(Error::BadParams("temperature must be positive".into()));
        }
        if self.gamma_schedule.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if self.gamma_schedule.iter().any(|&g| g <= 0.0)
            || self.gamma_schedule.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::BadSchedule);
        }
        let first = self.gamma_schedule[0];
        let last = *self.gamma_schedule.last().unwrap();
        if last > 1e-2 * first {
            return Err(Error::BadSchedule);
        }
        Ok(())
    }
}

/// Linear ramp of the transverse field from 3.0 down to 0.01.
pub fn default_gamma_schedule() -> Vec<f64> {
    let steps = 64;
    (0..steps)
        .map(|i| 3.0 + (0.01 - 3.0) * f64::from(i) / f64::from(steps - 1))
        .collect()
}

/// Anneals the transverse field down the schedule at fixed temperature and
/// returns the single slice with the lowest problem energy at the end.
pub fn sqa_sample(model: Model, params: &SqaParams, seed: u64) -> Result<SampleRecord> {
    params.validate()?;
    let mut rng = crate::seeds::rng_from(seed);
    let n = model.n();
    let m = params.trotter_slices as usize;
    let t = params.temperature;
    let scale = model.scale();
    let steps = params.gamma_schedule.len() as u64;

    let mut slices: Vec<SpinConfig> = (0..m).map(|_| random_config(n, &mut rng)).collect();
    let mut energies: Vec<f64> = slices.iter().map(|s| model.energy(s)).collect();

    for sweep in 0..params.sweeps {
        let gamma = params.gamma_schedule[(sweep * steps / params.sweeps) as usize];
        let j_perp = -(t / 2.0) * (gamma / (m as f64 * t)).tanh().ln();
        for slice in 0..m {
            let up = if slice + 1 == m { 0 } else { slice + 1 };
            let down = if slice == 0 { m - 1 } else { slice - 1 };
            for q in 0..n {
                let problem_delta = model.delta(&slices[slice], q);
                let inter = if m == 1 {
                    // A single slice couples only to itself; the slice term
                    // is constant and drops out of the dynamics.
                    0.0
                } else {
                    let s = f64::from(slices[slice].spin(q));
                    let s_up = f64::from(slices[up].spin(q));
                    let s_down = f64::from(slices[down].spin(q));
                    2.0 * j_perp * s * (s_up + s_down)
                };
                let delta = problem_delta / (m as f64 * scale) + inter;
                // Ties flip with probability 1/2; see the note in the
                // simulated-annealing sweep.
                let accept = if delta < 0.0 {
                    true
                } else if delta == 0.0 {
                    rng.gen::<bool>()
                } else {
                    rng.gen::<f64>() < (-delta / t).exp()
                };
                if accept {
                    slices[slice].flip(q);
                    energies[slice] += problem_delta;
                }
            }
        }
    }

    let best = (0..m)
        .min_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
        .unwrap();
    let config = slices[best].clone();
    // Fresh evaluation, so the recorded energy is free of any roundoff the
    // running sums accumulated on noisy instances.
    let recorded = model.energy(&config);
    Ok(SampleRecord {
        sampler_id: "sqa".into(),
        params_hash: params_hash(params),
        gauge_id: 0,
        config,
        energy: recorded,
        sweep_budget: params.sweeps,
        seed,
    })
}
