//! Spin-glass instances on Chimera graphs.
//!
//! Couplings are drawn uniformly from the Sidon set `{+/-5, +/-6, +/-7}`,
//! whose pairwise-distinct magnitude sums keep accidental degeneracies rare.
//! Generation then removes free spins: a qubit is free when some sign pattern
//! over its incident coupling magnitudes sums to zero, letting it flip at no
//! energy cost in a matching local environment.  Repair is local: the failing
//! qubit's incident magnitudes are redrawn (signs kept) and the qubit and its
//! neighbors are rechecked; instances that resist 100 local repairs are
//! discarded by the caller and regenerated from the next seed.
//!
//! The module also provides gauge transformations (`J_ij -> e_i e_j J_ij`,
//! `S_i -> e_i S_i`), Gaussian control noise on couplings and local fields,
//! and the accepted-degeneracy filter `N_GS = 3 * 2^k`, `k >= 1`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::graph::{ChimeraGraph, Defects};
use crate::ising::SpinConfig;
use crate::{Error, Result};

/// Allowed coupling magnitudes.
pub const SIDON_MAGNITUDES: [i8; 3] = [5, 6, 7];

/// Local repair attempts per spin before an instance is abandoned.
pub const REPAIR_BUDGET: u32 = 100;

/// A base instance: a Chimera graph plus one integer coupling per coupler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    graph: Arc<ChimeraGraph>,
    couplings: Vec<i8>,
    seed: u64,
}

impl Instance {
    /// Assembles an instance, validating coupling count and magnitudes.
    pub fn from_parts(graph: Arc<ChimeraGraph>, couplings: Vec<i8>, seed: u64) -> Result<Self> {
        if couplings.len() != graph.num_couplers() {
            return Err(Error::CouplingLengthMismatch {
                couplings: couplings.len(),
                couplers: graph.num_couplers(),
            });
        }
        for (k, &j) in couplings.iter().enumerate() {
            if !SIDON_MAGNITUDES.contains(&j.unsigned_abs().try_into().unwrap_or(0)) {
                return Err(Error::NotSidon { index: k, value: j });
            }
        }
        Ok(Self {
            graph,
            couplings,
            seed,
        })
    }

    pub fn graph(&self) -> &ChimeraGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<ChimeraGraph> {
        Arc::clone(&self.graph)
    }

    /// Number of active spins.
    pub fn num_spins(&self) -> usize {
        self.graph.num_active()
    }

    /// Coupling of coupler `k` (aligned with `graph().couplers()`).
    #[inline]
    pub fn coupling(&self, k: usize) -> i8 {
        self.couplings[k]
    }

    pub fn couplings(&self) -> &[i8] {
        &self.couplings
    }

    /// Seed of record from generation.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest coupling magnitude; sampler temperatures are expressed in
    /// units of this scale.
    pub fn coupling_scale(&self) -> f64 {
        self.couplings
            .iter()
            .map(|j| j.unsigned_abs())
            .max()
            .unwrap_or(1) as f64
    }
}

/// A base instance with frozen Gaussian control errors.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyInstance {
    base: Instance,
    coupler_noise: Vec<f64>,
    field_noise: Vec<f64>,
    sigma_j: f64,
    sigma_h: f64,
    seed: u64,
}

impl NoisyInstance {
    pub fn from_parts(
        base: Instance,
        coupler_noise: Vec<f64>,
        field_noise: Vec<f64>,
        sigma_j: f64,
        sigma_h: f64,
        seed: u64,
    ) -> Result<Self> {
        if coupler_noise.len() != base.graph().num_couplers() {
            return Err(Error::CouplingLengthMismatch {
                couplings: coupler_noise.len(),
                couplers: base.graph().num_couplers(),
            });
        }
        if field_noise.len() != base.num_spins() {
            return Err(Error::ConfigSizeMismatch {
                config: field_noise.len(),
                instance: base.num_spins(),
            });
        }
        Ok(Self {
            base,
            coupler_noise,
            field_noise,
            sigma_j,
            sigma_h,
            seed,
        })
    }

    pub fn base(&self) -> &Instance {
        &self.base
    }

    /// Effective coupling of coupler `k`, base plus noise.
    #[inline]
    pub fn coupling(&self, k: usize) -> f64 {
        self.base.coupling(k) as f64 + self.coupler_noise[k]
    }

    /// Local field on dense index `d`.
    #[inline]
    pub fn field(&self, d: usize) -> f64 {
        self.field_noise[d]
    }

    pub fn coupler_noise(&self) -> &[f64] {
        &self.coupler_noise
    }

    pub fn field_noise(&self) -> &[f64] {
        &self.field_noise
    }

    pub fn sigma_j(&self) -> f64 {
        self.sigma_j
    }

    pub fn sigma_h(&self) -> f64 {
        self.sigma_h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest effective coupling magnitude.
    pub fn coupling_scale(&self) -> f64 {
        (0..self.coupler_noise.len())
            .map(|k| self.coupling(k).abs())
            .fold(1.0, f64::max)
    }
}

/// Draws one Sidon coupling per active coupler.
pub fn draw_couplings(graph: &ChimeraGraph, rng: &mut impl Rng) -> Vec<i8> {
    (0..graph.num_couplers())
        .map(|_| {
            let mag = SIDON_MAGNITUDES[rng.gen_range(0..SIDON_MAGNITUDES.len())];
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

/// Convenience: build the graph and draw couplings, without free-spin
/// elimination.
pub fn random_instance(c: u32, defects: &Defects, rng: &mut impl Rng) -> Result<Instance> {
    let graph = Arc::new(ChimeraGraph::build(c, defects)?);
    let couplings = draw_couplings(&graph, rng);
    Instance::from_parts(graph, couplings, 0)
}

/// Whether some sign pattern over `mags` sums to zero.
///
/// Equivalent to asking for a subset with sum equal to half the total, found
/// here with a bitset subset-sum sweep.  Degree is at most 6 and magnitudes
/// at most 7, so sums fit comfortably in one `u64` bitset.
fn zero_signed_sum(mags: &[u8]) -> bool {
    let total: u32 = mags.iter().map(|&m| m as u32).sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    let mut reachable: u64 = 1;
    for &m in mags {
        reachable |= reachable << m;
    }
    reachable >> (total / 2) & 1 == 1
}

/// Magnitudes incident to dense index `d`.
fn incident_mags(instance: &Instance, d: u32) -> Vec<u8> {
    instance
        .graph()
        .adj_dense(d)
        .iter()
        .map(|&(_, k)| instance.coupling(k as usize).unsigned_abs())
        .collect()
}

/// Dense indices of spins that can flip for free in some local environment.
///
/// Empty on instances that passed elimination.
pub fn free_spin_audit(instance: &Instance) -> Vec<u32> {
    (0..instance.num_spins() as u32)
        .filter(|&d| zero_signed_sum(&incident_mags(instance, d)))
        .collect()
}

/// Removes free spins by local repair.
///
/// Scans every spin depth-first; when one fails the zero-sum check, the
/// magnitude of one randomly chosen incident coupler is redrawn (sign kept)
/// and the spin plus the one disturbed neighbor are rechecked, the spin
/// itself first.  Touching a single coupler per attempt keeps the repair
/// cascade subcritical, so the pass terminates at any lattice size.  Each
/// spin gets [`REPAIR_BUDGET`] redraws; a spin that exhausts its budget fails
/// the whole pass with [`Error::RepairBudgetExhausted`], which callers treat
/// as a signal to regenerate from scratch.  An active qubit with no couplers
/// at all is a free spin nothing can repair, reported as
/// [`Error::UnrepairableFreeSpin`].
pub fn eliminate_free_spins(instance: &Instance, rng: &mut impl Rng) -> Result<Instance> {
    let graph = instance.graph_arc();
    let n = instance.num_spins() as u32;
    for d in 0..n {
        if graph.adj_dense(d).is_empty() {
            return Err(Error::UnrepairableFreeSpin(graph.qubit_of(d)));
        }
    }

    let mut couplings = instance.couplings().to_vec();
    let mut stack: Vec<u32> = (0..n).rev().collect();
    let mut queued = vec![true; n as usize];
    let mut attempts = vec![0u32; n as usize];

    while let Some(d) = stack.pop() {
        queued[d as usize] = false;
        let mags: Vec<u8> = graph
            .adj_dense(d)
            .iter()
            .map(|&(_, k)| couplings[k as usize].unsigned_abs())
            .collect();
        if !zero_signed_sum(&mags) {
            continue;
        }
        if attempts[d as usize] == REPAIR_BUDGET {
            return Err(Error::RepairBudgetExhausted {
                attempts: REPAIR_BUDGET,
            });
        }
        attempts[d as usize] += 1;
        let pick = rng.gen_range(0..graph.adj_dense(d).len());
        let (disturbed, k) = graph.adj_dense(d)[pick];
        let mag = SIDON_MAGNITUDES[rng.gen_range(0..SIDON_MAGNITUDES.len())];
        couplings[k as usize] = if couplings[k as usize] < 0 { -mag } else { mag };
        if !queued[disturbed as usize] {
            queued[disturbed as usize] = true;
            stack.push(disturbed);
        }
        if !queued[d as usize] {
            queued[d as usize] = true;
            stack.push(d);
        }
    }

    Instance::from_parts(graph, couplings, instance.seed())
}

/// Draws couplings and eliminates free spins, all deterministically from
/// `seed`.  Errors from the repair budget mean "retry with another seed".
pub fn generate_instance(graph: &Arc<ChimeraGraph>, seed: u64) -> Result<Instance> {
    use crate::seeds::{domain, stream};
    let mut draw_rng = stream(seed, domain::COUPLINGS, 0);
    let couplings = draw_couplings(graph, &mut draw_rng);
    let drawn = Instance::from_parts(Arc::clone(graph), couplings, seed)?;
    let mut repair_rng = stream(seed, domain::REPAIR, 0);
    eliminate_free_spins(&drawn, &mut repair_rng)
}

/// Accepts a ground-state count iff it has the form `3 * 2^k` with `k >= 1`,
/// returning `k`.
pub fn filter_degeneracy(n_gs: u64) -> Option<u32> {
    if n_gs == 0 || !n_gs.is_multiple_of(3) {
        return None;
    }
    let pow = n_gs / 3;
    if pow >= 2 && pow.is_power_of_two() {
        Some(pow.trailing_zeros())
    } else {
        None
    }
}

/// Per-spin signs of a gauge transformation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeVector {
    signs: Vec<i8>,
}

impl GaugeVector {
    pub fn identity(n: usize) -> Self {
        Self { signs: vec![1; n] }
    }

    pub fn from_signs(signs: Vec<i8>) -> Self {
        debug_assert!(signs.iter().all(|&s| s == 1 || s == -1));
        Self { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    #[inline]
    pub fn sign(&self, d: usize) -> i8 {
        self.signs[d]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

/// Uniform random gauge over the active spins of `graph`.
pub fn random_gauge(graph: &ChimeraGraph, rng: &mut impl Rng) -> GaugeVector {
    GaugeVector {
        signs: (0..graph.num_active())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect(),
    }
}

/// Applies a gauge to an instance: `J_ij -> e_i e_j J_ij`.
pub fn apply_gauge(instance: &Instance, gauge: &GaugeVector) -> Result<Instance> {
    if gauge.len() != instance.num_spins() {
        return Err(Error::GaugeSizeMismatch {
            gauge: gauge.len(),
            instance: instance.num_spins(),
        });
    }
    let graph = instance.graph();
    let couplings = graph
        .couplers()
        .iter()
        .enumerate()
        .map(|(k, &(qi, qj))| {
            let di = graph.dense_of(qi).unwrap() as usize;
            let dj = graph.dense_of(qj).unwrap() as usize;
            instance.coupling(k) * gauge.sign(di) * gauge.sign(dj)
        })
        .collect();
    Instance::from_parts(instance.graph_arc(), couplings, instance.seed())
}

/// Applies a gauge to a noisy instance: couplings and coupler noise pick up
/// `e_i e_j`, local fields pick up `e_i`.
pub fn apply_gauge_noisy(noisy: &NoisyInstance, gauge: &GaugeVector) -> Result<NoisyInstance> {
    let base = apply_gauge(noisy.base(), gauge)?;
    let graph = base.graph();
    let coupler_noise = graph
        .couplers()
        .iter()
        .enumerate()
        .map(|(k, &(qi, qj))| {
            let di = graph.dense_of(qi).unwrap() as usize;
            let dj = graph.dense_of(qj).unwrap() as usize;
            noisy.coupler_noise()[k] * f64::from(gauge.sign(di) * gauge.sign(dj))
        })
        .collect();
    let field_noise = (0..base.num_spins())
        .map(|d| noisy.field_noise()[d] * f64::from(gauge.sign(d)))
        .collect();
    NoisyInstance::from_parts(
        base,
        coupler_noise,
        field_noise,
        noisy.sigma_j(),
        noisy.sigma_h(),
        noisy.seed(),
    )
}

/// Maps a configuration of the gauged instance back to the base instance:
/// `S_i -> e_i S_i`.  Energies are preserved by construction.
pub fn ungauge_config(config: &SpinConfig, gauge: &GaugeVector) -> Result<SpinConfig> {
    if gauge.len() != config.len() {
        return Err(Error::ConfigSizeMismatch {
            config: config.len(),
            instance: gauge.len(),
        });
    }
    let mut out = config.clone();
    for d in 0..gauge.len() {
        if gauge.sign(d) == -1 {
            out.flip(d);
        }
    }
    Ok(out)
}

/// Freezes zero-mean Gaussian noise onto couplings and local fields.
pub fn apply_noise(
    instance: &Instance,
    sigma_j: f64,
    sigma_h: f64,
    seed: u64,
) -> Result<NoisyInstance> {
    if sigma_j < 0.0 {
        return Err(Error::NegativeNoise(sigma_j));
    }
    if sigma_h < 0.0 {
        return Err(Error::NegativeNoise(sigma_h));
    }
    let normal_j = Normal::new(0.0, sigma_j).expect("validated sigma");
    let normal_h = Normal::new(0.0, sigma_h).expect("validated sigma");
    let mut rng = crate::seeds::stream(seed, crate::seeds::domain::NOISE, 0);
    let coupler_noise = (0..instance.graph().num_couplers())
        .map(|_| normal_j.sample(&mut rng))
        .collect();
    let field_noise = (0..instance.num_spins())
        .map(|_| normal_h.sample(&mut rng))
        .collect();
    NoisyInstance::from_parts(
        instance.clone(),
        coupler_noise,
        field_noise,
        sigma_j,
        sigma_h,
        seed,
    )
}
