//! Stochastic solvers: simulated annealing, parallel tempering with
//! isoenergetic cluster moves, and simulated quantum annealing.
//!
//! All samplers are deterministic functions of (problem, parameters, seed).
//! Temperatures and transverse fields are dimensionless, expressed in units
//! of the largest coupling magnitude of the problem, so one parameter set
//! applies uniformly across instances whose couplings share a scale.

mod gauges;
mod model;
mod pt;
mod sa;
mod sqa;

pub use gauges::{run_with_gauges, SamplerSpec};
pub use model::Model;
pub use pt::{
    ica_enumerate, isoenergetic_cluster_move, pt_sweep, temperature_ladder, IcaOutcome, IcaStatus,
    PtParams, PtState,
};
pub use sa::{simulated_annealing, SaParams};
pub use sqa::{default_gamma_schedule, sqa_sample, SqaParams};

use crate::ising::SpinConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// One readout: the configuration a sampler returned, with enough context to
/// reproduce it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleRecord {
    /// Which sampler produced the record: `"sa"`, `"ica"`, or `"sqa"`.
    pub sampler_id: String,
    /// Content hash of the parameter block, for grouping runs.
    pub params_hash: String,
    /// Index of the gauge the read ran under (0 is the identity gauge).
    pub gauge_id: u32,
    /// The returned configuration, mapped back to the ungauged problem.
    pub config: SpinConfig,
    /// Energy of `config` under the sampled Hamiltonian.  Integer-valued
    /// for base instances.
    pub energy: f64,
    /// Total Monte Carlo sweeps the read was granted.
    pub sweep_budget: u64,
    /// The seed this specific read ran from.
    pub seed: u64,
}

/// Content hash identifying a parameter block, independent of seeds.
pub fn params_hash<P: Serialize>(params: &P) -> String {
    let bytes = serde_json::to_vec(params).expect("parameter blocks serialize infallibly");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    format!("{:x}", hasher.finalize())
}
