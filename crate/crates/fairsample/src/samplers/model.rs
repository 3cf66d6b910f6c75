//! Unified sampler view over base and noisy instances.

use crate::instance::{Instance, NoisyInstance};
use crate::ising::SpinConfig;

/// The problem a sampler runs against: a base instance with exact integer
/// couplings, or a noisy one with real couplings and local fields.
#[derive(Debug, Clone, Copy)]
pub enum Model<'a> {
    Base(&'a Instance),
    Noisy(&'a NoisyInstance),
}

impl<'a> Model<'a> {
    /// Number of spins.
    pub fn n(&self) -> usize {
        match self {
            Model::Base(inst) => inst.num_spins(),
            Model::Noisy(noisy) => noisy.base().num_spins(),
        }
    }

    /// Largest coupling magnitude; the unit all temperatures are quoted in.
    pub fn scale(&self) -> f64 {
        match self {
            Model::Base(inst) => inst.coupling_scale(),
            Model::Noisy(noisy) => noisy.coupling_scale(),
        }
    }

    /// Effective coupling on coupler `k`.
    pub fn coupling(&self, k: usize) -> f64 {
        match self {
            Model::Base(inst) => f64::from(inst.coupling(k)),
            Model::Noisy(noisy) => noisy.coupling(k),
        }
    }

    /// Effective local field on dense spin `d` (zero for base instances).
    pub fn field(&self, d: usize) -> f64 {
        match self {
            Model::Base(_) => 0.0,
            Model::Noisy(noisy) => noisy.field(d),
        }
    }

    /// Neighbor list of dense spin `d` as (neighbor, coupler index) pairs.
    pub fn adj(&self, d: u32) -> &[(u32, u32)] {
        match self {
            Model::Base(inst) => inst.graph().adj_dense(d),
            Model::Noisy(noisy) => noisy.base().graph().adj_dense(d),
        }
    }

    /// Full energy of `config`.  Exact (integer-valued) for base instances.
    pub fn energy(&self, config: &SpinConfig) -> f64 {
        match self {
            Model::Base(inst) => {
                crate::ising::energy(inst, config).expect("config built for this instance") as f64
            }
            Model::Noisy(noisy) => {
                crate::ising::energy_noisy(noisy, config).expect("config built for this instance")
            }
        }
    }

    /// Energy change from flipping dense spin `q`.
    pub fn delta(&self, config: &SpinConfig, q: usize) -> f64 {
        match self {
            Model::Base(inst) => crate::ising::delta_energy(inst, config, q)
                .expect("config built for this instance") as f64,
            Model::Noisy(noisy) => crate::ising::delta_energy_noisy(noisy, config, q)
                .expect("config built for this instance"),
        }
    }
}
