//! Exact ground-state counting and enumeration.
//!
//! Two independent engines:
//!
//! * [`brute_force_enumerate`]: a Gray-code scan of all `2^N` configurations,
//!   feasible up to `N = 28`.
//! * [`frontier_count`] / [`frontier_enumerate`]: a transfer matrix sweeping
//!   cell rows top to bottom.  The frontier is the `4c` left-shore qubits
//!   carrying vertical wires downward, so `2^(4c)` states suffice at the row
//!   boundaries; the sweep is feasible through `c = 4`.
//!
//! Both engines work on integer couplings and track exact minima with 64-bit
//! minimizer counts (overflow is detected, never wrapped).  Noisy instances
//! fall back to a small brute force with a floating-point tie tolerance.

mod brute;
mod frontier;

pub use brute::{brute_force_enumerate, brute_force_enumerate_noisy, NoisyGroundStates};
pub use frontier::{frontier_count, frontier_enumerate};

use crate::ising::SpinConfig;

/// Exact minimum energy and minimizer count, without the configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundStateCount {
    pub min_energy: i64,
    pub count: u64,
}

/// A complete ground-state manifold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundStateSet {
    min_energy: i64,
    configs: Vec<SpinConfig>,
    exact: bool,
}

impl GroundStateSet {
    /// Builds a set, sorting and deduplicating the configurations.
    pub fn new(min_energy: i64, mut configs: Vec<SpinConfig>, exact: bool) -> Self {
        configs.sort();
        configs.dedup();
        Self {
            min_energy,
            configs,
            exact,
        }
    }

    pub fn min_energy(&self) -> i64 {
        self.min_energy
    }

    /// Configurations in canonical (packed-value) order.
    pub fn configs(&self) -> &[SpinConfig] {
        &self.configs
    }

    pub fn n_gs(&self) -> u64 {
        self.configs.len() as u64
    }

    /// Whether the set came from an exact oracle rather than a heuristic
    /// enumerator.
    pub fn exact(&self) -> bool {
        self.exact
    }

    /// Index of a configuration in canonical order.
    pub fn index_of(&self, config: &SpinConfig) -> Option<usize> {
        self.configs.binary_search(config).ok()
    }

    /// Spin-reversal symmetry check: every configuration's global flip is
    /// also in the set.
    pub fn closed_under_global_flip(&self) -> bool {
        self.configs
            .iter()
            .all(|c| self.index_of(&c.global_flip()).is_some())
    }
}

/// Outcome of an enumeration with a configuration cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    Complete(GroundStateSet),
    /// More minimizers than the cap; the exact count survives.
    Overflow {
        min_energy: i64,
        count: u64,
    },
}

impl Enumeration {
    pub fn min_energy(&self) -> i64 {
        match self {
            Enumeration::Complete(set) => set.min_energy(),
            Enumeration::Overflow { min_energy, .. } => *min_energy,
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            Enumeration::Complete(set) => set.n_gs(),
            Enumeration::Overflow { count, .. } => *count,
        }
    }

    pub fn into_complete(self) -> Option<GroundStateSet> {
        match self {
            Enumeration::Complete(set) => Some(set),
            Enumeration::Overflow { .. } => None,
        }
    }
}
