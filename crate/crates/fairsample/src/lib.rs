//! Benchmark suite for fair sampling of degenerate Ising ground states on
//! Chimera graphs.
//!
//! The crate covers the full pipeline:
//!
//! * [`graph`]: Chimera topology with explicit defect handling.
//! * [`instance`]: spin-glass instance generation with Sidon-set couplings,
//!   free-spin elimination, gauge transformations, and Gaussian control noise.
//! * [`ising`]: bit-packed spin configurations and integer-exact energies.
//! * [`oracle`]: exact ground-state counting and enumeration (brute force and
//!   a frontier transfer matrix over cell rows).
//! * [`samplers`]: simulated annealing, parallel tempering with isoenergetic
//!   cluster moves, and simulated quantum annealing.
//! * [`fairness`]: rank histograms, the maximal cumulative deviation from the
//!   uniform distribution, bootstrap confidence intervals, and matched uniform
//!   baselines.
//! * [`files`]: versioned text formats with embedded content hashes.

pub mod error;
pub mod exec;
pub mod fairness;
pub mod files;
pub mod graph;
pub mod instance;
pub mod ising;
pub mod oracle;
pub mod samplers;
pub mod seeds;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
