//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by graph construction, instance generation, the oracles,
/// the samplers, and the persistence layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for c = {c} (N = {n})")]
    QubitOutOfRange { index: u32, c: u32, n: u32 },

    #[error("coupler ({i}, {j}) is not a Chimera edge")]
    NotAChimeraEdge { i: u32, j: u32 },

    #[error("qubit {0} is inactive (listed as a defect)")]
    InactiveQubit(u32),

    #[error("grid dimension c must be positive")]
    ZeroGridDimension,

    #[error("free-spin elimination exhausted {attempts} local repair attempts")]
    RepairBudgetExhausted { attempts: u32 },

    #[error("qubit {0} has no couplers, so it is an unavoidable free spin")]
    UnrepairableFreeSpin(u32),

    #[error("coupling magnitude {value} at coupler {index} is outside the Sidon set")]
    NotSidon { index: usize, value: i8 },

    #[error("instance has {couplings} couplings but the graph has {couplers} couplers")]
    CouplingLengthMismatch { couplings: usize, couplers: usize },

    #[error("gauge covers {gauge} spins but the instance has {instance}")]
    GaugeSizeMismatch { gauge: usize, instance: usize },

    #[error("config covers {config} spins but the instance has {instance}")]
    ConfigSizeMismatch { config: usize, instance: usize },

    #[error("{what} is infeasible: {why}")]
    OracleInfeasible { what: &'static str, why: String },

    #[error("ground-state count overflowed a 64-bit counter")]
    CountOverflow,

    #[error("temperature schedule is empty")]
    EmptySchedule,

    #[error("temperature schedule must be positive and strictly decreasing")]
    BadSchedule,

    #[error("invalid sampler parameters: {0}")]
    BadParams(String),

    #[error("noise width must be non-negative, got {0}")]
    NegativeNoise(f64),

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("hash mismatch: {context} (expected {expected}, found {found})")]
    HashMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("artifact {path} is missing or unreadable: {why}")]
    MissingArtifact { path: String, why: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
