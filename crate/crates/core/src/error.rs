//! Error type shared by all estimation modules.

use thiserror::Error;

/// Errors produced by the estimation engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A model record offers no route to chip-hours.
    #[error("underdetermined record: {model}: {reason}")]
    Underdetermined { model: String, reason: String },

    /// Hardware type not present in the spec table.
    #[error("unknown hardware type: {0}")]
    UnknownHardware(String),

    /// No purchase price and no TPU cost entry for a hardware type.
    #[error("no price path for hardware: {0}")]
    NoPricePath(String),

    /// The cloud price database has nothing applicable after all fallbacks.
    #[error("no applicable price for {model} ({hardware})")]
    NoApplicablePrice { model: String, hardware: String },

    /// Fewer points than a fit or test requires.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An interval distribution violates its invariants.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A simulation formula references a variable the caller did not supply.
    #[error("incomplete variable set: missing {0}")]
    IncompleteVariableSet(String),

    /// No default variable set exists for a method/hardware-class pair.
    #[error("no variable set for {0}")]
    UnknownVariableSet(String),

    /// Slope-comparison test cannot run (degenerate residuals).
    #[error("test unavailable: {0}")]
    TestUnavailable(String),

    /// Configuration value out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
