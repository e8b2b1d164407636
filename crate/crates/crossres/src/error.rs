//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fock truncation dimensions must be at least 2.
    #[error("invalid dimension {dim}: Fock truncation must be at least 2")]
    InvalidDimension { dim: usize },

    /// Factor operator does not fit the slot it is embedded into.
    #[error("embed mismatch: operator is {got}x{got}, slot expects {expected}x{expected}")]
    EmbedMismatch { expected: usize, got: usize },

    /// Interaction term exponent list does not match the mode count.
    #[error("term shape error: {got} exponent pairs for {expected} modes")]
    TermShape { expected: usize, got: usize },

    /// Matrix fails the Hermiticity tolerance.
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// Matrix fails the unitarity tolerance.
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// Comparison-subspace argument is not an orthogonal projector.
    #[error("matrix is not a projector (max deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    /// Interaction terms of differing polynomial degree cannot share one frame.
    #[error("heterogeneous terms: degrees {degrees:?} do not admit a single frame")]
    HeterogeneousTerms { degrees: Vec<u32> },

    /// An operation was given an empty term list.
    #[error("empty interaction specification")]
    EmptySpec,

    /// Term is excitation-neutral; no cross-resonant drive frequency exists.
    #[error("no resonance: every mode has zero net exponent")]
    NoResonance,

    /// Shapes of a system description and a Hilbert layout disagree.
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    /// Dressing angle is undefined at zero drive and zero detuning.
    #[error("degenerate dressing: drive strength and qubit detuning are both zero")]
    DegenerateDressing,

    /// State vector is not normalized to tolerance.
    #[error("state not normalized (norm {norm})")]
    Normalization { norm: f64 },

    /// A sweep or scaling study was given no axis values.
    #[error("empty sweep axis")]
    EmptySweep,

    /// Halving the step changed the propagator more than the tolerance allows.
    #[error("step too coarse: refinement changed result by {error:.3e} (tolerance {tolerance:.3e})")]
    StepTooCoarse { error: f64, tolerance: f64 },
}
