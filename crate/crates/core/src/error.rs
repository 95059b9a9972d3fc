use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MourreError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem or combination failed validation before any work was done.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The calibration bracket shows no sign change.
    #[error(
        "construction failure for {variant} (kappa={kappa}, n={n}): no sign change on \
         [{lo}, {hi}] (directions {dir_lo}, {dir_hi})"
    )]
    ConstructionFailure {
        kappa: u32,
        n: usize,
        variant: String,
        lo: f64,
        hi: f64,
        dir_lo: i8,
        dir_hi: i8,
    },

    /// Floating point resolution is insufficient to separate the chain.
    #[error("precision exhausted (kappa={kappa}, n={n}): {detail}")]
    PrecisionExhausted { kappa: u32, n: usize, detail: String },

    /// A computed solution violates one of its structural invariants.
    #[error("degenerate solution: {0}")]
    DegenerateSolution(String),

    /// A sequence computation failed at a specific depth.
    #[error("sequence failed at n={n}: {source}")]
    SequenceFailure {
        n: usize,
        #[source]
        source: Box<MourreError>,
    },

    /// A linear system has no solution within tolerance.
    #[error("no solution: residual {residual:e} exceeds tolerance")]
    NoSolution { residual: f64 },

    /// A scan found a non-positive value inside a band.
    #[error("certification failure at E={e}, x={x}: G={value:e}")]
    CertificationFailure { e: f64, x: f64, value: f64 },

    /// Every candidate index set was rejected.
    #[error("sigma search exhausted after {tried} candidates: {diagnostics}")]
    SearchExhausted { tried: usize, diagnostics: String },

    /// A one-dimensional root bracket does not change sign.
    #[error("bracket failure: {0}")]
    BracketFailure(String),
}

pub type Result<T> = std::result::Result<T, MourreError>;
