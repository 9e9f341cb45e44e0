use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of the exponent")]
    OutsideDomain { point: Vec<f64> },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("conjugate exponent is unbounded (p- = {0})")]
    UnboundedDual(f64),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("stencil of width {width} does not fit the {nodes} nodes along axis {axis}")]
    StencilTooWide {
        axis: usize,
        width: usize,
        nodes: usize,
    },

    #[error("ball of radius {radius} around {center:?} is not strictly inside the domain")]
    BallOutsideDomain { center: Vec<f64>, radius: f64 },

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel {0} is singular at the evaluation point")]
    Singular(String),

    #[error("kernel {kernel} is homogeneous of degree {degree}, expected {expected}")]
    WrongHomogeneity {
        kernel: String,
        degree: i32,
        expected: i32,
    },

    #[error("kernel {kernel} fails the spherical cancellation condition (mean {mean:e})")]
    NoCancellation { kernel: String, mean: f64 },

    #[error("dictionary is empty")]
    EmptyDictionary,

    #[error("component {component} does not have vanishing mean (mean {mean:e})")]
    NotMeanZero { component: usize, mean: f64 },

    #[error("unsupported dimension {0}")]
    Dimension(usize),

    #[error("cutoff is not identically one on the inner box")]
    CutoffNotOne,

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
