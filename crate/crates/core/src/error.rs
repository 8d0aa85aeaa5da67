//! Error type for every fallible operation.

use thiserror::Error;

/// A complex number as `(re, im)`, stored in `f64` for messages.
pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("leading coefficient of the conormal symbol is singular (cond {cond:.3e})")]
    SingularLeading { cond: f64 },
    #[error("root {sigma:?} lies within {tol:e} of the line Im sigma = {line}")]
    RootOnBoundary { sigma: Point, line: f64, tol: f64 },
    #[error("{0:?} is not a spectral point (symbol numerically invertible)")]
    NotSpectral(Point),
    #[error("complementary block is numerically singular (cond {cond:.3e})")]
    BlockNotInvertible { cond: f64 },
    #[error("truncation order {order} too short for the requested germ data")]
    TruncationTooShort { order: usize },
    #[error("germ is not in the span of the chain basis (residual {residual:.3e})")]
    NotInSpan { residual: f64 },
    #[error("{0:?} is not a real point")]
    NotRealPoint(Point),
    #[error("germ base points do not match: {left:?} vs {right:?}")]
    BasePointMismatch { left: Point, right: Point },
    #[error("contour of radius {radius} around {center:?} passes within tolerance of {point:?}")]
    ContourTouchesSpectrum { center: Point, radius: f64, point: Point },
    #[error("shifted point {shifted:?} is within clustering tolerance of {other:?} without coinciding")]
    ShiftCollision { shifted: Point, other: Point },
    #[error("model is not symmetric (max deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },
    #[error("conormal symbol is not nonnegative (min eigenvalue {min_eig:.3e} at sigma = {at})")]
    NotPositive { min_eig: f64, at: f64 },
    #[error("odd partial multiplicity {mult} at {sigma:?}")]
    OddMultiplicity { sigma: Point, mult: usize },
    #[error("pairing is degenerate: expected dimension {expected}, found {found}")]
    DegeneratePairing { expected: usize, found: usize },
    #[error("subspace is not invariant under multiplication by sigma (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("quadrature did not reach tolerance (estimate {estimate:.3e})")]
    QuadratureFailure { estimate: f64 },
    #[error("integral diverges: exponent {exponent} has nonpositive decay rate")]
    Divergent { exponent: String },
    #[error("operation requires a scalar model, got d = {0}")]
    NotScalar(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("partial multiplicities disagree: rank test {rank:?}, elimination {elimination:?}")]
    MultiplicityMismatch { rank: Vec<usize>, elimination: Vec<usize> },
}

pub type Result<T> = std::result::Result<T, ConeError>;

pub(crate) fn point<T: crate::Real>(z: crate::Cx<T>) -> Point {
    (z.re.to_f64_lossy(), z.im.to_f64_lossy())
}
