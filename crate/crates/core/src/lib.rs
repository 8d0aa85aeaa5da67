//! Extension calculus for elliptic cone operators whose cross section has
//! been reduced to a finite number of modes.
//!
//! A model is a weight `nu` together with the indicial family
//! `[P_0, ..., P_{N-1}]` of matrix polynomials in `sigma`. From it the crate
//! computes the boundary spectrum, singular chains at each spectral point,
//! the basis of `D_max / D_min`, the adjoint pairing and the domains built
//! from it (adjoints, selfadjoint extensions, the Friedrichs domain).
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`); the
//! aliases at the crate root fix `f64`, which is what the default
//! [`Tolerances`] are calibrated for.

pub mod chains;
pub mod config;
pub mod error;
pub mod extension;
pub mod fixtures;
pub mod linalg;
pub mod mellin;
pub mod model;
pub mod pairing;
pub mod polynomial;
pub mod scalar;
pub mod series;
pub mod spectrum;

pub use config::Tolerances;
pub use error::{ConeError, Result};
pub use model::{ConeModel, Placement};
pub use polynomial::MatrixPolynomial;
pub use scalar::{CMat, CVec, Cx, Real};
pub use spectrum::{SpectralPoint, Strip};

/// Complex `f64`.
pub type C64 = Cx<f64>;
/// `f64` matrix polynomial.
pub type Poly = MatrixPolynomial<f64>;
/// `f64` cone model.
pub type Model = ConeModel<f64>;
/// `f64` vector-valued Laurent germ.
pub type Germ = series::LaurentGerm<f64>;
/// `f64` singular chain basis.
pub type Chains = chains::SingularChainBasis<f64>;
/// `f64` global basis of `E(A)`.
pub type Basis = extension::GlobalBasis<f64>;
/// `f64` domain subspace.
pub type Domain = extension::DomainSubspace<f64>;
/// `f64` Gram matrix.
pub type Gram = pairing::PairingGram<f64>;
/// `f64` spectral point.
pub type Point64 = SpectralPoint<f64>;
