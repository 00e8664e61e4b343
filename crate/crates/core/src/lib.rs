//! Clifford coherent state transforms on spheres.
//!
//! Sphere data `f: S^m -> C_{m+1}` is smoothed by the heat semigroup and then
//! extended monogenically (Cauchy-Kowalewski extension) to `R^{m+1} \ {0}`.
//! With the Gaussian-in-`log |x|` measure of [`cst::MeasureParams`] the result
//! is a unitary map onto square-integrable monogenic functions; the
//! [`cst::verify_unitarity`] harness certifies this numerically.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI and
//! the verification suites.

pub mod clifford;
pub mod cst;
pub mod error;
pub mod gegenbauer;
pub mod kernels;
pub mod output;
pub mod polynomial;
pub mod scalar;
pub mod spectral;
pub mod sphere;

pub use clifford::{wedge_vectors, Multivector, Vector1};
pub use error::{Error, Result};
pub use polynomial::MvPolynomial;
pub use scalar::Real;

pub type Multivector64 = Multivector<f64>;
pub type Multivector32 = Multivector<f32>;
pub type Vector64 = Vector1<f64>;
pub type MvPolynomial64 = MvPolynomial<f64>;
pub type QuadratureRule64 = sphere::QuadratureRule<f64>;
pub type SphereFunction64 = sphere::SphereFunction<f64>;
pub type SpectralDecomposition64 = spectral::SpectralDecomposition<f64>;
pub type LaurentMonogenic64 = cst::LaurentMonogenic<f64>;
