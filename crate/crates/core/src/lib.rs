//! Numerical toolkit for Báez-Duarte-type approximation distances of
//! Dirichlet polynomials.
//!
//! - [`poly`]: Dirichlet polynomials, the step function `kappa_r`, zero strip
//!   bounds and the formal inverse.
//! - [`zeros`]: argument-principle zero counting, localization and the
//!   on-line zero sum `C`.
//! - [`distance`]: exact Gram systems of the generators `kappa_r(1/(kx))` and
//!   the distance `d_{n,r}` by two independent routes.
//! - [`lubinsky`]: the orthonormal system `psi_n`, its kernels and the
//!   minimum-norm interpolation bound.

pub mod compensated;
pub mod distance;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod lubinsky;
pub mod mp;
pub mod par;
pub mod poly;
pub mod quadrature;
pub mod zeros;

pub use error::{Error, Result};
pub use exact::GaussRational;
pub use mp::{Complex, Precision};
pub use poly::DirichletPolynomial;
