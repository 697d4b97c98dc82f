//! Certified total-positivity toolkit for modified Bessel kernels.
//!
//! * [`scalar`]: ball arithmetic ([`CertifiedReal`]) with precision escalation.
//! * [`bessel`]: rigorous enclosures of `I_nu(x)` by series and by quadrature.
//! * [`kernels`]: Bessel, Toeplitz Bessel, Karlin and Vandermonde matrices.
//! * [`positivity`]: determinants, minors, total-positivity certificates,
//!   Plücker coordinates and sign-change counts.
//! * [`heatflow`]: the lattice heat equation satisfied by Bessel determinants.

pub mod bessel;
pub mod error;
pub mod heatflow;
pub mod kernels;
pub mod positivity;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{CertifiedReal, PrecisionPolicy, Sign};
