//! Numerical building blocks shared by the analysis modules: double-double
//! arithmetic, compensated summation and quadrature rules.

pub mod dd;
pub mod quad;
pub mod sum;

pub use dd::{ComplexDd, Dd};
pub use quad::{gauss_kronrod_adaptive, gauss_legendre, periodic_trapezoid, QuadResult};
pub use sum::{CompensatedComplexSum, CompensatedSum};
