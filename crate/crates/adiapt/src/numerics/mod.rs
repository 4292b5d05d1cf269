//! Self-contained numerical kernels: dense Hermitian eigensolvers, projected
//! linear solves, Gauss quadrature, cubic splines, finite-difference stencils
//! and least-squares line fits.
//!
//! Everything here is pure and reentrant; all linear algebra runs in complex
//! double precision so real-symmetric and genuinely complex problems share a
//! single code path.

mod fit;
mod hermitian;
mod quadrature;
mod spline;
mod stencil;

pub use fit::{fit_line, LineFit};
pub use hermitian::{
    hermitian_eigen, solve_generalized_hermitian, solve_linear_hermitian, EigenPair,
    HermitianMatrix,
};
pub use quadrature::QuadratureRule;
pub use spline::{ComplexSpline, CubicSpline, VectorSpline};
pub use stencil::{derivative_field, derivative_scalar_field};
