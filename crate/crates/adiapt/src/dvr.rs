//! Sine (particle-in-a-box) discrete variable representation on (0, L):
//! uniform interior grid, exact kinetic matrix in the sine space, diagonal
//! potentials. Used for the radial problems where a Gaussian basis cannot
//! respect the q > 0 domain.

use nalgebra::DMatrix;

use crate::models::Grid1D;

/// Uniform interior DVR grid q_k = k L/(N+1), k = 1..=N.
pub fn dvr_grid(l: f64, n: usize) -> Grid1D {
    let delta = l / (n + 1) as f64;
    Grid1D::uniform(delta, l - delta, n)
}

/// Matrix of -d²/dq² in the sine DVR on (0, L) with N interior points.
pub fn neg_second_derivative(n: usize, l: f64) -> DMatrix<f64> {
    let m = (n + 1) as f64;
    let factor = (std::f64::consts::PI / l).powi(2);
    DMatrix::from_fn(n, n, |i, j| {
        let (fi, fj) = ((i + 1) as f64, (j + 1) as f64);
        if i == j {
            factor * ((2.0 * m * m + 1.0) / 3.0 - 1.0 / (fi * std::f64::consts::PI / m).sin().powi(2))
                / 2.0
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let diff = (fi - fj) * std::f64::consts::PI / (2.0 * m);
            let sum = (fi + fj) * std::f64::consts::PI / (2.0 * m);
            sign * factor * (1.0 / diff.sin().powi(2) - 1.0 / sum.sin().powi(2)) / 2.0
        }
    })
}
