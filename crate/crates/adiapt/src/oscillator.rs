//! Harmonic-oscillator basis functions with Gauss-Hermite evaluation tables.
//!
//! Basis function i is phi_i(w) = s^{-1/2} h_i((w - center)/s) with h_i the
//! normalized Hermite functions. Tables store the values with the Gaussian
//! weight factored into the quadrature rule, so no exp(t^2) ever overflows.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::QuadratureRule;

/// Placement of an oscillator basis: center, length scale and size.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorBasis {
    pub center: f64,
    pub scale: f64,
    pub size: usize,
}

/// Basis and derivative values at the retained quadrature nodes.
///
/// Integrals become s * sum_m w_m left_i(m) right_j(m) f(w_m), where `left`
/// and `right` are columns of `values` or `derivs`.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub basis: OscillatorBasis,
    /// Physical positions of the retained nodes.
    pub nodes: Vec<f64>,
    /// Gauss-Hermite weights of the retained nodes.
    pub weights: Vec<f64>,
    /// values[(m, i)] = phi_i(w_m) with the Gaussian folded into the rule.
    pub values: DMatrix<f64>,
    /// derivs[(m, i)] = phi_i'(w_m), same convention.
    pub derivs: DMatrix<f64>,
}

/// Scaled Hermite functions h_i(t) e^{t^2/2} for i = 0..=n at point t;
/// these are polynomials, evaluated by the stable three-term recurrence.
fn scaled_hermite_values(n: usize, t: f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(n + 1);
    let h0 = std::f64::consts::PI.powf(-0.25);
    vals.push(h0);
    if n >= 1 {
        vals.push(std::f64::consts::SQRT_2 * t * h0);
    }
    for k in 1..n {
        let next = t * (2.0 / (k as f64 + 1.0)).sqrt() * vals[k]
            - ((k as f64) / (k as f64 + 1.0)).sqrt() * vals[k - 1];
        vals.push(next);
    }
    vals
}

impl OscillatorBasis {
    /// Number of Gauss-Hermite nodes used for assemblies over this basis.
    pub fn default_node_count(&self) -> usize {
        2 * self.size + 16
    }

    /// Evaluates phi_i(w) directly (for plotting and reconstruction).
    pub fn value(&self, i: usize, w: f64) -> f64 {
        let t = (w - self.center) / self.scale;
        let vals = scaled_hermite_values(i, t);
        vals[i] * (-0.5 * t * t).exp() / self.scale.sqrt()
    }

    /// Builds evaluation tables on the nodes that fall inside `window`.
    ///
    /// Nodes outside the window are dropped only when the Gaussian envelope
    /// of the largest retained basis function there is negligible; otherwise
    /// the basis genuinely leaks outside the tabulated fields and assembly
    /// must fail.
    pub fn tables(&self, n_nodes: usize, window: (f64, f64)) -> Result<BasisTable> {
        let rule = QuadratureRule::gauss_hermite(n_nodes);
        let n = self.size;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut rows: Vec<(f64, f64)> = Vec::new(); // (t, weight) retained
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let pos = self.center + self.scale * t;
            if pos > window.0 && pos < window.1 {
                nodes.push(pos);
                weights.push(w);
                rows.push((t, w));
            } else {
                // Worst-case contribution of this node to a normalized matrix
                // element: weight times the squared scaled-Hermite bound.
                let vals = scaled_hermite_values(n, t);
                let bound = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let leak = w * bound * bound;
                // Pathological leaks (basis oscillating outside the window)
                // are O(1e-3) and up; healthy Gaussian tails sit far below.
                // The cut keeps truncated mass well under the overlap
                // positivity floor.
                if leak > 1e-8 {
                    return Err(Error::SupportMismatch {
                        node: pos,
                        lo: window.0,
                        hi: window.1,
                        weight: leak,
                    });
                }
            }
        }
        let m = nodes.len();
        let mut values = DMatrix::zeros(m, n);
        let mut derivs = DMatrix::zeros(m, n);
        let sqrt_s = self.scale.sqrt();
        for (row, &(t, _)) in rows.iter().enumerate() {
            let vals = scaled_hermite_values(n, t);
            for i in 0..n {
                values[(row, i)] = vals[i] / sqrt_s;
                let lower = if i == 0 {
                    0.0
                } else {
                    ((i as f64) / 2.0).sqrt() * vals[i - 1]
                };
                let upper = ((i as f64 + 1.0) / 2.0).sqrt() * vals[i + 1];
                derivs[(row, i)] = (lower - upper) / (self.scale * sqrt_s);
            }
        }
        Ok(BasisTable {
            basis: *self,
            nodes,
            weights,
            values,
            derivs,
        })
    }
}

impl BasisTable {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of phi_i * f * phi_j over the line (measure folded into f).
    pub fn overlap_with(&self, i: usize, j: usize, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.node_count() {
            acc += self.weights[m] * self.values[(m, i)] * self.values[(m, j)] * f[m];
        }
        acc * self.basis.scale
    }
}
