//! Oracle solvers for the full coupled two-channel eigenproblem, without any
//! adiabatic approximation, plus observable evaluation in the coupled basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dvr::{dvr_grid, neg_second_derivative};
use crate::effective::{solve_effective, EffectiveProblem, Provenance, SpectrumResult};
use crate::error::{Error, Result};
use crate::models::{FiberModel, JahnTellerModel, MorseModel};
use crate::numerics::HermitianMatrix;
use crate::oscillator::{BasisTable, OscillatorBasis};

fn cf(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Product basis: electronic channels times oscillator functions, orthonormal
/// under the sqrt(g) measure per channel block.
pub struct CoupledBasis {
    pub channels: usize,
    pub table: BasisTable,
    /// Volume factor at each retained node.
    pub sqrt_g: Vec<f64>,
}

impl CoupledBasis {
    pub fn dim(&self) -> usize {
        self.channels * self.table.basis.size
    }

    /// Wavefunction components at the quadrature nodes for a coefficient
    /// vector in channel-major layout (the Gaussian folded into the tables).
    pub fn components_at_nodes(&self, coeffs: &DVector<Complex64>) -> Vec<DVector<Complex64>> {
        let n = self.table.basis.size;
        let m = self.table.node_count();
        (0..self.channels)
            .map(|c| {
                DVector::from_fn(m, |k, _| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        acc += coeffs[c * n + i] * cf(self.table.values[(k, i)]);
                    }
                    acc
                })
            })
            .collect()
    }

    /// Inner product ⟨a|b⟩ under the sqrt(g) measure.
    pub fn inner(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        let fa = self.components_at_nodes(a);
        let fb = self.components_at_nodes(b);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.table.node_count() {
            let mut ch = Complex64::new(0.0, 0.0);
            for c in 0..self.channels {
                ch += fa[c][k].conj() * fb[c][k];
            }
            acc += cf(self.table.weights[k] * self.sqrt_g[k]) * ch;
        }
        acc * cf(self.table.basis.scale)
    }
}

/// Observables measured on coupled states; the Pauli matrix acts in the
/// diabatic channel basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Q,
    QSigmaZ,
}

/// Expectation value ⟨ψ|O|ψ⟩ under the sqrt(g) measure; the state must be
/// normalized to 1e-10.
pub fn expectation(
    basis: &CoupledBasis,
    coeffs: &DVector<Complex64>,
    observable: Observable,
) -> Result<f64> {
    let norm = basis.inner(coeffs, coeffs).re;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized {
            deviation: (norm - 1.0).abs(),
        });
    }
    let f = basis.components_at_nodes(coeffs);
    let mut acc = 0.0;
    for k in 0..basis.table.node_count() {
        let q = basis.table.nodes[k];
        let dens: f64 = match observable {
            Observable::Q => (0..basis.channels).map(|c| f[c][k].norm_sqr()).sum::<f64>() * q,
            Observable::QSigmaZ => (f[0][k].norm_sqr() - f[1][k].norm_sqr()) * q,
        };
        acc += basis.table.weights[k] * basis.sqrt_g[k] * dens;
    }
    Ok(acc * basis.table.basis.scale)
}

/// Assembles the full two-channel problem for the Morse model in the chosen
/// coordinates: Laplace-Beltrami kinetic term per channel, the diabatic 2x2
/// potential coupling the channels, and the sqrt(g) overlap.
pub fn assemble_exact_morse(
    model: &MorseModel,
    basis: &OscillatorBasis,
) -> Result<(CoupledBasis, EffectiveProblem)> {
    // The physical domain ends where the repulsive channel diverges.
    let window = (model.w_of_x(0.05), f64::INFINITY);
    let table = basis.tables(basis.default_node_count(), window)?;
    let m = table.node_count();
    let n = basis.size;
    let kappa = model.kinetic_scale();

    let mut sqrt_g = Vec::with_capacity(m);
    let mut ginv = Vec::with_capacity(m);
    let mut pots = Vec::with_capacity(m);
    for &w in &table.nodes {
        let mp = model.metric_point(w);
        sqrt_g.push(mp.sqrt_g());
        ginv.push(mp.inv_g00());
        pots.push(model.potential_matrix(model.x_of_w(w))?);
    }

    let dim = 2 * n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let mut s = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..n {
        for j in i..n {
            let mut kin = 0.0;
            let mut ovl = 0.0;
            let mut pot = [[0.0_f64; 2]; 2];
            for k in 0..m {
                let w = table.weights[k] * sqrt_g[k];
                let vv = table.values[(k, i)] * table.values[(k, j)];
                kin += table.weights[k]
                    * sqrt_g[k]
                    * ginv[k]
                    * table.derivs[(k, i)]
                    * table.derivs[(k, j)];
                ovl += w * vv;
                for (a, row) in pot.iter_mut().enumerate() {
                    for (b, entry) in row.iter_mut().enumerate() {
                        *entry += w * vv * pots[k][(a, b)];
                    }
                }
            }
            kin *= 0.5 * kappa * basis.scale;
            ovl *= basis.scale;
            for c in 0..2 {
                for c2 in 0..2 {
                    let val = cf(pot[c][c2] * basis.scale + if c == c2 { kin } else { 0.0 });
                    h[(c * n + i, c2 * n + j)] = val;
                    h[(c2 * n + j, c * n + i)] = val.conj();
                }
                s[(c * n + i, c * n + j)] = cf(ovl);
                s[(c * n + j, c * n + i)] = cf(ovl);
            }
        }
    }
    let problem = EffectiveProblem {
        provenance: Provenance::Exact,
        level: 0,
        epsilon: model.epsilon(),
        h: HermitianMatrix::new(h)?,
        s: HermitianMatrix::new(s)?,
    };
    Ok((
        CoupledBasis {
            channels: 2,
            table,
            sqrt_g,
        },
        problem,
    ))
}

/// Exact Morse solve returning the lowest `count` states.
pub fn solve_exact_morse(
    model: &MorseModel,
    basis: &OscillatorBasis,
    count: usize,
) -> Result<(CoupledBasis, SpectrumResult)> {
    let (cb, problem) = assemble_exact_morse(model, basis)?;
    let spectrum = solve_effective(&problem, count)?;
    Ok((cb, spectrum))
}

/// Exact Jahn-Teller eigenvalues at fixed half-integer j: two coupled radial
/// channels with centrifugal terms (j -+ 1/2)² on the sine DVR in the
/// sqrt(q)-flattened representation.
pub fn solve_exact_jt(
    model: &JahnTellerModel,
    box_size: f64,
    n: usize,
    count: usize,
) -> Result<SpectrumResult> {
    let eps = model.epsilon;
    let grid = dvr_grid(box_size, n);
    let t = neg_second_derivative(n, box_size) * (0.5 * eps);
    let dim = 2 * n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..2 {
        let m_ang = model.j + if c == 0 { -0.5 } else { 0.5 };
        for k in 0..n {
            let q = grid.points()[k];
            for k2 in 0..n {
                h[(c * n + k, c * n + k2)] = t[(k, k2)];
            }
            // sqrt(q)-flattened centrifugal: ((j -+ 1/2)^2 - 1/4) / (2 q^2).
            h[(c * n + k, c * n + k)] +=
                0.5 * q * q + eps * (m_ang * m_ang - 0.25) / (2.0 * q * q);
            // Linear coupling between the channels is diagonal on the grid.
            h[(c * n + k, (1 - c) * n + k)] = q;
        }
    }
    let problem = EffectiveProblem {
        provenance: Provenance::Exact,
        level: 0,
        epsilon: eps,
        h: HermitianMatrix::new(h.map(cf))?,
        s: HermitianMatrix::identity(dim),
    };
    solve_effective(&problem, count)
}
