//! Assembly and solution of the first- and second-order effective
//! Schrödinger equations as generalized Hermitian eigenproblems in a
//! harmonic-oscillator basis under the sqrt(g) measure.
//!
//! The kinetic term is integrated by parts, so quadrature only ever sees
//! basis values and first derivatives:
//!
//! ```text
//! H_kin[i,j] = (κ/2) ∫ sqrt(g) h^{ww} [(∂ - iA)φ_i]* [(∂ - iA)φ_j] dw
//! ```
//!
//! which is Hermitian by construction even for the complex second-order
//! gauge potential A^(2) = A + κ A_2.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::adiabatic::AdiabaticData;
use crate::error::{Error, Result};
use crate::models::FiberModel;
use crate::numerics::{solve_generalized_hermitian, ComplexSpline, CubicSpline, HermitianMatrix};
use crate::oscillator::OscillatorBasis;

/// How a spectrum was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Order1,
    Order2,
    Analytic,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Order1 => "order1",
            Self::Order2 => "order2",
            Self::Analytic => "analytic",
        }
    }
}

/// Generalized Hermitian eigenproblem (H, S) for one electronic level.
#[derive(Debug, Clone)]
pub struct EffectiveProblem {
    pub provenance: Provenance,
    pub level: usize,
    pub epsilon: f64,
    pub h: HermitianMatrix,
    pub s: HermitianMatrix,
}

/// Eigenvalues (ascending) and S-orthonormal coefficient vectors.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub provenance: Provenance,
    pub eigenvalues: Vec<f64>,
    pub coefficients: Vec<DVector<Complex64>>,
}

/// Solves the effective problem and keeps the lowest `count` states.
pub fn solve_effective(problem: &EffectiveProblem, count: usize) -> Result<SpectrumResult> {
    let pairs = solve_generalized_hermitian(&problem.h, &problem.s)?;
    let kept = pairs.into_iter().take(count);
    let mut eigenvalues = Vec::new();
    let mut coefficients = Vec::new();
    for p in kept {
        eigenvalues.push(p.value);
        coefficients.push(p.vector);
    }
    Ok(SpectrumResult {
        provenance: problem.provenance,
        eigenvalues,
        coefficients,
    })
}

/// Oscillator basis matched to the local quadratic well of level `n`:
/// centered at the minimum of E_n with scale (κ g^{ww} / E_n'')^{1/4}.
pub fn matched_basis(
    model: &dyn FiberModel,
    adiabatic: &AdiabaticData,
    level: usize,
    size: usize,
) -> OscillatorBasis {
    let e = adiabatic.energy_field(level);
    let margin = 5;
    let k_min = (margin..e.len() - margin)
        .min_by(|&a, &b| e[a].total_cmp(&e[b]))
        .unwrap();
    let h = adiabatic.grid.spacing();
    // Quadratic refinement of the minimum and curvature from three points.
    let (em, e0, ep) = (e[k_min - 1], e[k_min], e[k_min + 1]);
    let curvature = (em - 2.0 * e0 + ep) / (h * h);
    let shift = 0.5 * (em - ep) / (em - 2.0 * e0 + ep) * h;
    let center = adiabatic.grid.points()[k_min] + shift;
    let g_inv = model.metric_point(center).inv_g00();
    let kappa = model.kinetic_scale();
    let scale = (kappa * g_inv / curvature).powf(0.25);
    OscillatorBasis {
        center,
        scale,
        size,
    }
}

struct NodeFields {
    sqrt_g: Vec<f64>,
    kin: Vec<f64>,        // (κ/2) sqrt(g) h^{ww}
    pot: Vec<f64>,        // sqrt(g) (E + κ V_geo [+ κ² V_2geo])
    gauge: Vec<Complex64>, // A^(p) at the nodes
}

fn spline_field(xs: &[f64], ys: &[f64]) -> CubicSpline {
    CubicSpline::fit(xs, ys)
}

fn node_fields(
    model: &dyn FiberModel,
    adiabatic: &AdiabaticData,
    level: usize,
    nodes: &[f64],
    order: u8,
) -> Result<NodeFields> {
    assert!(
        adiabatic.angular.is_none(),
        "oscillator-basis assembly covers 1D models; radial problems use the DVR path"
    );
    let xs = adiabatic.grid.points();
    let g = adiabatic.geometric(level);
    let kappa = model.kinetic_scale();
    let e_spline = spline_field(xs, &adiabatic.energy_field(level));
    let vgeo_spline = spline_field(xs, &g.v_geo);
    let a_spline = spline_field(xs, &g.a);
    let (a2_spline, h2_spline, v2_spline) = if order == 2 {
        (
            Some(ComplexSpline::fit(xs, &g.a2)),
            Some(spline_field(xs, &g.h2)),
            Some(spline_field(xs, &g.v2_geo)),
        )
    } else {
        (None, None, None)
    };

    let mut sqrt_g = Vec::with_capacity(nodes.len());
    let mut kin = Vec::with_capacity(nodes.len());
    let mut pot = Vec::with_capacity(nodes.len());
    let mut gauge = Vec::with_capacity(nodes.len());
    for &w in nodes {
        let mp = model.metric_point(w);
        let mu = mp.sqrt_g();
        sqrt_g.push(mu);
        let mut p = e_spline.eval(w) + kappa * vgeo_spline.eval(w);
        let mut hinv = mp.inv_g00();
        let mut a = Complex64::new(a_spline.eval(w), 0.0);
        if order == 2 {
            let mass = mp.g00 + kappa * h2_spline.as_ref().unwrap().eval(w);
            if mass <= 0.0 {
                return Err(Error::MassTensorNotPositive { point: w });
            }
            hinv = 1.0 / mass;
            a += a2_spline.as_ref().unwrap().eval(w) * Complex64::new(kappa, 0.0);
            p += kappa * kappa * v2_spline.as_ref().unwrap().eval(w);
        }
        kin.push(0.5 * kappa * mu * hinv);
        pot.push(mu * p);
        gauge.push(a);
    }
    Ok(NodeFields {
        sqrt_g,
        kin,
        pot,
        gauge,
    })
}

fn assemble_order(
    model: &dyn FiberModel,
    adiabatic: &AdiabaticData,
    level: usize,
    basis: &OscillatorBasis,
    order: u8,
) -> Result<EffectiveProblem> {
    // Keep quadrature nodes strictly inside the tabulated grid, clear of the
    // spline boundary layer.
    let margin = 5.0 * adiabatic.grid.spacing();
    let window = (adiabatic.grid.lo() + margin, adiabatic.grid.hi() - margin);
    let table = basis.tables(basis.default_node_count(), window)?;
    let fields = node_fields(model, adiabatic, level, &table.nodes, order)?;

    let n = basis.size;
    let m = table.node_count();
    let s_scale = basis.scale;
    // Covariant derivative factors L_i(m) = φ_i'(w_m) - i A(w_m) φ_i(w_m).
    let mut cov = DMatrix::<Complex64>::zeros(m, n);
    for k in 0..m {
        for i in 0..n {
            cov[(k, i)] = Complex64::new(table.derivs[(k, i)], 0.0)
                - Complex64::new(0.0, 1.0) * fields.gauge[k] * table.values[(k, i)];
        }
    }
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc_h = Complex64::new(0.0, 0.0);
            let mut acc_s = 0.0;
            for k in 0..m {
                let w = table.weights[k];
                let vv = table.values[(k, i)] * table.values[(k, j)];
                acc_h += cov[(k, i)].conj() * cov[(k, j)] * (w * fields.kin[k])
                    + Complex64::new(w * fields.pot[k] * vv, 0.0);
                acc_s += w * fields.sqrt_g[k] * vv;
            }
            h[(i, j)] = acc_h * s_scale;
            h[(j, i)] = h[(i, j)].conj();
            s[(i, j)] = Complex64::new(acc_s * s_scale, 0.0);
            s[(j, i)] = s[(i, j)];
        }
    }
    Ok(EffectiveProblem {
        provenance: if order == 1 {
            Provenance::Order1
        } else {
            Provenance::Order2
        },
        level,
        epsilon: model.epsilon(),
        h: HermitianMatrix::new(h)?,
        s: HermitianMatrix::new(s)?,
    })
}

/// First-order effective problem: kinetic with the Mead-Truhlar gauge
/// potential plus the potential E_n + κ V_geo.
pub fn assemble_first_order(
    model: &dyn FiberModel,
    adiabatic: &AdiabaticData,
    level: usize,
    basis: &OscillatorBasis,
) -> Result<EffectiveProblem> {
    assemble_order(model, adiabatic, level, basis, 1)
}

/// Second-order effective problem: complex gauge potential A + κ A_2,
/// effective mass g_ww + κ h_2 (inverted pointwise) and the potential
/// E_n + κ V_geo + κ² V_2geo.
pub fn assemble_second_order(
    model: &dyn FiberModel,
    adiabatic: &AdiabaticData,
    level: usize,
    basis: &OscillatorBasis,
) -> Result<EffectiveProblem> {
    assemble_order(model, adiabatic, level, basis, 2)
}
