//! Radial effective problems on (0, L) in the sine DVR.
//!
//! The polar volume factor q is absorbed by u = sqrt(q) ζ, which flattens the
//! measure, turns the radial Laplacian into u'' + u/(4q²), and leaves every
//! potential diagonal on the grid. This respects the q > 0 domain exactly,
//! which a Gaussian basis centered in the well cannot once ε is large enough
//! for the well to feel the origin.

use num_complex::Complex64;

use crate::adiabatic::AdiabaticData;
use crate::dvr::{dvr_grid, neg_second_derivative};
use crate::effective::{EffectiveProblem, Provenance};
use crate::error::Result;
use crate::models::Grid1D;
use crate::numerics::HermitianMatrix;

/// Radial fields feeding the DVR assembly, tabulated on the interior grid.
#[derive(Debug, Clone)]
pub struct RadialFields {
    pub grid: Grid1D,
    /// Box size; the grid must equal `dvr_grid(box_size, n)`.
    pub box_size: f64,
    pub energy: Vec<f64>,
    pub v_geo: Vec<f64>,
    pub v2_geo: Vec<f64>,
    pub a_phi: Vec<f64>,
    pub a2_phi: Vec<Complex64>,
    pub h2_phiphi: Vec<f64>,
}

/// How the second-order moment-of-inertia correction enters the centrifugal
/// term: dividing by the corrected inertia, or expanded to first order in κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InertiaForm {
    Unexpanded,
    Expanded,
}

impl RadialFields {
    /// Closed-form Jahn-Teller ground-level fields: E = q²/2 - q,
    /// V_geo = 1/(8q²), h_2φφ = 1/(4q), A_2φ = V_2geo = 0, A_φ = -j with the
    /// radial function carrying no angular phase.
    pub fn jahn_teller_ground(j: f64, box_size: f64, n: usize) -> Self {
        let grid = dvr_grid(box_size, n);
        let qs = grid.points().to_vec();
        Self {
            box_size,
            energy: qs.iter().map(|&q| 0.5 * q * q - q).collect(),
            v_geo: qs.iter().map(|&q| 1.0 / (8.0 * q * q)).collect(),
            v2_geo: vec![0.0; n],
            a_phi: vec![-j; n],
            a2_phi: vec![Complex64::new(0.0, 0.0); n],
            h2_phiphi: qs.iter().map(|&q| 1.0 / (4.0 * q)).collect(),
            grid,
        }
    }

    /// Fields from a generic adiabatic pipeline run on the same DVR grid.
    pub fn from_adiabatic(data: &AdiabaticData, level: usize, box_size: f64) -> Self {
        let g = data.geometric(level);
        Self {
            grid: data.grid.clone(),
            box_size,
            energy: data.energy_field(level),
            v_geo: g.v_geo.clone(),
            v2_geo: g.v2_geo.clone(),
            a_phi: g
                .a_phi
                .clone()
                .expect("radial assembly needs an angular sector"),
            a2_phi: g.a2_phi.clone().unwrap(),
            h2_phiphi: g.h2_phiphi.clone().unwrap(),
        }
    }
}

/// Assembles the radial effective problem of the requested order.
///
/// `zeta_m` is the angular wavenumber carried by the radial function; the
/// centrifugal factor is (zeta_m - A_φ)² so any split of the total angular
/// momentum between the gauge potential and the wavefunction gives the same
/// operator.
pub fn assemble_radial(
    fields: &RadialFields,
    zeta_m: f64,
    kappa: f64,
    order: u8,
    inertia: InertiaForm,
) -> Result<EffectiveProblem> {
    assert!(order == 1 || order == 2);
    let n = fields.grid.len();
    let mut h = neg_second_derivative(n, fields.box_size) * (0.5 * kappa);
    for k in 0..n {
        let q = fields.grid.points()[k];
        let g_pp = q * q;
        let mut w = fields.energy[k] + kappa * fields.v_geo[k];
        // Flattening u = sqrt(q) ζ trades the first-derivative term for
        // -κ/(8q²).
        w -= kappa / (8.0 * q * q);
        let m_eff = Complex64::new(zeta_m - fields.a_phi[k], 0.0);
        if order == 1 {
            w += 0.5 * kappa * m_eff.norm_sqr() / g_pp;
        } else {
            w += kappa * kappa * fields.v2_geo[k];
            let m2 = m_eff - fields.a2_phi[k] * Complex64::new(kappa, 0.0);
            match inertia {
                InertiaForm::Unexpanded => {
                    let inertia2 = g_pp + kappa * fields.h2_phiphi[k];
                    w += 0.5 * kappa * m2.norm_sqr() / inertia2;
                }
                InertiaForm::Expanded => {
                    // The expanded correction -κ² m² h_2φφ / (2 q⁴) is more
                    // singular than the centrifugal barrier and unbounded
                    // below as q -> 0. Use it where the expansion parameter
                    // κ h_2φφ / g_φφ is small and fall back to the bounded
                    // unexpanded form inside the (negligible-density) core;
                    // the two differ at O(κ³) everywhere they are both valid.
                    if kappa * fields.h2_phiphi[k] < 0.5 * g_pp {
                        w += 0.5 * kappa * m2.norm_sqr() / g_pp
                            - 0.5 * kappa * kappa * m2.norm_sqr() * fields.h2_phiphi[k]
                                / (g_pp * g_pp);
                    } else {
                        let inertia2 = g_pp + kappa * fields.h2_phiphi[k];
                        w += 0.5 * kappa * m2.norm_sqr() / inertia2;
                    }
                }
            }
        }
        h[(k, k)] += w;
    }
    let hc = h.map(|x| Complex64::new(x, 0.0));
    Ok(EffectiveProblem {
        provenance: if order == 1 {
            Provenance::Order1
        } else {
            Provenance::Order2
        },
        level: 0,
        epsilon: kappa,
        h: HermitianMatrix::new(hc)?,
        s: HermitianMatrix::identity(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::solve_effective;

    #[test]
    fn first_order_potentials_at_unit_radius() {
        let fields = RadialFields::jahn_teller_ground(0.5, 3.0, 299);
        // Find the node closest to q = 1.
        let k = fields
            .grid
            .points()
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
            .unwrap()
            .0;
        let q = fields.grid.points()[k];
        assert!((fields.v_geo[k] - 1.0 / (8.0 * q * q)).abs() < 1e-15);
        assert!((fields.h2_phiphi[k] - 1.0 / (4.0 * q)).abs() < 1e-15);
    }

    #[test]
    fn expanded_and_unexpanded_inertia_differ_at_third_order() {
        let j = 0.5;
        for &eps in &[4e-3_f64, 8e-3, 1.6e-2] {
            let fields = RadialFields::jahn_teller_ground(j, 4.0, 400);
            let e1 = solve_effective(
                &assemble_radial(&fields, 0.0, eps, 2, InertiaForm::Unexpanded).unwrap(),
                1,
            )
            .unwrap()
            .eigenvalues[0];
            let e2 = solve_effective(
                &assemble_radial(&fields, 0.0, eps, 2, InertiaForm::Expanded).unwrap(),
                1,
            )
            .unwrap()
            .eigenvalues[0];
            let diff = (e1 - e2).abs();
            // The two forms agree through ε², differing at O(ε³).
            assert!(diff < 2.0 * eps.powi(3), "eps = {eps}: diff = {diff:.3e}");
            assert!(diff > 1e-3 * eps.powi(3) * eps, "suspiciously exact at {eps}");
        }
    }

    #[test]
    fn centrifugal_split_between_gauge_and_wavenumber_is_equivalent() {
        // A_φ = -j with m = 0 must match A_φ = 0 with m = j.
        let j = 1.5;
        let eps = 5e-3;
        let fields = RadialFields::jahn_teller_ground(j, 4.0, 350);
        let mut neutral = fields.clone();
        neutral.a_phi = vec![0.0; neutral.grid.len()];
        let a = solve_effective(&assemble_radial(&fields, 0.0, eps, 1, InertiaForm::Unexpanded).unwrap(), 2)
            .unwrap();
        let b = solve_effective(&assemble_radial(&neutral, j, eps, 1, InertiaForm::Unexpanded).unwrap(), 2)
            .unwrap();
        for k in 0..2 {
            assert!((a.eigenvalues[k] - b.eigenvalues[k]).abs() < 1e-13);
        }
    }
}
