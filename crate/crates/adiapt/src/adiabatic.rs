//! Adiabatic data on a grid: per-point eigenpairs of the fiber Hamiltonian in
//! a smoothed gauge, covariant derivatives, the geometric scalar potential,
//! the reduced resolvent, and the second-order corrections (complex gauge
//! potential, effective mass tensor, second-order scalar potential).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{AngularSector, FiberModel, Grid1D, Metric1D, MetricPoint};
use crate::numerics::solve_linear_hermitian;
use crate::numerics::{derivative_field, HermitianMatrix};

/// Fibers below this gap are treated as degenerate (model energy units).
pub const GAP_FLOOR: f64 = 1e-9;

/// Neighbor overlap below this aborts gauge smoothing.
const OVERLAP_FLOOR: f64 = 0.5;

fn cf(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Raw per-point eigenpairs, before any gauge fixing.
pub struct RawFibers {
    pub grid: Grid1D,
    pub energies: Vec<Vec<f64>>,
    pub states: Vec<Vec<DVector<Complex64>>>,
    pub fibers: Vec<HermitianMatrix>,
    pub dfibers: Vec<DMatrix<Complex64>>,
}

/// Diagonalizes the fiber Hamiltonian at every grid point.
///
/// Eigenvalues come back ascending per point; a gap below [`GAP_FLOOR`]
/// reports the offending point, which signals proximity to a conical
/// intersection rather than a numerical failure.
pub fn diagonalize_fibers(model: &dyn FiberModel, grid: &Grid1D) -> Result<RawFibers> {
    let mut energies = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut fibers = Vec::with_capacity(grid.len());
    let mut dfibers = Vec::with_capacity(grid.len());
    for (index, &w) in grid.points().iter().enumerate() {
        let h = HermitianMatrix::new(model.fiber_hamiltonian(w)?)?;
        let (vals, vecs) = crate::numerics::hermitian_eigen(h.matrix());
        for pair in vals.windows(2) {
            let gap = pair[1] - pair[0];
            if gap < GAP_FLOOR {
                return Err(Error::DegenerateFiber {
                    point: w,
                    index,
                    gap,
                });
            }
        }
        let dim = h.dim();
        states.push((0..dim).map(|k| vecs.column(k).into_owned()).collect::<Vec<_>>());
        energies.push(vals);
        dfibers.push(model.fiber_hamiltonian_derivative(w)?);
        fibers.push(h);
    }
    Ok(RawFibers {
        grid: grid.clone(),
        energies,
        states,
        fibers,
        dfibers,
    })
}

/// Parallel-transport gauge along the grid: fixes phases so each neighbor
/// overlap ⟨n(w_k)|n(w_k+1)⟩ is real and positive utilizing a sequential scan.
///
/// Returns the smallest neighbor overlap encountered (should stay >= 0.9 on a
/// converged grid); an overlap under 0.5 errors out as "grid too coarse".
pub fn smooth_gauge(raw: &mut RawFibers) -> Result<f64> {
    let npts = raw.grid.len();
    let nlev = raw.states[0].len();
    let mut min_overlap: f64 = 1.0;
    for level in 0..nlev {
        // Deterministic global phase: rotate the largest component real-positive.
        let anchor = {
            let v = &raw.states[0][level];
            let mut best = 0;
            for i in 1..v.len() {
                if v[i].norm() > v[best].norm() {
                    best = i;
                }
            }
            let z = v[best];
            z.conj() / z.norm()
        };
        raw.states[0][level] *= anchor;
        for k in 1..npts {
            let overlap = raw.states[k - 1][level].dotc(&raw.states[k][level]);
            let mag = overlap.norm();
            if mag < OVERLAP_FLOOR {
                return Err(Error::GridTooCoarse {
                    point: raw.grid.points()[k],
                    overlap: mag,
                });
            }
            min_overlap = min_overlap.min(mag);
            let phase = overlap.conj() / mag;
            raw.states[k][level] *= phase;
        }
    }
    Ok(min_overlap)
}

/// Applies the reduced resolvent (E_n - H)^-power restricted to the
/// orthogonal complement of |n⟩; the projector is applied to v first and to
/// the result, so any input is accepted.
pub fn reduced_resolvent_apply(
    fiber: &HermitianMatrix,
    e_n: f64,
    state_n: &DVector<Complex64>,
    v: &DVector<Complex64>,
    power: u32,
) -> Result<DVector<Complex64>> {
    assert!(power == 1 || power == 2, "power must be 1 or 2");
    let dim = fiber.dim();
    let scale = fiber.max_abs().max(e_n.abs()).max(1.0);
    // Deflated operator: (E_n - H) + shift |n⟩⟨n| is Hermitian and invertible,
    // and agrees with (E_n - H) on the complement of |n⟩.
    let deflated = HermitianMatrix::new(DMatrix::from_fn(dim, dim, |i, j| {
        let base = if i == j { cf(e_n) } else { cf(0.0) } - fiber.matrix()[(i, j)];
        base + state_n[i] * state_n[j].conj() * cf(scale)
    }))?;
    let mut x = v.clone();
    for _ in 0..power {
        let proj = state_n.dotc(&x);
        let rhs = &x - state_n * proj;
        x = solve_linear_hermitian(&deflated, &rhs)?;
        let tail = state_n.dotc(&x);
        x -= state_n * tail;
    }
    Ok(x)
}

/// Geometric quantities of one electronic level on the grid.
///
/// All derivative fields use the smoothed gauge; the `*_phi` fields are only
/// populated when the model carries an angular sector.
#[derive(Debug, Clone)]
pub struct GeometricFields {
    pub level: usize,
    /// Mead-Truhlar potential A_w = i⟨n|∂_w n⟩ (real in any smooth gauge).
    pub a: Vec<f64>,
    /// Angular gauge potential A_φ = -⟨n|N|n⟩.
    pub a_phi: Option<Vec<f64>>,
    /// Covariant derivative |D_w n⟩ = (1 - |n⟩⟨n|) ∂_w |n⟩.
    pub d_state: Vec<DVector<Complex64>>,
    /// Angular covariant derivative |D_φ n⟩ = i (N - ⟨N⟩) |n⟩.
    pub d_state_phi: Option<Vec<DVector<Complex64>>>,
    /// Covariant Laplacian state |∇²n⟩.
    pub lap_state: Vec<DVector<Complex64>>,
    /// Geometric scalar potential (1/2) g^{μν} Re⟨D_μ n|D_ν n⟩ >= 0.
    pub v_geo: Vec<f64>,
    /// Hellmann-Feynman slope ∂_w E_n = ⟨n|∂_w H|n⟩.
    pub de_dw: Vec<f64>,
    /// Second-order gauge potential component A_2w (complex in general).
    pub a2: Vec<Complex64>,
    pub a2_phi: Option<Vec<Complex64>>,
    /// Mass-tensor correction h_2ww = -2⟨D_w n|(E_n-H)^-1|D_w n⟩.
    pub h2: Vec<f64>,
    /// Off-diagonal correction h_2wφ; its transpose partner is the conjugate.
    pub h2_wphi: Option<Vec<Complex64>>,
    pub h2_phiphi: Option<Vec<f64>>,
    /// Second-order scalar potential V_2geo.
    pub v2_geo: Vec<f64>,
}

/// Smoothed adiabatic data plus derived geometric fields for every level.
pub struct AdiabaticData {
    pub grid: Grid1D,
    pub metric: Metric1D,
    metric_points: Vec<MetricPoint>,
    pub kinetic_scale: f64,
    pub energies: Vec<Vec<f64>>,
    pub states: Vec<Vec<DVector<Complex64>>>,
    pub fibers: Vec<HermitianMatrix>,
    pub dfibers: Vec<DMatrix<Complex64>>,
    pub angular: Option<AngularSector>,
    pub min_neighbor_overlap: f64,
    geometric: Vec<GeometricFields>,
}

impl AdiabaticData {
    /// Full pipeline: fiber diagonalization, gauge smoothing and geometric
    /// fields for every electronic level.
    pub fn build(model: &dyn FiberModel, grid: &Grid1D) -> Result<Self> {
        let (lo, hi) = model.domain();
        if grid.lo() <= lo || (hi.is_finite() && grid.hi() >= hi) {
            return Err(Error::DomainError {
                x: grid.lo(),
                reason: "grid extends outside the model domain",
            });
        }
        let mut raw = diagonalize_fibers(model, grid)?;
        let min_neighbor_overlap = smooth_gauge(&mut raw)?;
        let metric_points: Vec<MetricPoint> =
            grid.points().iter().map(|&w| model.metric_point(w)).collect();
        let metric = Metric1D::tabulate(model, grid);
        let angular = model.angular();
        let nlev = raw.states[0].len();
        let mut data = Self {
            grid: raw.grid,
            metric,
            metric_points,
            kinetic_scale: model.kinetic_scale(),
            energies: raw.energies,
            states: raw.states,
            fibers: raw.fibers,
            dfibers: raw.dfibers,
            angular,
            min_neighbor_overlap,
            geometric: Vec::new(),
        };
        data.geometric = (0..nlev)
            .map(|level| data.compute_geometric(level))
            .collect::<Result<Vec<_>>>()?;
        Ok(data)
    }

    pub fn levels(&self) -> usize {
        self.states[0].len()
    }

    pub fn geometric(&self, level: usize) -> &GeometricFields {
        &self.geometric[level]
    }

    pub fn metric_point(&self, k: usize) -> &MetricPoint {
        &self.metric_points[k]
    }

    /// Energy of `level` along the grid.
    pub fn energy_field(&self, level: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[level]).collect()
    }

    /// State field of `level` along the grid.
    pub fn state_field(&self, level: usize) -> Vec<DVector<Complex64>> {
        self.states.iter().map(|s| s[level].clone()).collect()
    }

    /// Nonadiabatic coupling A_{w,ln} = i⟨l|∂_w n⟩ along the grid.
    pub fn coupling_field(&self, level_l: usize, level_n: usize) -> Vec<Complex64> {
        let field_n = self.state_field(level_n);
        let dn = derivative_field(&field_n, self.grid.spacing());
        (0..self.grid.len())
            .map(|k| Complex64::new(0.0, 1.0) * self.states[k][level_l].dotc(&dn[k]))
            .collect()
    }

    /// Applies a smooth phase e^{iλ(w)} to one level's states and recomputes
    /// every geometric field, leaving the gauge smoothing untouched.
    pub fn regauge(&self, level: usize, phase: &dyn Fn(f64) -> f64) -> Result<Self> {
        let mut states = self.states.clone();
        for (k, &w) in self.grid.points().iter().enumerate() {
            let z = Complex64::from_polar(1.0, phase(w));
            states[k][level] *= z;
        }
        let mut data = Self {
            grid: self.grid.clone(),
            metric: self.metric.clone(),
            metric_points: self.metric_points.clone(),
            kinetic_scale: self.kinetic_scale,
            energies: self.energies.clone(),
            states,
            fibers: self.fibers.clone(),
            dfibers: self.dfibers.clone(),
            angular: self.angular.clone(),
            min_neighbor_overlap: self.min_neighbor_overlap,
            geometric: Vec::new(),
        };
        data.geometric = (0..self.levels())
            .map(|lv| data.compute_geometric(lv))
            .collect::<Result<Vec<_>>>()?;
        Ok(data)
    }

    /// Covariant derivatives, geometric potentials and all second-order
    /// quantities for one level.
    fn compute_geometric(&self, level: usize) -> Result<GeometricFields> {
        let npts = self.grid.len();
        let h = self.grid.spacing();
        let states: Vec<DVector<Complex64>> = self.state_field(level);
        let dn = derivative_field(&states, h);

        // A_w = i⟨n|∂n⟩; |D_w n⟩ = ∂n - ⟨n|∂n⟩ n (exactly orthogonal to n).
        let mut a = Vec::with_capacity(npts);
        let mut d_state = Vec::with_capacity(npts);
        for k in 0..npts {
            let proj = states[k].dotc(&dn[k]);
            a.push((Complex64::new(0.0, 1.0) * proj).re);
            d_state.push(&dn[k] - &states[k] * proj);
        }

        // Angular sector: A_φ and |D_φ n⟩ are analytic in the generator.
        let (a_phi, d_state_phi) = match &self.angular {
            None => (None, None),
            Some(sector) => {
                let mut aphi = Vec::with_capacity(npts);
                let mut dphi = Vec::with_capacity(npts);
                for state in &states {
                    let nexp = state.dotc(&(&sector.generator * state)).re;
                    aphi.push(-nexp);
                    let dv = (&sector.generator * state - state * cf(nexp))
                        * Complex64::new(0.0, 1.0);
                    dphi.push(dv);
                }
                (Some(aphi), Some(dphi))
            }
        };

        // Hellmann-Feynman slopes.
        let de_dw: Vec<f64> = (0..npts)
            .map(|k| states[k].dotc(&(&self.dfibers[k] * &states[k])).re)
            .collect();

        // Second covariant derivative D_w D_w n = (∂_w + i A_w) |D_w n⟩.
        let ddn = derivative_field(&d_state, h);
        // |∇²n⟩ = g^{ρσ} P⊥ |D_ρ D_σ n⟩ - g^{ρσ} Γ^w_{ρσ} |D_w n⟩.
        let mut lap_state = Vec::with_capacity(npts);
        for k in 0..npts {
            let mp = &self.metric_points[k];
            let dd_w = &ddn[k] + &d_state[k] * Complex64::new(0.0, a[k]);
            let mut lap = dd_w * cf(mp.inv_g00());
            if let Some(dphi) = &d_state_phi {
                let (g_pp, _) = mp.angular.expect("angular metric for angular sector");
                let sector = self.angular.as_ref().unwrap();
                // D_φ D_φ n = -(N - ⟨N⟩)^2 |n⟩ evaluated analytically.
                let nexp = -a_phi.as_ref().unwrap()[k];
                let shifted = &sector.generator * &states[k] - &states[k] * cf(nexp);
                let ddphi = -(&sector.generator * &shifted - &shifted * cf(nexp));
                lap += ddphi / cf(g_pp);
                let _ = dphi;
            }
            // Project out |n⟩, then subtract the Christoffel contraction.
            let proj = states[k].dotc(&lap);
            lap -= &states[k] * proj;
            lap -= &d_state[k] * cf(mp.contracted_christoffel());
            lap_state.push(lap);
        }

        // V_geo = (1/2) g^{μν} Re ⟨D_μ n | D_ν n⟩.
        let mut v_geo = Vec::with_capacity(npts);
        for k in 0..npts {
            let mp = &self.metric_points[k];
            let mut v = mp.inv_g00() * d_state[k].norm_squared();
            if let (Some(dphi), Some((g_pp, _))) = (&d_state_phi, mp.angular) {
                v += dphi[k].norm_squared() / g_pp;
            }
            v_geo.push(0.5 * v);
        }

        // Resolvent-based second-order quantities.
        let mut a2 = Vec::with_capacity(npts);
        let mut a2_phi = self.angular.as_ref().map(|_| Vec::with_capacity(npts));
        let mut h2 = Vec::with_capacity(npts);
        let mut h2_wphi = self.angular.as_ref().map(|_| Vec::with_capacity(npts));
        let mut h2_phiphi = self.angular.as_ref().map(|_| Vec::with_capacity(npts));
        let mut v2_geo = Vec::with_capacity(npts);
        for k in 0..npts {
            let mp = &self.metric_points[k];
            let e_n = self.energies[k][level];
            let fiber = &self.fibers[k];
            let r1_dw = reduced_resolvent_apply(fiber, e_n, &states[k], &d_state[k], 1)?;
            let r2_dw = reduced_resolvent_apply(fiber, e_n, &states[k], &d_state[k], 2)?;
            let r1_lap = reduced_resolvent_apply(fiber, e_n, &states[k], &lap_state[k], 1)?;
            let r2_lap = reduced_resolvent_apply(fiber, e_n, &states[k], &lap_state[k], 2)?;
            let de_contracted = mp.inv_g00() * de_dw[k];

            a2.push(d_state[k].dotc(&r1_lap) - d_state[k].dotc(&r2_dw) * cf(de_contracted));
            h2.push(-2.0 * d_state[k].dotc(&r1_dw).re);
            v2_geo.push(
                0.25 * lap_state[k].dotc(&r1_lap).re
                    - 0.5 * de_contracted * d_state[k].dotc(&r2_lap).re,
            );

            if let Some(dphi) = &d_state_phi {
                let r1_dphi = reduced_resolvent_apply(fiber, e_n, &states[k], &dphi[k], 1)?;
                a2_phi
                    .as_mut()
                    .unwrap()
                    .push(dphi[k].dotc(&r1_lap) - dphi[k].dotc(&r2_dw) * cf(de_contracted));
                h2_wphi
                    .as_mut()
                    .unwrap()
                    .push(-2.0 * d_state[k].dotc(&r1_dphi));
                h2_phiphi
                    .as_mut()
                    .unwrap()
                    .push(-2.0 * dphi[k].dotc(&r1_dphi).re);
            }
        }

        Ok(GeometricFields {
            level,
            a,
            a_phi,
            d_state,
            d_state_phi,
            lap_state,
            v_geo,
            de_dw,
            a2,
            a2_phi,
            h2,
            h2_wphi,
            h2_phiphi,
            v2_geo,
        })
    }

    /// CSV dump of the adiabatic surfaces and geometric fields for one level.
    pub fn to_csv(&self, level: usize) -> String {
        let g = self.geometric(level);
        let mut out = String::from("x,e_1,e_2,a,v_geo,a2_re,a2_im,h2,v2_geo\n");
        for (k, &w) in self.grid.points().iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                w,
                self.energies[k][0],
                self.energies[k][1],
                g.a[k],
                g.v_geo[k],
                g.a2[k].re,
                g.a2[k].im,
                g.h2[k],
                g.v2_geo[k],
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CoordinateSystem, JahnTellerModel, JtRadialFiber, MorseModel};

    fn morse_grid() -> Grid1D {
        Grid1D::uniform(-2.0, 6.0, 1601)
    }

    fn jt_grid() -> Grid1D {
        Grid1D::uniform(0.4, 3.4, 1201)
    }

    fn phase_field(w: f64) -> f64 {
        0.3 * (1.3 * w + 0.4).sin() + 0.2 * (0.7 * w).cos()
    }

    fn phase_slope(w: f64) -> f64 {
        0.3 * 1.3 * (1.3 * w + 0.4).cos() - 0.2 * 0.7 * (0.7 * w).sin()
    }

    #[test]
    fn decoupled_fibers_have_unit_eigenvectors() {
        // With c = 0 the fiber matrix is diagonal; stay left of the diabatic
        // crossing (x ~ 7.4, i.e. q ~ 1.7) so the ordering is constant.
        let model = MorseModel {
            c: 1e-30,
            ..MorseModel::default()
        };
        let grid = Grid1D::uniform(-1.5, 1.2, 101);
        let raw = diagonalize_fibers(&model, &grid).unwrap();
        for k in 0..grid.len() {
            let ground = &raw.states[k][0];
            assert!((ground[0].norm() - 1.0).abs() < 1e-10);
            assert!(ground[1].norm() < 1e-10);
        }
    }

    #[test]
    fn fiber_eigen_residuals_small() {
        let model = MorseModel::default();
        let grid = morse_grid();
        let raw = diagonalize_fibers(&model, &grid).unwrap();
        // 50 pseudo-random sample points.
        for s in 0..50 {
            let k = (s * 2654435761_usize) % grid.len();
            for level in 0..2 {
                let v = &raw.states[k][level];
                let r = raw.fibers[k].matrix() * v - v * cf(raw.energies[k][level]);
                let scale = raw.fibers[k].max_abs().max(1.0);
                assert!(r.norm() <= 1e-12 * scale, "residual {:.3e} at k={k}", r.norm());
            }
        }
    }

    /// Toy bundle with an exact level crossing at w = 0.
    struct CrossingFiber;

    impl FiberModel for CrossingFiber {
        fn electronic_dim(&self) -> usize {
            2
        }
        fn kinetic_scale(&self) -> f64 {
            1e-3
        }
        fn epsilon(&self) -> f64 {
            1e-3
        }
        fn domain(&self) -> (f64, f64) {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
        fn fiber_hamiltonian(&self, w: f64) -> crate::error::Result<DMatrix<Complex64>> {
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[cf(w), cf(0.0), cf(0.0), cf(-w)],
            ))
        }
        fn fiber_hamiltonian_derivative(
            &self,
            _w: f64,
        ) -> crate::error::Result<DMatrix<Complex64>> {
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[cf(1.0), cf(0.0), cf(0.0), cf(-1.0)],
            ))
        }
        fn metric_point(&self, _w: f64) -> MetricPoint {
            MetricPoint::flat()
        }
    }

    #[test]
    fn degenerate_fiber_detected() {
        // Grid with a point exactly on the crossing.
        let grid = Grid1D::uniform(-1.0, 1.0, 11);
        match diagonalize_fibers(&CrossingFiber, &grid) {
            Err(Error::DegenerateFiber { point, .. }) => assert!(point.abs() < 1e-12),
            other => panic!("expected degenerate fiber, got ok={}", other.is_ok()),
        }
    }

    #[test]
    fn coarse_grid_across_avoided_crossing_rejected() {
        // A nearly-decoupled model switches character abruptly at the
        // diabatic crossing (x ~ 7.4); a coarse grid cannot follow it.
        let model = MorseModel {
            c: 1e-9,
            ..MorseModel::default()
        };
        let grid = Grid1D::uniform(-1.0, 5.0, 41);
        let mut raw = diagonalize_fibers(&model, &grid).unwrap();
        match smooth_gauge(&mut raw) {
            Err(Error::GridTooCoarse { .. }) => {}
            other => panic!("expected grid-too-coarse, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn smoothing_gives_real_consistent_states_and_constant_fields_stay_constant() {
        let model = MorseModel::default();
        let grid = morse_grid();
        let data = AdiabaticData::build(&model, &grid).unwrap();
        assert!(data.min_neighbor_overlap >= 0.9);
        // Real symmetric fibers: smoothed states should be real.
        for k in 0..grid.len() {
            for level in 0..2 {
                for z in data.states[k][level].iter() {
                    assert!(z.im.abs() < 1e-12);
                }
            }
        }
        // Normalization ⟨n|n⟩ = 1 everywhere.
        for k in 0..grid.len() {
            for level in 0..2 {
                assert!((data.states[k][level].norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_states_have_zero_derivatives() {
        // JT fibers are q-independent, so D_w n = 0 and (flat part of) A = 0.
        let model = JtRadialFiber {
            model: JahnTellerModel::new(0.01, 0.5).unwrap(),
        };
        let data = AdiabaticData::build(&model, &jt_grid()).unwrap();
        let g = data.geometric(0);
        for k in 0..data.grid.len() {
            assert!(g.a[k].abs() < 1e-12);
            assert!(g.d_state[k].norm() < 1e-12);
        }
    }

    #[test]
    fn covariant_derivative_orthogonal_and_two_level_norm() {
        let model = MorseModel::default();
        let data = AdiabaticData::build(&model, &morse_grid()).unwrap();
        let g = data.geometric(0);
        let h = data.grid.spacing();
        let states = data.state_field(0);
        let dn = derivative_field(&states, h);
        for k in 0..data.grid.len() {
            // ⟨n|D_w n⟩ = 0 by construction.
            assert!(data.states[k][0].dotc(&g.d_state[k]).norm() < 1e-10);
            // Two-level completeness: ‖D_w n‖² = |⟨l|∂_w n⟩|².
            let coupling = data.states[k][1].dotc(&dn[k]);
            assert!((g.d_state[k].norm_squared() - coupling.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn v_geo_matches_sum_over_states_and_closed_form() {
        let model = MorseModel::default();
        let data = AdiabaticData::build(&model, &morse_grid()).unwrap();
        let g = data.geometric(0);
        let coupling = data.coupling_field(1, 0);
        let mut peak = 0.0_f64;
        // Edge points use one-sided stencils on steep fields; skip them, the
        // assemblies only ever interpolate interior padding.
        for k in 4..data.grid.len() - 4 {
            let mp = data.metric_point(k);
            // Sum over the single excited level.
            let sos = 0.5 * mp.inv_g00() * coupling[k].norm_sqr();
            assert!((g.v_geo[k] - sos).abs() <= 1e-10 * sos.max(1e-12));
            peak = peak.max(g.v_geo[k]);

            // Mixing-angle closed form: θ' = c (v1' - v2') / ((v1-v2)^2 + 4c^2).
            // Compare where the fields are resolved by the grid (the steep
            // 1/x^4 wall below x ~ 1 is padding only).
            let w = data.grid.points()[k];
            let x = model.x_of_w(w);
            if x < 1.0 {
                continue;
            }
            let v = model.potential_matrix(x).unwrap();
            let dv = model.potential_matrix_dx(x).unwrap();
            let dxdw = {
                let s = w / std::f64::consts::SQRT_2;
                1.0 / (std::f64::consts::SQRT_2 * model.a * (1.0 + s * s).sqrt())
            };
            let diff = v[(0, 0)] - v[(1, 1)];
            let ddiff = (dv[(0, 0)] - dv[(1, 1)]) * dxdw;
            let theta_prime = model.c * ddiff / (diff * diff + 4.0 * model.c * model.c);
            let closed = 0.5 * mp.inv_g00() * theta_prime * theta_prime;
            assert!(
                (g.v_geo[k] - closed).abs() <= 1e-6 * closed + 1e-12,
                "k = {k}: {} vs {closed}",
                g.v_geo[k]
            );
        }
        // V_geo must peak near the avoided crossing (x ~ 7.4 -> q ~ 2.07).
        let k_peak = (0..data.grid.len())
            .max_by(|&i, &j| g.v_geo[i].total_cmp(&g.v_geo[j]))
            .unwrap();
        let x_peak = model.x_of_w(data.grid.points()[k_peak]);
        assert!((6.5..8.5).contains(&x_peak), "peak at x = {x_peak}");
        assert!(peak > 0.0);
    }

    #[test]
    fn jt_geometric_potential_and_mass_tensor_closed_forms() {
        let model = JtRadialFiber {
            model: JahnTellerModel::new(0.02, 0.5).unwrap(),
        };
        let data = AdiabaticData::build(&model, &jt_grid()).unwrap();
        let g = data.geometric(0);
        for (k, &q) in data.grid.points().iter().enumerate() {
            if !(0.5..=3.0).contains(&q) {
                continue;
            }
            let vg = 1.0 / (8.0 * q * q);
            assert!((g.v_geo[k] - vg).abs() <= 1e-10 * vg, "V_geo at q = {q}");
            let h2pp = 1.0 / (4.0 * q);
            assert!(
                (g.h2_phiphi.as_ref().unwrap()[k] - h2pp).abs() <= 1e-10 * h2pp,
                "h2_phiphi at q = {q}"
            );
            assert!(g.a2[k].norm() < 1e-11);
            assert!(g.a2_phi.as_ref().unwrap()[k].norm() < 1e-11);
            assert!(g.v2_geo[k].abs() < 1e-11);
            assert!(g.h2[k].abs() < 1e-11);
            assert!(g.h2_wphi.as_ref().unwrap()[k].norm() < 1e-11);
        }
    }

    #[test]
    fn reduced_resolvent_two_level_closed_form_and_composition() {
        let model = MorseModel::default();
        let grid = Grid1D::uniform(-1.0, 3.0, 41);
        let data = AdiabaticData::build(&model, &grid).unwrap();
        for k in [0, 17, 40] {
            let fiber = &data.fibers[k];
            let e0 = data.energies[k][0];
            let e1 = data.energies[k][1];
            let n = &data.states[k][0];
            let l = &data.states[k][1];
            let v = DVector::from_vec(vec![
                Complex64::new(0.3, -0.2),
                Complex64::new(-0.1, 0.7),
            ]);
            for power in [1u32, 2] {
                let got = reduced_resolvent_apply(fiber, e0, n, &v, power).unwrap();
                let expect = l * (l.dotc(&v) / cf(e0 - e1).powu(power));
                let dev = (got.clone() - expect.clone()).norm();
                assert!(
                    dev <= 1e-12 * expect.norm().max(1.0),
                    "power {power} k {k}: dev {dev:.3e} expect-norm {:.3e}",
                    expect.norm()
                );
                // Back-application: (E0 - H)^power x = P⊥ v.
                let mut back = got.clone();
                for _ in 0..power {
                    back = &back * cf(e0) - fiber.matrix() * &back;
                }
                let pv = &v - n * n.dotc(&v);
                assert!((back - pv).norm() <= 1e-11 * v.norm());
            }
            // v = |n⟩ is annihilated by the projector.
            let killed = reduced_resolvent_apply(fiber, e0, n, n, 1).unwrap();
            assert!(killed.norm() < 1e-13);
            // power = 2 equals power = 1 applied twice.
            let once = reduced_resolvent_apply(fiber, e0, n, &v, 1).unwrap();
            let twice = reduced_resolvent_apply(fiber, e0, n, &once, 1).unwrap();
            let squared = reduced_resolvent_apply(fiber, e0, n, &v, 2).unwrap();
            assert!((twice - squared).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_state_orthogonal_and_flat_reduction() {
        let model = MorseModel::default().with_coords(CoordinateSystem::CartesianX);
        let grid = Grid1D::uniform(-1.4, 5.0, 1401);
        let data = AdiabaticData::build(&model, &grid).unwrap();
        let g = data.geometric(0);
        let h = data.grid.spacing();
        let ddn = derivative_field(&g.d_state, h);
        for k in 0..data.grid.len() {
            assert!(data.states[k][0].dotc(&g.lap_state[k]).norm() < 1e-10);
            // Flat metric, no angular sector: |∇²n⟩ = P⊥ (∂ + iA) |D_w n⟩.
            let dd = &ddn[k] + &g.d_state[k] * Complex64::new(0.0, g.a[k]);
            let proj = data.states[k][0].dotc(&dd);
            let expect = &dd - &data.states[k][0] * proj;
            assert!((g.lap_state[k].clone() - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn second_order_quantities_match_two_level_sums() {
        let model = MorseModel::default();
        let data = AdiabaticData::build(&model, &morse_grid()).unwrap();
        let g = data.geometric(0);
        for k in (0..data.grid.len()).step_by(97) {
            let mp = data.metric_point(k);
            let e0 = data.energies[k][0];
            let e1 = data.energies[k][1];
            let l = &data.states[k][1];
            let denom = e0 - e1;
            let dw_l = l.dotc(&g.d_state[k]).conj(); // ⟨D_w n | l⟩
            let lap_l = l.dotc(&g.lap_state[k]); // ⟨l | ∇²n⟩
            let de_c = mp.inv_g00() * g.de_dw[k];

            let a2_sos = dw_l * lap_l / cf(denom) - dw_l * lap_l.conj().conj() * cf(0.0)
                + cf(0.0);
            // Full expressions with the single excited state:
            let a2_expect = dw_l * lap_l / cf(denom)
                - dw_l * dw_l.conj() * cf(de_c) / cf(denom * denom);
            let _ = a2_sos;
            assert!((g.a2[k] - a2_expect).norm() <= 1e-10 * a2_expect.norm().max(1e-14));

            let h2_expect = -2.0 * dw_l.norm_sqr() / denom;
            assert!((g.h2[k] - h2_expect).abs() <= 1e-10 * h2_expect.abs().max(1e-14));

            let v2_expect = 0.25 * lap_l.norm_sqr() / denom
                - 0.5 * de_c * (dw_l * lap_l).re / (denom * denom);
            assert!((g.v2_geo[k] - v2_expect).abs() <= 1e-10 * v2_expect.abs().max(1e-14));
        }
        // Ground-state signs: h2 >= 0, first V_2geo term <= 0 folded in.
        for k in 0..data.grid.len() {
            assert!(g.h2[k] >= -1e-15);
        }
    }

    #[test]
    fn gauge_transformation_shifts_a_and_preserves_invariants() {
        let model = MorseModel::default();
        let grid = Grid1D::uniform(-2.0, 6.0, 3201);
        let data = AdiabaticData::build(&model, &grid).unwrap();
        let phased = data.regauge(0, &phase_field).unwrap();
        let g0 = data.geometric(0);
        let g1 = phased.geometric(0);
        let interior = 10..data.grid.len() - 10;
        // Invariance tolerances are relative to each field's global scale;
        // near the avoided crossing the second-order fields reach O(1/gap).
        let scale = |f: &dyn Fn(usize) -> f64| -> f64 {
            (10..data.grid.len() - 10).map(f).fold(1.0_f64, f64::max)
        };
        let s_vgeo = scale(&|k| g0.v_geo[k].abs());
        let s_h2 = scale(&|k| g0.h2[k].abs());
        let s_v2 = scale(&|k| g0.v2_geo[k].abs());
        let s_a2 = scale(&|k| g0.a2[k].norm());
        for k in interior {
            let w = data.grid.points()[k];
            // A shifts by -∂λ.
            let shift = g1.a[k] - g0.a[k];
            assert!(
                (shift + phase_slope(w)).abs() < 1e-8,
                "k = {k}: {shift} vs {}",
                -phase_slope(w)
            );
            assert!((g1.v_geo[k] - g0.v_geo[k]).abs() < 1e-9 * s_vgeo);
            assert!((g1.h2[k] - g0.h2[k]).abs() < 1e-9 * s_h2);
            assert!((g1.v2_geo[k] - g0.v2_geo[k]).abs() < 1e-9 * s_v2);
            assert!(
                (g1.a2[k] - g0.a2[k]).norm() < 1e-9 * s_a2,
                "k = {k}: dev {:.3e} scale {:.3e}",
                (g1.a2[k] - g0.a2[k]).norm(),
                s_a2
            );
            // Norms of derivative states are invariant.
            assert!(
                (g1.d_state[k].norm() - g0.d_state[k].norm()).abs()
                    < 1e-9 * (1.0 + g0.d_state[k].norm())
            );
            assert!(
                (g1.lap_state[k].norm() - g0.lap_state[k].norm()).abs()
                    < 1e-9 * (1.0 + g0.lap_state[k].norm())
            );
        }
    }

    #[test]
    fn finite_difference_order_of_accuracy() {
        // Halving the spacing must reduce the error in D_w n by >= 2^3.
        let model = MorseModel::default();
        let err = |n: usize| -> f64 {
            let grid = Grid1D::uniform(-1.6, 4.0, n);
            let data = AdiabaticData::build(&model, &grid).unwrap();
            let coupling = data.coupling_field(1, 0);
            // Oracle: |⟨l|∂n⟩| = |θ'| from the closed form.
            let mut max_err = 0.0_f64;
            for (k, &w) in grid.points().iter().enumerate() {
                if k < 5 || k + 5 >= grid.len() {
                    continue;
                }
                let x = model.x_of_w(w);
                let v = model.potential_matrix(x).unwrap();
                let dv = model.potential_matrix_dx(x).unwrap();
                let s = w / std::f64::consts::SQRT_2;
                let dxdw = 1.0 / (std::f64::consts::SQRT_2 * model.a * (1.0 + s * s).sqrt());
                let diff = v[(0, 0)] - v[(1, 1)];
                let ddiff = (dv[(0, 0)] - dv[(1, 1)]) * dxdw;
                let theta_prime = model.c * ddiff / (diff * diff + 4.0 * model.c * model.c);
                max_err = max_err.max((coupling[k].norm() - theta_prime.abs()).abs());
            }
            max_err
        };
        let e1 = err(351);
        let e2 = err(701);
        assert!(e1 / e2 >= 8.0, "convergence ratio {}", e1 / e2);
    }

    #[test]
    fn csv_dump_has_expected_header_and_rows() {
        let model = MorseModel::default();
        let grid = Grid1D::uniform(-1.0, 2.0, 61);
        let data = AdiabaticData::build(&model, &grid).unwrap();
        let csv = data.to_csv(0);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "x,e_1,e_2,a,v_geo,a2_re,a2_im,h2,v2_geo"
        );
        assert_eq!(csv.lines().count(), 62);
    }
}

