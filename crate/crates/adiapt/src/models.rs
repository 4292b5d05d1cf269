//! Benchmark systems: a two-level Morse diatomic and the linear E⊗e
//! Jahn-Teller model, with their coordinates, metrics and the small
//! parameter controlling the adiabatic expansion.
//!
//! Both models expose the [`FiberModel`] interface consumed by the adiabatic
//! pipeline: a Hermitian fiber Hamiltonian per grid point of a 1D active
//! coordinate, plus metric data and (for the Jahn-Teller radial reduction) an
//! analytic angular sector.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{get_f64, parse_flat_kv};
use crate::error::{Error, Result};

/// Active heavy coordinate for the Morse model.
///
/// `CartesianX` rescales the bond length to u = sqrt(2) a (x - x0) so the
/// metric is identically 1; `SinhQ` uses q = sqrt(2) sinh(a (x - x0)), which
/// has the nontrivial metric g_qq = (1 + q^2/2)^-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateSystem {
    CartesianX,
    SinhQ,
}

impl CoordinateSystem {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cartesian_x" | "cartesian" | "x" => Ok(Self::CartesianX),
            "sinh_q" | "sinh" | "q" => Ok(Self::SinhQ),
            other => Err(Error::Config(format!("unknown coordinate system `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CartesianX => "cartesian_x",
            Self::SinhQ => "sinh_q",
        }
    }
}

/// Metric data at one point of the active coordinate.
///
/// `g00` is the active-coordinate component g_ww with analytic derivative
/// `dg00`; `angular` carries (g_phiphi, d g_phiphi / dw) when the model is a
/// radial reduction of a 2D polar problem.
#[derive(Debug, Clone, Copy)]
pub struct MetricPoint {
    pub g00: f64,
    pub dg00: f64,
    pub angular: Option<(f64, f64)>,
}

impl MetricPoint {
    pub fn flat() -> Self {
        Self {
            g00: 1.0,
            dg00: 0.0,
            angular: None,
        }
    }

    /// Volume factor sqrt(det g) including the angular block when present.
    pub fn sqrt_g(&self) -> f64 {
        match self.angular {
            None => self.g00.sqrt(),
            Some((gp, _)) => (self.g00 * gp).sqrt(),
        }
    }

    pub fn inv_g00(&self) -> f64 {
        1.0 / self.g00
    }

    /// Christoffel symbol of the active coordinate, Γ^w_ww = g^ww ∂_w g_ww / 2.
    pub fn christoffel(&self) -> f64 {
        0.5 * self.dg00 / self.g00
    }

    /// Contraction g^{ρσ} Γ^w_{ρσ} entering the covariant Laplacian.
    pub fn contracted_christoffel(&self) -> f64 {
        let radial = 0.5 * self.dg00 / (self.g00 * self.g00);
        match self.angular {
            None => radial,
            Some((gp, dgp)) => radial - 0.5 * dgp / (self.g00 * gp),
        }
    }
}

/// Analytic angular structure of a radially reduced polar model: the fiber
/// Hamiltonian obeys H(w, φ) = e^{iNφ} H(w) e^{-iNφ} with constant generator N.
#[derive(Debug, Clone)]
pub struct AngularSector {
    pub generator: DMatrix<Complex64>,
}

/// A two-component model presented as a bundle of Hermitian fibers over a 1D
/// active coordinate.
pub trait FiberModel {
    fn electronic_dim(&self) -> usize;

    /// Kinetic prefactor κ in model energy units; the effective equations are
    /// expansions in the dimensionless ε = κ / (energy unit).
    fn kinetic_scale(&self) -> f64;

    /// Dimensionless adiabatic expansion parameter.
    fn epsilon(&self) -> f64;

    /// Open interval of the active coordinate on which fibers are defined.
    fn domain(&self) -> (f64, f64);

    fn fiber_hamiltonian(&self, w: f64) -> Result<DMatrix<Complex64>>;

    /// Analytic ∂_w of the fiber Hamiltonian (for Hellmann-Feynman slopes).
    fn fiber_hamiltonian_derivative(&self, w: f64) -> Result<DMatrix<Complex64>>;

    fn metric_point(&self, w: f64) -> MetricPoint;

    fn angular(&self) -> Option<AngularSector> {
        None
    }
}

/// Two-level diatomic: a Morse curve crossed by a repulsive 1/x^4 channel with
/// constant diabatic coupling. Atomic units throughout (hartree, bohr,
/// electron masses).
#[derive(Debug, Clone)]
pub struct MorseModel {
    pub d_e: f64,
    pub delta: f64,
    pub x0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mass: f64,
    pub coords: CoordinateSystem,
}

impl Default for MorseModel {
    /// Benchmark parameter set used throughout the studies.
    fn default() -> Self {
        Self {
            d_e: 0.015,
            delta: 0.010,
            x0: 4.0,
            a: 0.30,
            b: 1.00,
            c: 0.002,
            mass: 1.0e4,
            coords: CoordinateSystem::SinhQ,
        }
    }
}

impl MorseModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("de", self.d_e),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("mass", self.mass),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("morse parameter `{name}` must be > 0")));
            }
        }
        if self.epsilon() >= 1.0 {
            return Err(Error::Config(format!(
                "epsilon = {:.3e} is not a small parameter",
                self.epsilon()
            )));
        }
        Ok(())
    }

    pub fn from_config(text: &str) -> Result<Self> {
        let map = parse_flat_kv(text)?;
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let coords = match map.get("coords") {
            Some(s) => CoordinateSystem::parse(s)?,
            None => CoordinateSystem::SinhQ,
        };
        let model = Self {
            d_e: get_f64(map, "de")?,
            delta: get_f64(map, "delta")?,
            x0: get_f64(map, "x0")?,
            a: get_f64(map, "a")?,
            b: get_f64(map, "b")?,
            c: get_f64(map, "c")?,
            mass: get_f64(map, "mass")?,
            coords,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_mass(&self, mass: f64) -> Self {
        Self {
            mass,
            ..self.clone()
        }
    }

    pub fn with_coords(&self, coords: CoordinateSystem) -> Self {
        Self {
            coords,
            ..self.clone()
        }
    }

    /// Small parameter ε = 2 hbar^2 a^2 / (M D_e) in atomic units.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.a * self.a / (self.mass * self.d_e)
    }

    /// Diabatic 2x2 potential matrix at bond length x > 0 (hartree).
    pub fn potential_matrix(&self, x: f64) -> Result<DMatrix<f64>> {
        if x <= 0.0 {
            return Err(Error::DomainError {
                x,
                reason: "the b/x^4 channel diverges at x = 0",
            });
        }
        let morse = self.d_e * (1.0 - (-self.a * (x - self.x0)).exp()).powi(2);
        let repulsive = self.d_e - self.delta + self.b / x.powi(4);
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[morse, -self.c, -self.c, repulsive],
        ))
    }

    /// Analytic x-derivative of the potential matrix.
    pub fn potential_matrix_dx(&self, x: f64) -> Result<DMatrix<f64>> {
        if x <= 0.0 {
            return Err(Error::DomainError {
                x,
                reason: "the b/x^4 channel diverges at x = 0",
            });
        }
        let e = (-self.a * (x - self.x0)).exp();
        let dmorse = 2.0 * self.d_e * (1.0 - e) * self.a * e;
        let drep = -4.0 * self.b / x.powi(5);
        Ok(DMatrix::from_row_slice(2, 2, &[dmorse, 0.0, 0.0, drep]))
    }

    /// Maps bond length to the active coordinate.
    pub fn w_of_x(&self, x: f64) -> f64 {
        let t = self.a * (x - self.x0);
        match self.coords {
            CoordinateSystem::CartesianX => std::f64::consts::SQRT_2 * t,
            CoordinateSystem::SinhQ => std::f64::consts::SQRT_2 * t.sinh(),
        }
    }

    /// Inverse of [`Self::w_of_x`].
    pub fn x_of_w(&self, w: f64) -> f64 {
        let s = w / std::f64::consts::SQRT_2;
        match self.coords {
            CoordinateSystem::CartesianX => self.x0 + s / self.a,
            CoordinateSystem::SinhQ => self.x0 + s.asinh() / self.a,
        }
    }
}

impl FiberModel for MorseModel {
    fn electronic_dim(&self) -> usize {
        2
    }

    fn kinetic_scale(&self) -> f64 {
        2.0 * self.a * self.a / self.mass
    }

    fn epsilon(&self) -> f64 {
        self.epsilon()
    }

    fn domain(&self) -> (f64, f64) {
        (self.w_of_x(f64::MIN_POSITIVE.max(1e-12)), f64::INFINITY)
    }

    fn fiber_hamiltonian(&self, w: f64) -> Result<DMatrix<Complex64>> {
        let v = self.potential_matrix(self.x_of_w(w))?;
        Ok(v.map(|r| Complex64::new(r, 0.0)))
    }

    fn fiber_hamiltonian_derivative(&self, w: f64) -> Result<DMatrix<Complex64>> {
        let x = self.x_of_w(w);
        let dvdx = self.potential_matrix_dx(x)?;
        // dx/dw from the analytic map.
        let dxdw = match self.coords {
            CoordinateSystem::CartesianX => 1.0 / (std::f64::consts::SQRT_2 * self.a),
            CoordinateSystem::SinhQ => {
                let s = w / std::f64::consts::SQRT_2;
                1.0 / (std::f64::consts::SQRT_2 * self.a * (1.0 + s * s).sqrt())
            }
        };
        Ok(dvdx.map(|r| Complex64::new(r * dxdw, 0.0)))
    }

    fn metric_point(&self, w: f64) -> MetricPoint {
        match self.coords {
            CoordinateSystem::CartesianX => MetricPoint::flat(),
            CoordinateSystem::SinhQ => {
                let denom = 1.0 + 0.5 * w * w;
                MetricPoint {
                    g00: 1.0 / denom,
                    dg00: -w / (denom * denom),
                    angular: None,
                }
            }
        }
    }
}

/// Linear E⊗e Jahn-Teller model, fully nondimensionalized: radial coordinate
/// q = x/x0 with x0 = g/K, energies in units 2 E_JT = g^2/K, and
/// ε = hbar^2 K^3 / (M g^4).
#[derive(Debug, Clone)]
pub struct JahnTellerModel {
    pub epsilon: f64,
    pub j: f64,
}

impl JahnTellerModel {
    pub fn new(epsilon: f64, j: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Config("jahn-teller epsilon must be > 0".into()));
        }
        let two_j = 2.0 * j;
        if (two_j - two_j.round()).abs() > 1e-12 || (two_j.round() as i64) % 2 == 0 {
            return Err(Error::Config(format!(
                "jahn-teller j must be half-integer, got {j}"
            )));
        }
        Ok(Self { epsilon, j })
    }

    pub fn from_config(text: &str) -> Result<Self> {
        let map = parse_flat_kv(text)?;
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        Self::new(get_f64(map, "epsilon")?, get_f64(map, "j")?)
    }

    /// Lower/upper adiabatic radial surfaces and their gap at radius q > 0,
    /// in units 2 E_JT: (q^2/2 - q, q^2/2 + q, 2q).
    pub fn radial_potentials(&self, q: f64) -> Result<(f64, f64, f64)> {
        if q <= 0.0 {
            return Err(Error::DomainError {
                x: q,
                reason: "polar radial coordinate must be positive",
            });
        }
        let sym = 0.5 * q * q;
        Ok((sym - q, sym + q, 2.0 * q))
    }
}

/// Radial fiber bundle of the Jahn-Teller model at fixed angular structure.
///
/// The fiber at radius q is the real coupling matrix
/// [[q^2/2, q], [q, q^2/2]]; the full polar dependence is generated by
/// N = diag(1/2, -1/2) through H(q, φ) = e^{iNφ} H(q) e^{-iNφ}.
#[derive(Debug, Clone)]
pub struct JtRadialFiber {
    pub model: JahnTellerModel,
}

impl FiberModel for JtRadialFiber {
    fn electronic_dim(&self) -> usize {
        2
    }

    fn kinetic_scale(&self) -> f64 {
        self.model.epsilon
    }

    fn epsilon(&self) -> f64 {
        self.model.epsilon
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn fiber_hamiltonian(&self, q: f64) -> Result<DMatrix<Complex64>> {
        if q <= 0.0 {
            return Err(Error::DomainError {
                x: q,
                reason: "polar radial coordinate must be positive",
            });
        }
        let sym = 0.5 * q * q;
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(sym, 0.0),
                Complex64::new(q, 0.0),
                Complex64::new(q, 0.0),
                Complex64::new(sym, 0.0),
            ],
        ))
    }

    fn fiber_hamiltonian_derivative(&self, q: f64) -> Result<DMatrix<Complex64>> {
        if q <= 0.0 {
            return Err(Error::DomainError {
                x: q,
                reason: "polar radial coordinate must be positive",
            });
        }
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(q, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(q, 0.0),
            ],
        ))
    }

    fn metric_point(&self, q: f64) -> MetricPoint {
        MetricPoint {
            g00: 1.0,
            dg00: 0.0,
            angular: Some((q * q, 2.0 * q)),
        }
    }

    fn angular(&self) -> Option<AngularSector> {
        Some(AngularSector {
            generator: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.5, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(-0.5, 0.0),
                ],
            ),
        })
    }
}

/// Uniform grid on the active coordinate.
#[derive(Debug, Clone)]
pub struct Grid1D {
    points: Vec<f64>,
    spacing: f64,
}

impl Grid1D {
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 5, "grids need at least 5 points for the stencils");
        assert!(hi > lo);
        let spacing = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + spacing * i as f64).collect();
        Self { points, spacing }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        *self.points.last().unwrap()
    }
}

/// Metric fields tabulated on a grid: g00, its analytic derivative, the
/// volume factor and the active Christoffel symbol per point.
#[derive(Debug, Clone)]
pub struct Metric1D {
    pub g00: Vec<f64>,
    pub dg00: Vec<f64>,
    pub sqrt_g: Vec<f64>,
    pub christoffel: Vec<f64>,
}

impl Metric1D {
    pub fn tabulate(model: &dyn FiberModel, grid: &Grid1D) -> Self {
        let pts: Vec<MetricPoint> = grid.points().iter().map(|&w| model.metric_point(w)).collect();
        Self {
            g00: pts.iter().map(|p| p.g00).collect(),
            dg00: pts.iter().map(|p| p.dg00).collect(),
            sqrt_g: pts.iter().map(|p| p.sqrt_g()).collect(),
            christoffel: pts.iter().map(|p| p.christoffel()).collect(),
        }
    }
}
