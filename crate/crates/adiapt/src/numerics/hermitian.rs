use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
const HERMITICITY_TOL: f64 = 1e-12;

/// Relative floor on the smallest overlap eigenvalue before a generalized
/// problem is rejected as over-complete.
const POSITIVITY_FLOOR: f64 = 1e-10;

/// Dense Hermitian matrix in row-major complex storage.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

/// One eigenpair of a (generalized) Hermitian problem.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<Complex64>,
}

impl HermitianMatrix {
    /// Wraps a complex matrix, checking finiteness and Hermiticity to an
    /// absolute tolerance scaled by the largest entry.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        assert_eq!(data.nrows(), data.ncols(), "matrix must be square");
        let mut scale: f64 = 0.0;
        for z in data.iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite);
            }
            scale = scale.max(z.norm());
        }
        let tol = HERMITICITY_TOL * scale.max(1.0);
        let mut max_dev: f64 = 0.0;
        for i in 0..data.nrows() {
            for j in i..data.ncols() {
                max_dev = max_dev.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if max_dev > tol {
            return Err(Error::NonHermitian { max_dev, tol });
        }
        // Symmetrize so downstream algebra sees an exactly Hermitian matrix.
        let herm = (&data + data.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { data: herm })
    }

    /// Builds from an entry function without the Hermiticity check; the caller
    /// must supply f with f(i, j) = conj(f(j, i)).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Largest entry magnitude; zero matrices report 0.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// True when every imaginary part is negligible relative to the matrix scale.
fn effectively_real(m: &DMatrix<Complex64>) -> bool {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    m.iter().all(|z| z.im.abs() <= 1e-14 * scale)
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending with
/// orthonormal eigenvectors as matrix columns.
///
/// Real-symmetric input takes a direct tridiagonal/QL path; genuinely complex
/// input is embedded as the real symmetric matrix [[A, -B], [B, A]] whose
/// doubled spectrum is folded back onto complex eigenvectors.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    if effectively_real(m) {
        let real = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
        let eig = real.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(eig.eigenvectors[(i, order[j])], 0.0)
        });
        return (values, vectors);
    }

    // Real embedding: H = A + iB, Hermitian, maps to the symmetric
    // M = [[A, -B], [B, A]] with every eigenvalue of H appearing twice.
    let big = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i % n, j % n);
        let z = 0.5 * (m[(bi, bj)] + m[(bj, bi)].conj());
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = big.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = eig
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let cluster_tol = 1e-9 * scale;

    // Fold pairs back: walk clusters of numerically equal eigenvalues (real
    // multiplicity 2m <-> complex multiplicity m) and keep m independent
    // complex vectors per cluster via modified Gram-Schmidt.
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    let mut col = 0usize;
    let mut k = 0usize;
    while k < 2 * n {
        let mut end = k + 1;
        while end < 2 * n && (eig.eigenvalues[order[end]] - eig.eigenvalues[order[k]]) < cluster_tol
        {
            end += 1;
        }
        let want = (end - k) / 2;
        let mut kept: Vec<DVector<Complex64>> = Vec::with_capacity(want);
        for &idx in &order[k..end] {
            if kept.len() == want {
                break;
            }
            let raw = eig.eigenvectors.column(idx);
            let mut v = DVector::from_fn(n, |i, _| Complex64::new(raw[i], raw[i + n]));
            for u in &kept {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                v /= Complex64::new(norm, 0.0);
                kept.push(v);
            }
        }
        assert_eq!(
            kept.len(),
            want,
            "failed to extract a full set of complex eigenvectors"
        );
        for v in kept {
            values.push(eig.eigenvalues[order[k]]);
            vectors.set_column(col, &v);
            col += 1;
        }
        k = end;
    }
    // Refine folded eigenvalues with a Rayleigh quotient.
    for j in 0..n {
        let v = vectors.column(j);
        values[j] = v.dotc(&(m * v)).re;
    }
    (values, vectors)
}

/// Complex Cholesky factor L with A = L L^H; fails if a pivot is not positive.
fn cholesky(a: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves L X = B in place for lower-triangular L.
fn forward_solve(l: &DMatrix<Complex64>, b: &mut DMatrix<Complex64>) {
    let n = l.nrows();
    for col in 0..b.ncols() {
        for i in 0..n {
            let mut s = b[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * b[(k, col)];
            }
            b[(i, col)] = s / l[(i, i)];
        }
    }
}

/// Solves L^H X = B in place for lower-triangular L.
fn adjoint_solve(l: &DMatrix<Complex64>, b: &mut DMatrix<Complex64>) {
    let n = l.nrows();
    for col in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = b[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * b[(k, col)];
            }
            b[(i, col)] = s / l[(i, i)];
        }
    }
}

/// Solves the generalized Hermitian eigenproblem H v = lambda S v.
///
/// S is reduced by a Cholesky factorization to a standard Hermitian problem;
/// eigenvalues come back ascending and eigenvectors S-orthonormal. A smallest
/// overlap eigenvalue below `1e-10 * max` rejects the problem, naming the
/// offending eigenvalue: that is the signature of an over-complete basis.
pub fn solve_generalized_hermitian(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
) -> Result<Vec<EigenPair>> {
    assert_eq!(h.dim(), s.dim(), "H and S dimensions must agree");
    let n = h.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (s_eigs, _) = hermitian_eigen(s.matrix());
    let min_eig = s_eigs[0];
    let max_eig = s_eigs[n - 1];
    if min_eig <= POSITIVITY_FLOOR * max_eig.max(0.0) {
        return Err(Error::NotPositiveDefinite { min_eig, max_eig });
    }
    let l = cholesky(s.matrix()).ok_or(Error::NotPositiveDefinite { min_eig, max_eig })?;

    // A = L^-1 H L^-H via two triangular solves; re-Hermitize against rounding.
    let mut y = h.matrix().clone();
    forward_solve(&l, &mut y);
    let mut yh = y.adjoint();
    forward_solve(&l, &mut yh);
    let a = (&yh + yh.adjoint()) * Complex64::new(0.5, 0.0);

    let (values, mut vectors) = hermitian_eigen(&a);
    adjoint_solve(&l, &mut vectors);

    Ok(values
        .into_iter()
        .enumerate()
        .map(|(j, value)| EigenPair {
            value,
            vector: vectors.column(j).into_owned(),
        })
        .collect())
}

/// Solves A x = b for Hermitian A via its eigendecomposition.
///
/// A may be singular as long as b lives in the range space: components of b
/// along null directions raise an error carrying the condition estimate.
pub fn solve_linear_hermitian(
    a: &HermitianMatrix,
    b: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    assert_eq!(a.dim(), b.len(), "dimension mismatch");
    let (values, vectors) = hermitian_eigen(a.matrix());
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Err(Error::SingularSystem {
            condition: f64::INFINITY,
        });
    }
    let cutoff = 1e-13 * max_abs;
    let min_abs = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let condition = max_abs / min_abs.max(f64::MIN_POSITIVE);
    let bnorm = b.norm().max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(b.len());
    for (j, &lambda) in values.iter().enumerate() {
        let u = vectors.column(j);
        let coef = u.dotc(b);
        if lambda.abs() <= cutoff {
            if coef.norm() > 1e-11 * bnorm {
                return Err(Error::SingularSystem { condition });
            }
            continue;
        }
        x += u * (coef / Complex64::new(lambda, 0.0));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_generalized_problem() {
        let h = HermitianMatrix::from_fn(2, |i, j| {
            if i == j {
                c(1.0 + i as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let s = HermitianMatrix::identity(2);
        let pairs = solve_generalized_hermitian(&h, &s).unwrap();
        assert!((pairs[0].value - 1.0).abs() < 1e-14);
        assert!((pairs[1].value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let h = HermitianMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
            .unwrap();
        let s = HermitianMatrix::identity(2);
        let pairs = solve_generalized_hermitian(&h, &s).unwrap();
        assert!((pairs[0].value + 1.0).abs() < 1e-14);
        assert!((pairs[1].value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_eigen_residuals() {
        // sigma_y has spectrum -1, +1 and genuinely complex eigenvectors.
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-13);
        assert!((vals[1] - 1.0).abs() < 1e-13);
        for j in 0..2 {
            let v = vecs.column(j).into_owned();
            let r = &m * &v - &v * c(vals[j], 0.0);
            assert!(r.norm() < 1e-13);
        }
    }

    #[test]
    fn trivial_linear_solve() {
        let a = HermitianMatrix::from_fn(2, |i, j| {
            if i == j {
                c(2.0 * (i + 1) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let b = DVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]);
        let x = solve_linear_hermitian(&a, &b).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_solve_in_range_space() {
        // A = diag(0, delta): b orthogonal to the null direction stays in range.
        let delta = 1e-3;
        let a = HermitianMatrix::from_fn(2, |i, j| {
            if i == 1 && j == 1 {
                c(delta, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let b = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let x = solve_linear_hermitian(&a, &b).unwrap();
        assert!((x[1].re - 1.0 / delta).abs() < 1e-9);
        assert!(x[0].norm() < 1e-12);

        // b with a null-space component must error with a condition estimate.
        let bad = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        match solve_linear_hermitian(&a, &bad) {
            Err(Error::SingularSystem { condition }) => assert!(condition > 1e10),
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NonHermitian { .. })
        ));
    }
}
