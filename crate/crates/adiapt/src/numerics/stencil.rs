use nalgebra::DVector;
use num_complex::Complex64;

/// Fourth-order forward one-sided stencils for the first two grid points; the
/// last two use the mirrored, sign-flipped versions.
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

fn stencil_at(i: usize, n: usize) -> (isize, [f64; 5]) {
    debug_assert!(n >= 5, "fourth-order stencils need at least 5 points");
    if i == 0 {
        (0, EDGE0)
    } else if i == 1 {
        (-1, EDGE1)
    } else if i == n - 2 {
        let mut c = EDGE1;
        c.reverse();
        c.iter_mut().for_each(|v| *v = -*v);
        (-3, c)
    } else if i == n - 1 {
        let mut c = EDGE0;
        c.reverse();
        c.iter_mut().for_each(|v| *v = -*v);
        (-4, c)
    } else {
        (-2, [1.0, -8.0, 0.0, 8.0, -1.0])
    }
}

/// Fourth-order first derivative of a complex scalar field on a uniform grid
/// with spacing h; centered stencils inside, one-sided at the edges.
pub fn derivative_scalar_field(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (off, coefs) = stencil_at(i, n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coefs.iter().enumerate() {
            let idx = (i as isize + off + k as isize) as usize;
            acc += values[idx] * c;
        }
        out.push(acc / (12.0 * h));
    }
    out
}

/// Same stencils applied to a field of complex vectors (states per point).
pub fn derivative_field(values: &[DVector<Complex64>], h: f64) -> Vec<DVector<Complex64>> {
    let n = values.len();
    let dim = values[0].len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (off, coefs) = stencil_at(i, n);
        let mut acc = DVector::<Complex64>::zeros(dim);
        for (k, &c) in coefs.iter().enumerate() {
            let idx = (i as isize + off + k as isize) as usize;
            acc += &values[idx] * Complex64::new(c, 0.0);
        }
        out.push(acc / Complex64::new(12.0 * h, 0.0));
    }
    out
}
