use nalgebra::DVector;
use num_complex::Complex64;

/// Natural cubic spline through (xs, ys) with strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        assert!(xs.len() >= 3, "spline needs at least 3 knots");
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        // Thomas algorithm for the natural-spline tridiagonal system.
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let m = sub[i] / diag[i - 1];
            diag[i] -= m * sup[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut second = vec![0.0; n];
        second[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            second[i] = (rhs[i] - sup[i] * second[i + 1]) / diag[i];
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            second,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Evaluates the spline; x must lie inside the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        debug_assert!(
            x >= self.xs[0] - 1e-9 && x <= self.xs[n - 1] + 1e-9,
            "spline evaluated outside its knots"
        );
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a.powi(3) - a) * self.second[i] + (b.powi(3) - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

/// Complex-valued field sampled on knots, splined componentwise.
#[derive(Debug, Clone)]
pub struct ComplexSpline {
    re: CubicSpline,
    im: CubicSpline,
}

impl ComplexSpline {
    pub fn fit(xs: &[f64], ys: &[Complex64]) -> Self {
        let re: Vec<f64> = ys.iter().map(|z| z.re).collect();
        let im: Vec<f64> = ys.iter().map(|z| z.im).collect();
        Self {
            re: CubicSpline::fit(xs, &re),
            im: CubicSpline::fit(xs, &im),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(self.re.eval(x), self.im.eval(x))
    }
}

/// Grid field of complex vectors (e.g. electronic states per grid point),
/// splined component by component.
#[derive(Debug, Clone)]
pub struct VectorSpline {
    components: Vec<ComplexSpline>,
}

impl VectorSpline {
    pub fn fit(xs: &[f64], field: &[DVector<Complex64>]) -> Self {
        assert_eq!(xs.len(), field.len());
        let dim = field[0].len();
        let components = (0..dim)
            .map(|k| {
                let ys: Vec<Complex64> = field.iter().map(|v| v[k]).collect();
                ComplexSpline::fit(xs, &ys)
            })
            .collect();
        Self { components }
    }

    pub fn eval(&self, x: f64) -> DVector<Complex64> {
        DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.eval(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_function_to_high_accuracy() {
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let spline = CubicSpline::fit(&xs, &ys);
        // Probe well inside the knots to stay clear of the natural-boundary layer.
        for k in 0..200 {
            let x = -0.8 + 1.6 * k as f64 / 199.0;
            assert!((spline.eval(x) - (3.0 * x).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn reproduces_knot_values() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, 0.5, 2.0];
        let spline = CubicSpline::fit(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((spline.eval(*x) - y).abs() < 1e-14);
        }
    }
}
