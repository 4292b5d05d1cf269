use nalgebra::DMatrix;

/// Gauss-Hermite rule: integrates f against the weight exp(-t^2) on the real
/// line, exactly for polynomials up to degree 2n - 1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds an n-point Gauss-Hermite rule by the Golub-Welsch method: the
    /// nodes are eigenvalues of the Jacobi matrix with off-diagonals
    /// sqrt(k/2), the weights sqrt(pi) times the squared first components.
    pub fn gauss_hermite(n: usize) -> Self {
        assert!(n >= 1);
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j {
                ((j as f64) / 2.0).sqrt()
            } else if j + 1 == i {
                ((i as f64) / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = jacobi.symmetric_eigen();
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        // Hermite nodes come in exact +/- pairs; symmetrize away the
        // eigensolver's rounding so odd moments cancel to machine precision.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let t = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -t;
            nodes[j] = t;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        // Weights from the Christoffel function 1/sum_k p_k(x)^2 over the
        // orthonormal Hermite polynomials; more accurate than squared
        // eigenvector components, whose tiny entries carry poor relative
        // precision at the outer nodes.
        let h0 = std::f64::consts::PI.powf(-0.25);
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&t| {
                let mut prev = h0;
                let mut sum = prev * prev;
                if n > 1 {
                    let mut cur = std::f64::consts::SQRT_2 * t * h0;
                    sum += cur * cur;
                    for k in 1..n - 1 {
                        let next = t * (2.0 / (k as f64 + 1.0)).sqrt() * cur
                            - ((k as f64) / (k as f64 + 1.0)).sqrt() * prev;
                        prev = cur;
                        cur = next;
                        sum += cur * cur;
                    }
                }
                1.0 / sum
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// Sum of w_i * f(t_i), i.e. the integral of f(t) e^{-t^2} dt.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form for the Gaussian moment integral of t^k.
    fn gaussian_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        // (k-1)!! sqrt(pi) / 2^(k/2)
        let mut dfact = 1.0;
        let mut m = k as i64 - 1;
        while m > 1 {
            dfact *= m as f64;
            m -= 2;
        }
        dfact * std::f64::consts::PI.sqrt() / 2f64.powi(k as i32 / 2)
    }

    #[test]
    fn weights_positive() {
        let rule = QuadratureRule::gauss_hermite(40);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn monomials_integrated_exactly() {
        let rule = QuadratureRule::gauss_hermite(12);
        for k in 0..=rule.degree() {
            let numeric = rule.integrate(|t| t.powi(k as i32));
            let exact = gaussian_moment(k);
            // Odd moments vanish by symmetry; gauge those against the
            // magnitude of the integrand the rule actually sums.
            let scale = exact.abs().max(rule.integrate(|t| t.abs().powi(k as i32)) * 1e-3);
            assert!(
                (numeric - exact).abs() <= 1e-12 * scale,
                "degree {k}: {numeric} vs {exact}"
            );
        }
    }

    #[test]
    fn degree_beyond_rule_is_inexact() {
        let rule = QuadratureRule::gauss_hermite(3);
        let k = rule.degree() + 1;
        let numeric = rule.integrate(|t| t.powi(k as i32));
        let exact = gaussian_moment(k);
        assert!((numeric - exact).abs() > 1e-6 * exact.abs());
    }
}
