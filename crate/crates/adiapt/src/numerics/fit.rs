use crate::error::{Error, Result};

/// Ordinary least-squares line through (xs, ys).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Fits y = slope * x + intercept by least squares; needs at least 3 points
/// with distinct abscissas.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() < 3 || ys.len() < 3 {
        return Err(Error::TooFewPoints {
            got: xs.len().min(ys.len()),
        });
    }
    assert_eq!(xs.len(), ys.len(), "xs and ys must have equal length");
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("line fit requires distinct x values".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms_residual: (ss_res / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!(fit.rms_residual < 1e-14);
    }

    #[test]
    fn figure_style_line() {
        let xs: Vec<f64> = (1..8).map(|i| -(i as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 * x - 3.49).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-13);
        assert!((fit.intercept + 3.49).abs() < 1e-13);
        assert!(fit.rms_residual < 1e-13);
    }

    #[test]
    fn noisy_line_slope_close() {
        // Deterministic pseudo-noise at sigma ~ 1e-3.
        let xs: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 0.7 * x - 2.0 + 1e-3 * ((i as f64 * 12.9898).sin()))
            .collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-2);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_line(&[0.0, 1.0], &[0.0, 1.0]),
            Err(Error::TooFewPoints { got: 2 })
        ));
    }
}
