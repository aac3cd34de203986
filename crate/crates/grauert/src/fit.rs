//! Tiny least-squares helpers for the experiment reports: straight-line
//! fits with standard errors, mostly applied in log-log coordinates.

/// Ordinary least squares `y ~ a + b x`; returns `(slope, intercept,
/// slope_stderr)`. Needs at least three points for a finite stderr.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(x.len() >= 2, "need at least two points");
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let ss_res: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| {
                let r = b - (intercept + slope * a);
                r * r
            })
            .sum();
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, stderr)
}

/// Log-log slope fit of positive data: `log y ~ a + b log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (slope, icpt, err) = linear_fit(&x, &y);
        assert_relative_eq!(slope, 2.5, epsilon = 1e-12);
        assert_relative_eq!(icpt, -1.0, epsilon = 1e-12);
        assert!(err < 1e-10);
    }

    #[test]
    fn power_law_exponent() {
        let x = [10.0f64, 20.0, 40.0, 80.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        let (slope, _, _) = loglog_fit(&x, &y);
        assert_relative_eq!(slope, -1.5, epsilon = 1e-12);
    }
}
