//! Least-squares line fits, plain and log-log.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Standard error of the slope (0 with two points).
    pub slope_stderr: f64,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "line fit needs two points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 {
        sqrt(sse / (nf - 2.0) / sxx)
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        residual: sqrt(sse / nf),
        slope_stderr,
        n,
    })
}

/// Fit of `log y = slope·log x + intercept`; nonpositive data are dropped.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (ln(*x), ln(*y)))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Observed order between two refinements: `log(e₁/e₂)/log(h₁/h₂)`.
pub fn observed_order(h1: f64, e1: f64, h2: f64, e2: f64) -> f64 {
    ln(e1 / e2) / ln(h1 / h2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs: Vec<f64> = (1..6).map(|k| 0.5f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let f = loglog_fit(&xs, &ys).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn single_point_is_insufficient() {
        assert!(matches!(
            linear_fit(&[1.0], &[2.0]),
            Err(Error::InsufficientData(_))
        ));
    }
}
