//! Log–log least-squares fits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("DegenerateGrid: need at least two distinct positive scales, got {0}")]
    DegenerateGrid(usize),
}

/// Result of regressing `log y` on `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log units.
    pub residual: f64,
    /// Smallest and largest scale that entered the fit.
    pub scale_min: f64,
    pub scale_max: f64,
    pub points: usize,
}

impl ScalingFit {
    /// Ordinary least squares of `ln y` against `ln x`. Non-positive or
    /// non-finite pairs are skipped.
    pub fn log_log(xs: &[f64], ys: &[f64]) -> Result<Self, FitError> {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(FitError::DegenerateGrid(distinct.len()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        Ok(Self {
            slope,
            intercept,
            residual: (sse / n).sqrt(),
            scale_min: distinct[0].exp(),
            scale_max: distinct[distinct.len() - 1].exp(),
            points: pts.len(),
        })
    }
}

/// `count` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[count - 1] = hi;
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = geometric_grid(1e-6, 1.0, 25);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.7)).collect();
        let fit = ScalingFit::log_log(&xs, &ys).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-12);
        assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        assert!((fit.scale_min - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn single_scale_is_degenerate() {
        assert_eq!(
            ScalingFit::log_log(&[0.5, 0.5], &[1.0, 2.0]),
            Err(FitError::DegenerateGrid(1))
        );
        assert_eq!(ScalingFit::log_log(&[], &[]), Err(FitError::DegenerateGrid(0)));
    }
}
