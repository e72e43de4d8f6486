//! Estimators of fractal dimension and sojourn scaling on simulated paths.

mod boxcount;
mod covering;
mod energy;
mod sojourn;

use thiserror::Error;

use crate::borel::BorelError;
use crate::fit::FitError;
use crate::sim::SimError;

pub use boxcount::{box_count_graph, box_count_range, default_box_scales, BoxCountEstimate, FIT_DROP};
pub use covering::{covering_count, schedule_for_case, CoveringCount, Schedule};
pub use energy::{default_gamma_grid, energy_dimension, energy_log_ratio, EnergyEstimate, DIVERGENCE_THRESHOLD};
pub use sojourn::{default_radii, sojourn_mc, SojournEstimate, SojournSeries, MIN_SOJOURN_PATHS};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimatorError {
    #[error("ResolutionTooCoarse: grid step {step:e} exceeds a quarter of the smallest scale {scale:e}")]
    ResolutionTooCoarse { step: f64, scale: f64 },
    #[error("EmptyRestriction: no grid point lies in the time set")]
    EmptyRestriction,
    #[error("TooFewScales: {0} scales remain after trimming, need at least 6")]
    TooFewScales(usize),
    #[error("ScheduleMismatch: {0}")]
    ScheduleMismatch(String),
    #[error("InvalidInterval: [{0}, {1}] is not inside [0, 1]")]
    InvalidInterval(f64, f64),
    #[error("RadiiOutOfRange: radius {radius} outside [{lo:e}, {hi}]")]
    RadiiOutOfRange { radius: f64, lo: f64, hi: f64 },
    #[error("InvalidHorizon: {0} must lie in (0, 1]")]
    InvalidHorizon(f64),
    #[error("EnsembleTooSmall: {got} paths, need at least {need}")]
    EnsembleTooSmall { got: usize, need: usize },
    #[error("DegenerateSample: {0}")]
    DegenerateSample(String),
    #[error("{0}")]
    Fit(#[from] FitError),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Borel(#[from] BorelError),
}

impl EstimatorError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ResolutionTooCoarse { .. } => "ResolutionTooCoarse",
            Self::EmptyRestriction => "EmptyRestriction",
            Self::TooFewScales(_) => "TooFewScales",
            Self::ScheduleMismatch(_) => "ScheduleMismatch",
            Self::InvalidInterval(..) => "InvalidInterval",
            Self::RadiiOutOfRange { .. } => "RadiiOutOfRange",
            Self::InvalidHorizon(_) => "InvalidHorizon",
            Self::EnsembleTooSmall { .. } => "EnsembleTooSmall",
            Self::DegenerateSample(_) => "DegenerateSample",
            Self::Fit(_) => "DegenerateGrid",
            Self::Sim(e) => e.name(),
            Self::Borel(_) => "InvalidSet",
        }
    }
}

/// Counts distinct integer lattice cells among time-ordered points.
///
/// `points` is row-major with `width` coordinates per point, the first being
/// time. Points are grouped by time column, so only keys within one column
/// need sorting.
pub(crate) fn count_cells_time_ordered(points: &[f64], width: usize, side: f64) -> u64 {
    let mut total = 0u64;
    let mut keys: Vec<i64> = Vec::new();
    let rest = width - 1;
    let mut start = 0;
    let n = points.len() / width;
    while start < n {
        let col = (points[start * width] / side).floor();
        let mut end = start;
        keys.clear();
        while end < n && (points[end * width] / side).floor() == col {
            for j in 1..width {
                keys.push((points[end * width + j] / side).floor() as i64);
            }
            end += 1;
        }
        total += count_distinct(&mut keys, rest);
        start = end;
    }
    total
}

/// Distinct `stride`-tuples in a flat key buffer.
pub(crate) fn count_distinct(keys: &mut [i64], stride: usize) -> u64 {
    if keys.is_empty() {
        return 0;
    }
    if stride == 1 {
        keys.sort_unstable();
        let mut c = 1;
        for w in keys.windows(2) {
            if w[0] != w[1] {
                c += 1;
            }
        }
        return c;
    }
    let mut local: Vec<&[i64]> = keys.chunks_exact(stride).collect();
    local.sort_unstable();
    local.dedup();
    local.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counting() {
        // Points (t, x): two in cell (0,0), one in (0,1), one in (1,0).
        let pts = [0.1, 0.1, 0.2, 0.3, 0.3, 1.5, 1.2, 0.4];
        assert_eq!(count_cells_time_ordered(&pts, 2, 1.0), 3);
        assert_eq!(count_cells_time_ordered(&pts, 2, 0.25), 4);
        let pts3 = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5];
        assert_eq!(count_cells_time_ordered(&pts3, 3, 1.0), 2);
    }
}
