use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{count_cells_time_ordered, count_distinct, EstimatorError};
use crate::borel::BorelSetSpec;
use crate::fit::ScalingFit;
use crate::sim::LevyPath;

/// Scales dropped at each end of the grid before fitting.
pub const FIT_DROP: usize = 2;
const MIN_FIT_SCALES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountEstimate {
    /// Side lengths, descending.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub fit: ScalingFit,
    /// `−slope` of `log N` against `log b` over the fit window.
    pub dimension: f64,
    /// Whether `N(b) ≤ N(b')` for every nested pair `b = 2^k b'`. Grids at
    /// other ratios are not nested and may legitimately disagree by a box.
    pub monotone: bool,
    pub points: usize,
}

/// Geometric grid with ratio √2 from `b_max` down to `b_min`.
///
/// `b_min = 2^{−⌊n/2⌋}` keeps many grid points per box column; the largest
/// side is `max(2^{−3}, b_min 2^{4.5})`, capped at 1/2.
pub fn default_box_scales(n: u32) -> Vec<f64> {
    let e_min = if n >= 12 { (n / 2) as f64 } else { n.saturating_sub(2) as f64 };
    let e_max = (e_min - 4.5).min(3.0).max(1.0);
    // Every other scale is an exact halving, so those grids nest.
    let base = [(-e_max).exp2(), (-(e_max + 0.5)).exp2()];
    let steps = ((e_min - e_max) * 2.0).round() as usize;
    (0..=steps).map(|i| base[i % 2] * 0.5f64.powi((i / 2) as i32)).collect()
}

fn prepare(path: &LevyPath, scales: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let mut sorted = scales.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let min = *sorted.last().ok_or(EstimatorError::TooFewScales(0))?;
    if path.dt() > min / 4.0 {
        return Err(EstimatorError::ResolutionTooCoarse {
            step: path.dt(),
            scale: min,
        });
    }
    if sorted.len() < MIN_FIT_SCALES + 2 * FIT_DROP {
        return Err(EstimatorError::TooFewScales(sorted.len().saturating_sub(2 * FIT_DROP)));
    }
    Ok(sorted)
}

fn finish(scales: Vec<f64>, counts: Vec<u64>, points: usize) -> Result<BoxCountEstimate, EstimatorError> {
    let k = scales.len();
    let xs = &scales[FIT_DROP..k - FIT_DROP];
    let ys: Vec<f64> = counts[FIT_DROP..k - FIT_DROP].iter().map(|c| *c as f64).collect();
    let fit = ScalingFit::log_log(xs, &ys)?;
    let monotone = nested_monotone(&scales, &counts);
    Ok(BoxCountEstimate {
        dimension: -fit.slope,
        scales,
        counts,
        fit,
        monotone,
        points,
    })
}

fn nested_monotone(scales: &[f64], counts: &[u64]) -> bool {
    for i in 0..scales.len() {
        for j in i + 1..scales.len() {
            let k = (scales[i] / scales[j]).log2();
            if (k - k.round()).abs() < 1e-9 && counts[i] > counts[j] {
                return false;
            }
        }
    }
    true
}

/// Graph points `(t_k, X(t_k))` with `t_k` in the level approximation of `set`
/// fine enough for `min_scale`.
pub(crate) fn restricted_graph_points(path: &LevyPath, set: &BorelSetSpec, min_scale: f64) -> Vec<f64> {
    let level = set.level_for_scale(min_scale);
    let mut pts = Vec::new();
    for k in 0..path.len() {
        let t = path.time(k);
        if set.contains_at_level(t, level) {
            pts.push(t);
            pts.extend_from_slice(path.point(k));
        }
    }
    pts
}

/// Box-counting dimension of `{Z(t_k) : t_k ∈ B}`.
pub fn box_count_graph(path: &LevyPath, set: &BorelSetSpec, scales: &[f64]) -> Result<BoxCountEstimate, EstimatorError> {
    set.validate()?;
    let scales = prepare(path, scales)?;
    let min = *scales.last().expect("nonempty");
    let pts = restricted_graph_points(path, set, min);
    let width = path.d + 1;
    if pts.is_empty() {
        return Err(EstimatorError::EmptyRestriction);
    }
    let counts: Vec<u64> = scales
        .par_iter()
        .map(|&b| count_cells_time_ordered(&pts, width, b))
        .collect();
    finish(scales, counts, pts.len() / width)
}

/// Box-counting dimension of the range `{X(t_k) : t_k ∈ B}`.
pub fn box_count_range(path: &LevyPath, set: &BorelSetSpec, scales: &[f64]) -> Result<BoxCountEstimate, EstimatorError> {
    set.validate()?;
    let scales = prepare(path, scales)?;
    let min = *scales.last().expect("nonempty");
    let pts = restricted_graph_points(path, set, min);
    let width = path.d + 1;
    if pts.is_empty() {
        return Err(EstimatorError::EmptyRestriction);
    }
    let counts: Vec<u64> = scales
        .par_iter()
        .map(|&b| {
            let mut keys: Vec<i64> = pts
                .chunks_exact(width)
                .flat_map(|z| z[1..].iter().map(move |x| (x / b).floor() as i64))
                .collect();
            count_distinct(&mut keys, width - 1)
        })
        .collect();
    finish(scales, counts, pts.len() / width)
}
