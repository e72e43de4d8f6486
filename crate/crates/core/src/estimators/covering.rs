use serde::{Deserialize, Serialize};

use super::{count_cells_time_ordered, EstimatorError};
use crate::borel::BorelSetSpec;
use crate::dimension::DimensionInputs;
use crate::sim::LevyPath;

/// How the cube side `b_i` is tied to the interval length `|I_i|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Schedule {
    /// `b_i = |I_i|^{1/α_1}`.
    A1,
    /// `b_i = |I_i|`.
    Id,
    /// `b_i = |I_i|^{1/α_2}`.
    A2,
}

impl Schedule {
    pub fn side(&self, len: f64, alpha1: f64, alpha2: f64) -> f64 {
        match self {
            Self::A1 => len.powf(1.0 / alpha1),
            Self::Id => len,
            Self::A2 => len.powf(1.0 / alpha2),
        }
    }
}

/// Covering schedule matching the regime of `(α_1, α_2, d_1, s)`:
/// below the critical value `α_1 s ≤ d_1` it is A1 for `α_1 ≥ 1` and ID
/// otherwise; above it, A2 when a second block with `α_2 ≥ 1` exists, ID
/// when `α_2 < 1` or there is no second block.
pub fn schedule_for_case(inp: &DimensionInputs) -> Schedule {
    if inp.alpha1 * inp.s <= inp.d1 as f64 {
        if inp.alpha1 >= 1.0 {
            Schedule::A1
        } else {
            Schedule::Id
        }
    } else {
        match inp.alpha2 {
            Some(a2) if a2 >= 1.0 => Schedule::A2,
            _ => Schedule::Id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCount {
    pub schedule: Schedule,
    pub kappa: f64,
    pub intervals: Vec<(f64, f64)>,
    pub sides: Vec<f64>,
    /// `M_i`: cubes of side `b_i` hit by the graph over `I_i ∩ B`.
    pub counts: Vec<u64>,
    /// `Σ M_i b_i^κ`.
    pub weighted_sum: f64,
}

/// Counts, for each interval, the cubes of the schedule's side hit by the
/// graph over the grid points of `I_i ∩ B`, and their weighted sum.
pub fn covering_count(
    path: &LevyPath,
    set: &BorelSetSpec,
    intervals: &[(f64, f64)],
    schedule: Schedule,
    params: &DimensionInputs,
    kappa: f64,
) -> Result<CoveringCount, EstimatorError> {
    set.validate()?;
    let expected = schedule_for_case(params);
    if schedule != expected {
        return Err(EstimatorError::ScheduleMismatch(format!(
            "{schedule:?} requested but the parameters call for {expected:?}"
        )));
    }
    let alpha2 = params.alpha2.unwrap_or(params.alpha1);
    for &(lo, hi) in intervals {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(EstimatorError::InvalidInterval(lo, hi));
        }
    }
    let sides: Vec<f64> = intervals
        .iter()
        .map(|(lo, hi)| schedule.side(hi - lo, params.alpha1, alpha2))
        .collect();
    let min_len = intervals.iter().map(|(lo, hi)| hi - lo).fold(f64::INFINITY, f64::min);
    let level = set.level_for_scale(min_len);
    let dt = path.dt();
    let width = path.d + 1;
    let last = path.len().saturating_sub(1);
    let mut counts = Vec::with_capacity(intervals.len());
    let mut pts = Vec::new();
    for (&(lo, hi), &b) in intervals.iter().zip(&sides) {
        pts.clear();
        let k0 = (lo / dt).ceil() as usize;
        let k1 = ((hi / dt).floor() as usize).min(last);
        for k in k0..=k1 {
            let t = path.time(k);
            if set.contains_at_level(t, level) {
                pts.push(t);
                pts.extend_from_slice(path.point(k));
            }
        }
        counts.push(count_cells_time_ordered(&pts, width, b));
    }
    let weighted_sum = counts.iter().zip(&sides).map(|(m, b)| *m as f64 * b.powf(kappa)).sum();
    Ok(CoveringCount {
        schedule,
        kappa,
        intervals: intervals.to_vec(),
        sides,
        counts,
        weighted_sum,
    })
}
