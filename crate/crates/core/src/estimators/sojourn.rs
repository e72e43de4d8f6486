use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::fit::ScalingFit;
use crate::rng;
use crate::sim::ProcessModel;
use crate::stats;

pub const MIN_SOJOURN_PATHS: usize = 200;
const BATCHES: usize = 10;

/// Mean sojourn times at each radius with their uncertainty and fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournSeries {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub fit: ScalingFit,
    /// Spread of the slope across independent batches of paths.
    pub slope_stderr: f64,
    /// `T̂(a)` nondecreasing in `a`.
    pub monotone: bool,
    /// `T̂(a) ≤ s` for every radius.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournEstimate {
    pub radii: Vec<f64>,
    pub horizon: f64,
    pub paths: usize,
    pub n: u32,
    /// `T_Z(a, s)`, the graph `(t, X(t))`.
    pub graph: SojournSeries,
    /// `T_X(a, s)`, the range.
    pub range: SojournSeries,
}

/// Radii `2^{−2}, 2^{−2.5}, …, 2^{−⌊n/2⌋}`.
pub fn default_radii(n: u32) -> Vec<f64> {
    let lo = (n / 2) as f64;
    let mut out = Vec::new();
    let mut e = 2.0;
    while e <= lo + 1e-9 {
        out.push((-e).exp2());
        e += 0.5;
    }
    out
}

fn series(per_path: &[Vec<f64>], radii: &[f64], horizon: f64) -> Result<SojournSeries, EstimatorError> {
    let r = radii.len();
    let col = |i: usize, rows: &[Vec<f64>]| -> Vec<f64> { rows.iter().map(|p| p[i]).collect() };
    let mean: Vec<f64> = (0..r).map(|i| stats::mean(&col(i, per_path))).collect();
    let stderr: Vec<f64> = (0..r).map(|i| stats::std_err(&col(i, per_path))).collect();
    let fit = ScalingFit::log_log(radii, &mean)?;
    let size = per_path.len() / BATCHES;
    let slopes: Vec<f64> = (0..BATCHES)
        .filter_map(|b| {
            let chunk = &per_path[b * size..(b + 1) * size];
            let m: Vec<f64> = (0..r).map(|i| stats::mean(&col(i, chunk))).collect();
            ScalingFit::log_log(radii, &m).ok().map(|f| f.slope)
        })
        .collect();
    let slope_stderr = stats::std_dev(&slopes) / (slopes.len() as f64).sqrt();
    let monotone = mean.windows(2).all(|w| w[0] <= w[1]);
    let bounded = mean.iter().all(|m| *m <= horizon);
    Ok(SojournSeries {
        mean,
        stderr,
        fit,
        slope_stderr,
        monotone,
        bounded,
    })
}

/// Monte Carlo sojourn times of the graph and the range in balls of radius
/// `a` around the origin, up to time `horizon`.
///
/// `T̂(a) = dt · #{k : t_k < s, ‖·‖ ≤ a}` per path (left Riemann sum),
/// averaged over `paths` paths drawn from `stream/path/<i>`.
pub fn sojourn_mc(
    model: &ProcessModel,
    radii: &[f64],
    horizon: f64,
    n: u32,
    paths: usize,
    seed: u64,
    stream: &str,
) -> Result<SojournEstimate, EstimatorError> {
    if paths < MIN_SOJOURN_PATHS {
        return Err(EstimatorError::EnsembleTooSmall {
            got: paths,
            need: MIN_SOJOURN_PATHS,
        });
    }
    if !(horizon > 0.0 && horizon <= 1.0) {
        return Err(EstimatorError::InvalidHorizon(horizon));
    }
    let lo = (-((n / 2) as f64)).exp2();
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    for &a in &radii {
        if !(a >= lo * (1.0 - 1e-12) && a <= 0.5) {
            return Err(EstimatorError::RadiiOutOfRange { radius: a, lo, hi: 0.5 });
        }
    }
    let dt = (-(n as f64)).exp2();
    let steps = (horizon / dt).ceil() as usize;
    let d = model.dim();
    let radii2: Vec<f64> = radii.iter().map(|a| a * a).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::path_stream(seed, stream, i);
            let values = model.simulate_steps(n, steps, &mut r)?;
            // Histogram of the smallest radius containing each point, then
            // cumulative counts over the ascending radii.
            let mut graph = vec![0u64; radii.len() + 1];
            let mut range = vec![0u64; radii.len() + 1];
            // k ranges over t_k < s.
            for k in 0..steps {
                let t = k as f64 * dt;
                let x2: f64 = values[k * d..(k + 1) * d].iter().map(|v| v * v).sum();
                range[radii2.partition_point(|a2| *a2 < x2)] += 1;
                graph[radii2.partition_point(|a2| *a2 < x2 + t * t)] += 1;
            }
            let cumulative = |h: Vec<u64>| -> Vec<f64> {
                h[..radii.len()]
                    .iter()
                    .scan(0u64, |acc, c| {
                        *acc += c;
                        Some(*acc as f64 * dt)
                    })
                    .collect()
            };
            let (graph, range) = (cumulative(graph), cumulative(range));
            Ok((graph, range))
        })
        .collect::<Result<_, EstimatorError>>()?;
    let (graph_rows, range_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(SojournEstimate {
        graph: series(&graph_rows, &radii, horizon)?,
        range: series(&range_rows, &radii, horizon)?,
        radii,
        horizon,
        paths,
        n,
    })
}
