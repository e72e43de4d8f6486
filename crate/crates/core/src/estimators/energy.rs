use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::borel::BorelSetSpec;
use crate::sim::LevyPath;

/// Doubling the sample may raise `log I_γ` by at most this much while the
/// energy is still considered finite.
pub const DIVERGENCE_THRESHOLD: f64 = 0.1;
const MIN_SAMPLE: usize = 1000;
const ROW_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// γ values evaluated, ascending (the scan stops at the first divergence).
    pub gammas: Vec<f64>,
    /// `log(I_γ(2m) / I_γ(m))` per evaluated γ.
    pub log_ratios: Vec<f64>,
    /// Largest γ before the first divergence (0 when the first γ diverges).
    pub estimate: f64,
    /// First γ flagged as divergent, if any.
    pub diverged_at: Option<f64>,
    /// Size of the smaller subsample; the larger has `2m` points.
    pub m: usize,
}

/// `0.5, 0.51, …, 3.5`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=300).map(|i| 0.5 + i as f64 / 100.0).collect()
}

/// Nested systematic subsample of `2m` graph points distributed according
/// to the natural measure on `B`: times are the measure's quantiles at
/// `(i + u0) / 2m`, snapped to the grid. Even indices form the `m`-sample.
fn sample_points(path: &LevyPath, set: &BorelSetSpec, m: usize, phase: f64) -> Result<Vec<Vec<f64>>, EstimatorError> {
    set.validate()?;
    let big = 2 * m;
    let last = path.len() - 1;
    let dt = path.dt();
    let mut idx = Vec::with_capacity(big);
    for i in 0..big {
        let u = (i as f64 + phase) / big as f64;
        let t = set.natural_quantile(u);
        idx.push(((t / dt).round() as usize).min(last));
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Err(EstimatorError::DegenerateSample(
            "subsample times collide on the grid; use a finer path or fewer points".into(),
        ));
    }
    let pts: Vec<Vec<f64>> = idx.iter().map(|&k| path.graph_point(k)).collect();
    Ok(pts)
}

/// Natural logs of pairwise distances, split into pairs among even indices
/// (the `m`-sample) and all pairs.
fn log_distances(pts: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), EstimatorError> {
    let n = pts.len();
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .step_by(ROW_BLOCK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let mut all = Vec::new();
            let mut even = Vec::new();
            for i in start..(start + ROW_BLOCK).min(n) {
                for j in (i + 1)..n {
                    let d2: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum();
                    let ld = 0.5 * d2.ln();
                    all.push(ld);
                    if i % 2 == 0 && j % 2 == 0 {
                        even.push(ld);
                    }
                }
            }
            (all, even)
        })
        .collect();
    let mut all = Vec::new();
    let mut even = Vec::new();
    for (a, e) in blocks {
        all.extend(a);
        even.extend(e);
    }
    if all.iter().any(|v| !v.is_finite()) {
        return Err(EstimatorError::DegenerateSample("duplicate points in the subsample".into()));
    }
    Ok((all, even))
}

/// `Σ_{i≠j} ‖Z_i − Z_j‖^{−γ}` from log-distances of unordered pairs.
fn pair_energy(log_d: &[f64], gamma: f64) -> f64 {
    2.0 * log_d
        .par_chunks(1 << 14)
        .map(|c| c.iter().map(|l| (-gamma * l).exp()).sum::<f64>())
        .sum::<f64>()
}

fn log_ratio(all: &[f64], even: &[f64], gamma: f64, m: usize) -> f64 {
    let big = (2 * m) as f64;
    let small = m as f64;
    let i_big = pair_energy(all, gamma) / (big * big);
    let i_small = pair_energy(even, gamma) / (small * small);
    (i_big / i_small).ln()
}

/// Energy log-ratio `log(I_γ(2m)/I_γ(m))` at a single γ.
pub fn energy_log_ratio(path: &LevyPath, set: &BorelSetSpec, gamma: f64, m: usize, phase: f64) -> Result<f64, EstimatorError> {
    check_size(m)?;
    let pts = sample_points(path, set, m, phase)?;
    let (all, even) = log_distances(&pts)?;
    Ok(log_ratio(&all, &even, gamma, m))
}

fn check_size(m: usize) -> Result<(), EstimatorError> {
    if m < MIN_SAMPLE {
        return Err(EstimatorError::DegenerateSample(format!(
            "subsample of {m} points, need at least {MIN_SAMPLE}"
        )));
    }
    Ok(())
}

/// Capacity-dimension estimate: the largest γ on the (ascending) grid for
/// which the empirical γ-energy is stable under doubling of the subsample.
pub fn energy_dimension(
    path: &LevyPath,
    set: &BorelSetSpec,
    gammas: &[f64],
    m: usize,
    phase: f64,
) -> Result<EnergyEstimate, EstimatorError> {
    check_size(m)?;
    let pts = sample_points(path, set, m, phase.clamp(0.0, 1.0 - 1e-12))?;
    let (all, even) = log_distances(&pts)?;
    let mut grid = gammas.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut evaluated = Vec::new();
    let mut ratios = Vec::new();
    let mut estimate = 0.0;
    let mut diverged_at = None;
    for g in grid {
        let r = log_ratio(&all, &even, g, m);
        evaluated.push(g);
        ratios.push(r);
        if r >= DIVERGENCE_THRESHOLD {
            diverged_at = Some(g);
            break;
        }
        estimate = g;
    }
    Ok(EnergyEstimate {
        gammas: evaluated,
        log_ratios: ratios,
        estimate,
        diverged_at,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: u32) -> LevyPath {
        LevyPath {
            n,
            d: 1,
            seed: 0,
            stream: "line".into(),
            values: vec![0.0; (1 << n) + 1],
        }
    }

    #[test]
    fn line_has_capacity_one() {
        let est = energy_dimension(&line(16), &BorelSetSpec::unit_interval(), &default_gamma_grid(), 1024, 0.3).unwrap();
        assert!(est.estimate >= 0.9 && est.estimate <= 1.05, "{est:?}");
    }

    #[test]
    fn above_ambient_dimension_diverges() {
        let r = energy_log_ratio(&line(16), &BorelSetSpec::unit_interval(), 2.5, 1024, 0.3).unwrap();
        assert!(r >= DIVERGENCE_THRESHOLD, "{r}");
    }

    #[test]
    fn degenerate_samples_rejected() {
        let coarse = line(10);
        assert!(matches!(
            energy_dimension(&coarse, &BorelSetSpec::unit_interval(), &default_gamma_grid(), 1024, 0.5),
            Err(EstimatorError::DegenerateSample(_))
        ));
        assert!(energy_dimension(&line(16), &BorelSetSpec::unit_interval(), &[1.0], 10, 0.5).is_err());
    }
}
