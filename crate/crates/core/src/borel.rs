//! Analytic time sets `B ⊆ [0, 1]` with exactly known Hausdorff dimension.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BorelError {
    #[error("InvalidSet: {0}")]
    InvalidSet(String),
}

/// Intervals, self-similar Cantor sets and finite unions thereof.
///
/// A Cantor set with `m` pieces of ratio `r` keeps `m` equally spaced
/// subintervals of length `r`, the first flush with 0 and the last with 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BorelSetSpec {
    Interval { a: f64, b: f64 },
    Cantor { m: u32, r: f64 },
    Union { parts: Vec<BorelSetSpec> },
}

impl BorelSetSpec {
    pub fn unit_interval() -> Self {
        Self::Interval { a: 0.0, b: 1.0 }
    }

    pub fn middle_third() -> Self {
        Self::Cantor { m: 2, r: 1.0 / 3.0 }
    }

    pub fn validate(&self) -> Result<(), BorelError> {
        let bad = |m: String| Err(BorelError::InvalidSet(m));
        match self {
            Self::Interval { a, b } => {
                if !(0.0 <= *a && a < b && *b <= 1.0) {
                    return bad(format!("interval [{a}, {b}] must satisfy 0 <= a < b <= 1"));
                }
            }
            Self::Cantor { m, r } => {
                if *m < 2 || !(*r > 0.0) || *m as f64 * r >= 1.0 {
                    return bad(format!("cantor set needs m >= 2, r > 0, m*r < 1 (m={m}, r={r})"));
                }
            }
            Self::Union { parts } => {
                if parts.is_empty() {
                    return bad("union must have at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Exact Hausdorff dimension.
    pub fn hausdorff_dim(&self) -> f64 {
        match self {
            Self::Interval { .. } => 1.0,
            Self::Cantor { m, r } => (*m as f64).ln() / (1.0 / r).ln(),
            Self::Union { parts } => parts.iter().map(|p| p.hausdorff_dim()).fold(0.0, f64::max),
        }
    }

    /// Ratio of the self-similar construction (1 for intervals).
    fn finest_ratio(&self) -> f64 {
        match self {
            Self::Interval { .. } => 1.0,
            Self::Cantor { r, .. } => *r,
            Self::Union { parts } => parts.iter().map(|p| p.finest_ratio()).fold(1.0, f64::min),
        }
    }

    /// Construction depth needed so that level pieces are at most `scale / 4`.
    pub fn level_for_scale(&self, scale: f64) -> u32 {
        let r = self.finest_ratio();
        if r >= 1.0 {
            return 0;
        }
        ((scale / 4.0).ln() / r.ln() - 1e-9).ceil().max(0.0) as u32
    }

    /// Membership in the level-`level` approximation (closed intervals).
    pub fn contains_at_level(&self, t: f64, level: u32) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            Self::Interval { a, b } => t >= *a - EPS && t <= *b + EPS,
            Self::Cantor { m, r } => {
                if !(-EPS..=1.0 + EPS).contains(&t) {
                    return false;
                }
                let gap = (1.0 - *m as f64 * r) / (*m as f64 - 1.0);
                let mut u = t.clamp(0.0, 1.0);
                let mut tol = EPS;
                for _ in 0..level {
                    // Snap to the next piece when u sits within rounding of its start.
                    let idx = (((u + tol) / (r + gap)).floor() as i64).clamp(0, *m as i64 - 1);
                    let off = u - idx as f64 * (r + gap);
                    if off > r + tol {
                        return false;
                    }
                    u = (off.max(0.0) / r).clamp(0.0, 1.0);
                    tol /= r;
                }
                true
            }
            Self::Union { parts } => parts.iter().any(|p| p.contains_at_level(t, level)),
        }
    }

    /// Closed component intervals of the level-`level` approximation.
    pub fn components(&self, level: u32) -> Vec<(f64, f64)> {
        match self {
            Self::Interval { a, b } => vec![(*a, *b)],
            Self::Cantor { m, r } => {
                let gap = (1.0 - *m as f64 * r) / (*m as f64 - 1.0);
                let mut out = vec![(0.0, 1.0)];
                for _ in 0..level {
                    let mut next = Vec::with_capacity(out.len() * *m as usize);
                    for (lo, hi) in out {
                        let len = hi - lo;
                        for k in 0..*m {
                            let s = lo + k as f64 * (r + gap) * len;
                            next.push((s, s + r * len));
                        }
                    }
                    out = next;
                }
                out
            }
            Self::Union { parts } => {
                let mut v: Vec<_> = parts.iter().flat_map(|p| p.components(level)).collect();
                v.sort_by(|x, y| x.0.total_cmp(&y.0));
                v
            }
        }
    }

    /// Quantile function of the natural probability measure on `B`:
    /// Lebesgue on intervals, equal mass per branch on Cantor sets, and on a
    /// union the parts of maximal dimension weighted by length (intervals)
    /// or equally (Cantor sets).
    pub fn natural_quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Self::Interval { a, b } => a + u * (b - a),
            Self::Cantor { m, r } => {
                let gap = (1.0 - *m as f64 * r) / (*m as f64 - 1.0);
                let (mut lo, mut len, mut v) = (0.0, 1.0, u);
                for _ in 0..64 {
                    let idx = ((v * *m as f64).floor() as u32).min(*m - 1);
                    v = v * *m as f64 - idx as f64;
                    lo += idx as f64 * (r + gap) * len;
                    len *= r;
                    if len < 1e-17 {
                        break;
                    }
                }
                lo
            }
            Self::Union { parts } => {
                let top = self.hausdorff_dim();
                let weighted: Vec<(&BorelSetSpec, f64)> = parts
                    .iter()
                    .filter(|p| (p.hausdorff_dim() - top).abs() < 1e-12)
                    .map(|p| {
                        let w = match p {
                            Self::Interval { a, b } => b - a,
                            _ => 1.0,
                        };
                        (p, w)
                    })
                    .collect();
                let total: f64 = weighted.iter().map(|x| x.1).sum();
                let mut acc = 0.0;
                for (i, (p, w)) in weighted.iter().enumerate() {
                    let share = w / total;
                    if u <= acc + share || i + 1 == weighted.len() {
                        return p.natural_quantile(((u - acc) / share).clamp(0.0, 1.0));
                    }
                    acc += share;
                }
                unreachable!("union has at least one part")
            }
        }
    }
}
