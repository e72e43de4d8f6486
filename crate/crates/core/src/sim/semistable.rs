//! Symmetric semistable laws with a geometric jump spectrum.
//!
//! The Lévy measure puts mass `c^{−k}/2` on each of `±c^{k/α}`, `k ∈ ℤ`.
//! Pushing it forward by `x ↦ c^{1/α} x` multiplies it by `c`, so the process
//! satisfies `X(ct) =_d c^{1/α} X(t)` exactly, but only along powers of `c`.
//!
//! An increment over `dt` is assembled from three independent parts:
//!
//! * sparse atoms `k ≥ K` (with `dt·c^{−K} ≤ 1`) as one compound Poisson
//!   sum whose atom index is `K + Geometric(1 − 1/c)`;
//! * dense atoms `k_min ≤ k < K`, each a difference of two Poisson counts;
//! * a centred Gaussian carrying the second moment of all atoms `k < k_min`.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::SimError;

pub const DEFAULT_K_MIN: i32 = -25;

// Above this mean the signed count N+ − N− is drawn from its normal limit.
const POISSON_NORMAL_CUTOFF: f64 = 1e12;

#[derive(Debug, Clone)]
enum AtomCounts {
    /// Two independent Poisson(dt c^{−k} / 2) counts.
    Exact(Poisson<f64>),
    /// Normal approximation with the standard deviation of N+ − N−.
    Normal(f64),
}

/// Precomputed sampler for increments of one fixed length `dt`.
#[derive(Debug, Clone)]
pub struct SemistableSampler {
    alpha: f64,
    c: f64,
    dt: f64,
    k_sparse: i32,
    sparse: Option<Poisson<f64>>,
    /// `(amplitude c^{k/α}, counts)` for dense atoms.
    dense: Vec<(f64, AtomCounts)>,
    gauss_std: f64,
}

impl SemistableSampler {
    pub fn new(alpha: f64, c: f64, dt: f64, k_min: i32) -> Result<Self, SimError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(SimError::AlphaOutOfRange(alpha));
        }
        if !(c > 1.0 && c.is_finite()) {
            return Err(SimError::InvalidScalingConstant(c));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidDt(dt));
        }
        let lc = c.ln();
        let k_sparse = ((dt.ln() / lc).ceil() as i32).max(k_min);
        let rate = dt * c.powi(-k_sparse) / (1.0 - 1.0 / c);
        let sparse = (rate > 0.0).then(|| Poisson::new(rate).expect("finite positive rate"));
        // Descending k: large atoms first.
        let dense = (k_min..k_sparse)
            .rev()
            .map(|k| {
                let mean = dt * c.powi(-k) / 2.0;
                let counts = if mean > POISSON_NORMAL_CUTOFF {
                    AtomCounts::Normal((2.0 * mean).sqrt())
                } else {
                    AtomCounts::Exact(Poisson::new(mean).expect("finite positive mean"))
                };
                ((k as f64 * lc / alpha).exp(), counts)
            })
            .collect();
        let q = c.powf(2.0 / alpha - 1.0);
        let gauss_std = (dt * q.powi(k_min) / (q - 1.0)).sqrt();
        // The Gaussian stand-in must stay small against the typical increment.
        if gauss_std > 0.5 * dt.powf(1.0 / alpha) {
            return Err(SimError::TruncationTooCoarse {
                compensated_std: gauss_std,
                increment_scale: dt.powf(1.0 / alpha),
                k_min,
            });
        }
        Ok(Self {
            alpha,
            c,
            dt,
            k_sparse,
            sparse,
            dense,
            gauss_std,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn compensated_std(&self) -> f64 {
        self.gauss_std
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lc = self.c.ln();
        let mut x = 0.0;
        if let Some(p) = &self.sparse {
            let count = p.sample(rng) as u64;
            let ln_q = (1.0 / self.c).ln();
            for _ in 0..count {
                // P(j) = (1 − 1/c) c^{−j}, j ≥ 0, by inversion.
                let u: f64 = 1.0 - rng.random::<f64>();
                let j = (u.ln() / ln_q).floor();
                let k = self.k_sparse as f64 + j;
                let amp = (k * lc / self.alpha).exp();
                x += if rng.random::<bool>() { amp } else { -amp };
            }
        }
        for (amp, counts) in &self.dense {
            let diff = match counts {
                AtomCounts::Exact(p) => p.sample(rng) - p.sample(rng),
                AtomCounts::Normal(sd) => {
                    let z: f64 = StandardNormal.sample(rng);
                    sd * z
                }
            };
            x += diff * amp;
        }
        let z: f64 = StandardNormal.sample(rng);
        x + self.gauss_std * z
    }
}

/// One increment over `dt`; builds the sampler on every call, so prefer
/// [`SemistableSampler`] in loops.
pub fn sample_semistable_increment<R: Rng + ?Sized>(
    alpha: f64,
    c: f64,
    dt: f64,
    k_min: i32,
    rng: &mut R,
) -> Result<f64, SimError> {
    Ok(SemistableSampler::new(alpha, c, dt, k_min)?.sample(rng))
}
