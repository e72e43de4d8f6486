use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::semistable::SemistableSampler;
use super::stable::{cms_unchecked, isotropic_2d_unchecked};
use super::{BlockLaw, LevyPath, SimError};
use crate::linalg;
use crate::rng;
use crate::spectral::{decompose, scaling_operator, ExponentSpec, SpectralBlock, SpectralDecomposition};

/// Largest supported grid depth (2^30 + 1 points per path).
pub const MAX_DEPTH: u32 = 30;

/// Law of one block, independent of the time step.
#[derive(Debug, Clone)]
enum BlockKind {
    Stable { alpha: f64 },
    /// Brownian block with covariance `factor · factorᵀ` per unit time.
    Gaussian { factor: DMatrix<f64> },
    Isotropic { alpha: f64, frame: DMatrix<f64> },
    Semistable { alpha: f64, c: f64, k_min: i32 },
}

/// Block-coordinate sampler for one fixed time step.
#[derive(Debug, Clone)]
pub enum BlockSampler {
    Stable { alpha: f64, scale: f64 },
    Gaussian { factor: DMatrix<f64> },
    Isotropic { alpha: f64, frame: [[f64; 2]; 2] },
    Semistable(SemistableSampler),
}

/// An operator semistable Lévy process: exponent, spectral blocks and one
/// law per block. Blocks are simulated independently in block coordinates
/// and mapped to `R^d` by the change of basis.
#[derive(Debug, Clone)]
pub struct ProcessModel {
    spec: ExponentSpec,
    decomposition: SpectralDecomposition,
    laws: Vec<BlockLaw>,
    kinds: Vec<BlockKind>,
}

/// Empirical fullness check: smallest eigenvalue of the spatial-sign
/// covariance of `X(1)`. Its eigenvalues sum to 1, so a full law in `R^d`
/// has every eigenvalue of order `1/d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullnessReport {
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub full: bool,
    pub samples: usize,
}

fn is_scalar(e: &DMatrix<f64>, a: f64) -> bool {
    let n = e.nrows();
    linalg::max_abs(&(e - DMatrix::identity(n, n) * a)) <= 1e-9 * (1.0 + a.abs())
}

/// `∫_0^1 s^E Q s^{Eᵀ} ds` with `Q = 4I`, so that `E = I/2` gives `2I`.
pub(crate) fn gaussian_block_covariance(e: &DMatrix<f64>) -> DMatrix<f64> {
    // s = e^{−u}: ∫_0^∞ e^{−u} e^{−uE} Q e^{−uEᵀ} du, composite Simpson.
    let n = e.nrows();
    let (upper, panels) = (60.0, 6000usize);
    let h = upper / panels as f64;
    let step = (e * -h).exp();
    let mut prop = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for i in 0..=panels {
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let u = i as f64 * h;
        acc += &prop * prop.transpose() * (4.0 * w * (-u).exp());
        prop = &step * prop;
    }
    acc * (h / 3.0)
}

/// Real frame `M` with `E M = M (aI + bK)`, `K` skew, for a 2×2 block with
/// eigenvalues `a ± ib`, normalised to `|det M| = 1`.
fn rotation_frame(e: &DMatrix<f64>, a: f64) -> Option<DMatrix<f64>> {
    if is_scalar(e, a) {
        return Some(DMatrix::identity(2, 2));
    }
    let (p, q, r, s) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let disc = ((p - s) / 2.0).powi(2) + q * r;
    if disc >= 0.0 {
        return None;
    }
    let b = (-disc).sqrt();
    let mid = (p + s) / 2.0;
    // Eigenvector for mid + ib.
    let (re, im) = if q.abs() >= r.abs() {
        ([q, mid - p], [0.0, b])
    } else {
        ([mid - s, r], [b, 0.0])
    };
    let m = DMatrix::from_row_slice(2, 2, &[re[0], im[0], re[1], im[1]]);
    let det = m.determinant().abs();
    Some(m / det.sqrt())
}

impl ProcessModel {
    pub fn new(spec: ExponentSpec, laws: Vec<BlockLaw>) -> Result<Self, SimError> {
        let decomposition = decompose(&spec)?;
        if laws.len() != decomposition.p() {
            return Err(SimError::LawCountMismatch {
                blocks: decomposition.p(),
                laws: laws.len(),
            });
        }
        let mut kinds = Vec::with_capacity(laws.len());
        for (j, (block, law)) in decomposition.blocks.iter().zip(&laws).enumerate() {
            kinds.push(Self::block_kind(j, block, law, spec.c())?);
        }
        Ok(Self {
            spec,
            decomposition,
            laws,
            kinds,
        })
    }

    /// Stable laws on every block, isotropic on rotation blocks.
    pub fn stable(spec: ExponentSpec) -> Result<Self, SimError> {
        let dec = decompose(&spec)?;
        let laws = dec
            .blocks
            .iter()
            .map(|b| {
                let rotation = b.dim == 2 && b.eigenvalues.iter().any(|z| z.im.abs() > 1e-9);
                if rotation {
                    BlockLaw::StableIsotropic2d { alpha: b.alpha }
                } else {
                    BlockLaw::StableSymmetric { alpha: b.alpha }
                }
            })
            .collect();
        Self::new(spec, laws)
    }

    fn block_kind(j: usize, block: &SpectralBlock, law: &BlockLaw, c: f64) -> Result<BlockKind, SimError> {
        let alpha = law.alpha();
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(SimError::AlphaOutOfRange(alpha));
        }
        if (alpha - block.alpha).abs() > 1e-9 {
            return Err(SimError::BlockLawMismatch {
                block: j,
                block_alpha: block.alpha,
                law_alpha: alpha,
            });
        }
        let unsupported = |reason: &str| SimError::UnsupportedBlock {
            block: j,
            reason: reason.to_string(),
        };
        let scalar = is_scalar(&block.exponent, block.a);
        match law {
            BlockLaw::StableSymmetric { .. } => {
                if block.dim == 1 || scalar {
                    if alpha == 2.0 && block.dim > 1 {
                        Ok(BlockKind::Gaussian {
                            factor: DMatrix::identity(block.dim, block.dim) * 2f64.sqrt(),
                        })
                    } else {
                        Ok(BlockKind::Stable { alpha })
                    }
                } else if alpha == 2.0 {
                    let cov = gaussian_block_covariance(&block.exponent);
                    Ok(BlockKind::Gaussian {
                        factor: linalg::psd_factor(&cov),
                    })
                } else {
                    Err(unsupported(
                        "non-Gaussian stable laws on non-scalar blocks need stable_isotropic2d",
                    ))
                }
            }
            BlockLaw::StableIsotropic2d { .. } => {
                if block.dim != 2 {
                    return Err(unsupported("isotropic law needs a two-dimensional block"));
                }
                let frame = rotation_frame(&block.exponent, block.a)
                    .ok_or_else(|| unsupported("isotropic law needs a scalar or rotation block"))?;
                Ok(BlockKind::Isotropic { alpha, frame })
            }
            BlockLaw::SemistableDiscrete { c: law_c, k_min, .. } => {
                if (law_c - c).abs() > 1e-12 * c {
                    return Err(SimError::ScalingConstantMismatch {
                        law: *law_c,
                        exponent: c,
                    });
                }
                if !(block.dim == 1 || scalar) {
                    return Err(unsupported("semistable law needs a scalar block"));
                }
                if alpha >= 2.0 {
                    return Err(SimError::AlphaOutOfRange(alpha));
                }
                Ok(BlockKind::Semistable {
                    alpha,
                    c: *law_c,
                    k_min: *k_min,
                })
            }
        }
    }

    pub fn spec(&self) -> &ExponentSpec {
        &self.spec
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn laws(&self) -> &[BlockLaw] {
        &self.laws
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Samplers for increments of length `dt`, one per block.
    pub fn samplers(&self, dt: f64) -> Result<Vec<BlockSampler>, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidDt(dt));
        }
        self.kinds
            .iter()
            .map(|k| {
                Ok(match k {
                    BlockKind::Stable { alpha } => BlockSampler::Stable {
                        alpha: *alpha,
                        scale: dt.powf(1.0 / alpha),
                    },
                    BlockKind::Gaussian { factor } => BlockSampler::Gaussian {
                        factor: factor * dt.sqrt(),
                    },
                    BlockKind::Isotropic { alpha, frame } => {
                        let m = frame * dt.powf(1.0 / alpha);
                        BlockSampler::Isotropic {
                            alpha: *alpha,
                            frame: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
                        }
                    }
                    BlockKind::Semistable { alpha, c, k_min } => {
                        BlockSampler::Semistable(SemistableSampler::new(*alpha, *c, dt, *k_min)?)
                    }
                })
            })
            .collect()
    }

    /// Draws one increment into `out` (length `d`), using `block` as scratch.
    fn draw<R: Rng + ?Sized>(&self, samplers: &[BlockSampler], rng: &mut R, block: &mut [f64], out: &mut [f64]) {
        let mut off = 0;
        for (s, b) in samplers.iter().zip(&self.decomposition.blocks) {
            let y = &mut block[off..off + b.dim];
            match s {
                BlockSampler::Stable { alpha, scale } => {
                    for v in y.iter_mut() {
                        *v = scale * cms_unchecked(*alpha, rng);
                    }
                }
                BlockSampler::Gaussian { factor } => {
                    let g: Vec<f64> = (0..b.dim).map(|_| StandardNormal.sample(rng)).collect();
                    for (r, v) in y.iter_mut().enumerate() {
                        *v = (0..b.dim).map(|k| factor[(r, k)] * g[k]).sum();
                    }
                }
                BlockSampler::Isotropic { alpha, frame } => {
                    let z = isotropic_2d_unchecked(*alpha, rng);
                    y[0] = frame[0][0] * z[0] + frame[0][1] * z[1];
                    y[1] = frame[1][0] * z[0] + frame[1][1] * z[1];
                }
                BlockSampler::Semistable(sampler) => {
                    for v in y.iter_mut() {
                        *v = sampler.sample(rng);
                    }
                }
            }
            off += b.dim;
        }
        let c = &self.decomposition.change_of_basis;
        let d = out.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..d).map(|k| c[(i, k)] * block[k]).sum();
        }
    }

    /// Path on `t_k = k 2^{−n}` for `k = 0..=steps`, drawn from `rng`.
    pub fn simulate_steps<R: Rng + ?Sized>(&self, n: u32, steps: usize, rng: &mut R) -> Result<Vec<f64>, SimError> {
        if n > MAX_DEPTH {
            return Err(SimError::GridTooDeep(n));
        }
        let d = self.dim();
        let dt = (-(n as f64)).exp2();
        let samplers = self.samplers(dt)?;
        let mut values = vec![0.0; (steps + 1) * d];
        let mut block = vec![0.0; d];
        let mut inc = vec![0.0; d];
        for k in 1..=steps {
            self.draw(&samplers, rng, &mut block, &mut inc);
            let (prev, cur) = values.split_at_mut(k * d);
            let prev = &prev[(k - 1) * d..];
            for i in 0..d {
                cur[i] = prev[i] + inc[i];
            }
        }
        Ok(values)
    }

    /// Full path on `[0, 1]` with `2^n + 1` points from the named stream.
    pub fn simulate(&self, n: u32, seed: u64, stream: &str) -> Result<LevyPath, SimError> {
        if n > MAX_DEPTH {
            return Err(SimError::GridTooDeep(n));
        }
        self.simulate_prefix(n, 1usize << n, seed, stream)
    }

    /// Path restricted to the first `steps` grid steps.
    pub fn simulate_prefix(&self, n: u32, steps: usize, seed: u64, stream: &str) -> Result<LevyPath, SimError> {
        let mut r = rng::stream(seed, stream);
        let values = self.simulate_steps(n, steps, &mut r)?;
        Ok(LevyPath {
            n,
            d: self.dim(),
            seed,
            stream: stream.to_string(),
            values,
        })
    }

    /// Independent draws of `X(t)`, each as a single increment of length `t`.
    pub fn sample_marginals<R: Rng + ?Sized>(&self, t: f64, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>, SimError> {
        let samplers = self.samplers(t)?;
        let d = self.dim();
        let mut block = vec![0.0; d];
        Ok((0..count)
            .map(|_| {
                let mut out = vec![0.0; d];
                self.draw(&samplers, rng, &mut block, &mut out);
                out
            })
            .collect())
    }

    /// `c^E`, the operator the law of `X(ct)` should match.
    pub fn scaling_matrix(&self, c: f64) -> DMatrix<f64> {
        scaling_operator(self.spec.matrix(), c).expect("c > 1")
    }

    pub fn fullness(&self, samples: usize, seed: u64) -> Result<FullnessReport, SimError> {
        let d = self.dim();
        let mut r = rng::stream(seed, "fullness");
        let xs = self.sample_marginals(1.0, samples, &mut r)?;
        Ok(spatial_sign_fullness(&xs, d))
    }
}

/// Fullness report from samples of `X(1)`.
pub fn spatial_sign_fullness(xs: &[Vec<f64>], d: usize) -> FullnessReport {
    let mut s = DMatrix::<f64>::zeros(d, d);
    let mut used = 0usize;
    for x in xs {
        let norm2 = x.iter().map(|v| v * v).sum::<f64>();
        if norm2 > 0.0 && norm2.is_finite() {
            for i in 0..d {
                for j in 0..d {
                    s[(i, j)] += x[i] * x[j] / norm2;
                }
            }
            used += 1;
        }
    }
    s /= used.max(1) as f64;
    let min = SymmetricEigen::new(s).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = 0.01 / d as f64;
    FullnessReport {
        min_eigenvalue: min,
        threshold,
        full: min > threshold,
        samples: used,
    }
}
