//! Sampling of stable and semistable laws and of operator semistable Lévy
//! paths on dyadic grids.

mod path;
mod process;
mod selfsim;
pub mod semistable;
pub mod stable;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::SpectralError;

pub use path::LevyPath;
pub use process::{BlockSampler, FullnessReport, ProcessModel};
pub use selfsim::{semiselfsimilarity_test, KsReport, MIN_ENSEMBLE};
pub use semistable::{sample_semistable_increment, SemistableSampler, DEFAULT_K_MIN};
pub use stable::{sample_isotropic_2d, sample_stable_increment};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("AlphaOutOfRange: alpha = {0}")]
    AlphaOutOfRange(f64),
    #[error("InvalidScale: scale = {0} must be positive")]
    InvalidScale(f64),
    #[error("InvalidDt: dt = {0} must be positive")]
    InvalidDt(f64),
    #[error("InvalidScalingConstant: c = {0} must exceed 1")]
    InvalidScalingConstant(f64),
    #[error(
        "TruncationTooCoarse: compensated std {compensated_std:e} exceeds half the increment scale {increment_scale:e}; lower k_min below {k_min}"
    )]
    TruncationTooCoarse {
        compensated_std: f64,
        increment_scale: f64,
        k_min: i32,
    },
    #[error("BlockLawMismatch: block {block} has alpha {block_alpha}, law has {law_alpha}")]
    BlockLawMismatch {
        block: usize,
        block_alpha: f64,
        law_alpha: f64,
    },
    #[error("LawCountMismatch: {blocks} spectral blocks but {laws} laws")]
    LawCountMismatch { blocks: usize, laws: usize },
    #[error("ScalingConstantMismatch: law uses c = {law}, exponent uses c = {exponent}")]
    ScalingConstantMismatch { law: f64, exponent: f64 },
    #[error("UnsupportedBlock: block {block}: {reason}")]
    UnsupportedBlock { block: usize, reason: String },
    #[error("GridTooDeep: n = {0} exceeds 30")]
    GridTooDeep(u32),
    #[error("EnsembleTooSmall: {got} samples, need at least {need}")]
    EnsembleTooSmall { got: usize, need: usize },
    #[error("DimensionMismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Spectral(#[from] SpectralError),
}

impl SimError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::AlphaOutOfRange(_) => "AlphaOutOfRange",
            Self::InvalidScale(_) => "InvalidScale",
            Self::InvalidDt(_) => "InvalidDt",
            Self::InvalidScalingConstant(_) => "InvalidScalingConstant",
            Self::TruncationTooCoarse { .. } => "TruncationTooCoarse",
            Self::BlockLawMismatch { .. } => "BlockLawMismatch",
            Self::LawCountMismatch { .. } => "LawCountMismatch",
            Self::ScalingConstantMismatch { .. } => "ScalingConstantMismatch",
            Self::UnsupportedBlock { .. } => "UnsupportedBlock",
            Self::GridTooDeep(_) => "GridTooDeep",
            Self::EnsembleTooSmall { .. } => "EnsembleTooSmall",
            Self::DimensionMismatch { .. } => "DimensionMismatch",
            Self::Spectral(e) => e.name(),
        }
    }
}

fn default_k_min() -> i32 {
    DEFAULT_K_MIN
}

/// Marginal law attached to one spectral block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockLaw {
    /// Independent symmetric α-stable coordinates (or, for α = 2 on a
    /// non-scalar block, a Gaussian with quadrature covariance).
    StableSymmetric { alpha: f64 },
    /// Rotation-invariant α-stable law on a two-dimensional block.
    StableIsotropic2d { alpha: f64 },
    /// Geometric-atom semistable law with scaling constant `c`.
    SemistableDiscrete {
        alpha: f64,
        c: f64,
        #[serde(default = "default_k_min")]
        k_min: i32,
    },
}

impl BlockLaw {
    pub fn alpha(&self) -> f64 {
        match self {
            Self::StableSymmetric { alpha }
            | Self::StableIsotropic2d { alpha }
            | Self::SemistableDiscrete { alpha, .. } => *alpha,
        }
    }

    pub fn semistable(alpha: f64, c: f64) -> Self {
        Self::SemistableDiscrete {
            alpha,
            c,
            k_min: DEFAULT_K_MIN,
        }
    }
}
