//! Exact samplers for symmetric stable laws.
//!
//! Convention: a standard symmetric α-stable variate has characteristic
//! function `exp(−|u|^α)`, so α = 2 is Gaussian with variance 2.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::SimError;

fn check_alpha(alpha: f64) -> Result<(), SimError> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(SimError::AlphaOutOfRange(alpha))
    }
}

/// Chambers–Mallows–Stuck variate without argument checks.
#[inline]
pub(crate) fn cms_unchecked<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return z * std::f64::consts::SQRT_2;
    }
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// One symmetric α-stable variate with the given scale.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    alpha: f64,
    scale: f64,
    rng: &mut R,
) -> Result<f64, SimError> {
    check_alpha(alpha)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(SimError::InvalidScale(scale));
    }
    Ok(scale * cms_unchecked(alpha, rng))
}

/// Positive ρ-stable variate with Laplace transform `exp(−λ^ρ)`, ρ ∈ (0, 1),
/// by Kanter's representation.
#[inline]
pub(crate) fn positive_stable<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    // U ∈ (0, π): avoid the endpoints where sin vanishes.
    let u = PI * (1.0 - rng.random::<f64>()).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    let w: f64 = Exp1.sample(rng);
    (rho * u).sin() / u.sin().powf(1.0 / rho) * (((1.0 - rho) * u).sin() / w).powf((1.0 - rho) / rho)
}

/// Rotation-invariant α-stable vector in the plane with characteristic
/// function `exp(−‖u‖^α)`, as a Gaussian scale mixture `sqrt(2A)·G`.
pub fn sample_isotropic_2d<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<[f64; 2], SimError> {
    check_alpha(alpha)?;
    Ok(isotropic_2d_unchecked(alpha, rng))
}

#[inline]
pub(crate) fn isotropic_2d_unchecked<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> [f64; 2] {
    let g0: f64 = StandardNormal.sample(rng);
    let g1: f64 = StandardNormal.sample(rng);
    let mix = if alpha == 2.0 {
        2.0
    } else {
        2.0 * positive_stable(alpha / 2.0, rng)
    };
    let r = mix.sqrt();
    [r * g0, r * g1]
}
