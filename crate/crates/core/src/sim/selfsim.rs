use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ProcessModel, SimError};
use crate::rng;
use crate::stats::ks_two_sample;

pub const MIN_ENSEMBLE: usize = 10_000;

/// Per-coordinate KS comparison of `X(ct)` against `c^E X(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistics: Vec<f64>,
    /// `1.5 × 1.36 √(2/n)`: the 5% critical value with slack for
    /// truncation bias.
    pub threshold: f64,
    pub n: usize,
    pub passed: bool,
}

/// Compares the law of `X(ct)` (samples `at_ct`) with that of `c^E X(t)`
/// (the operator applied to samples `at_t`) coordinate by coordinate.
pub fn semiselfsimilarity_test(
    at_t: &[Vec<f64>],
    at_ct: &[Vec<f64>],
    operator: &DMatrix<f64>,
) -> Result<KsReport, SimError> {
    let n = at_t.len().min(at_ct.len());
    if n < MIN_ENSEMBLE {
        return Err(SimError::EnsembleTooSmall {
            got: n,
            need: MIN_ENSEMBLE,
        });
    }
    let d = operator.nrows();
    for x in at_t.iter().chain(at_ct) {
        if x.len() != d {
            return Err(SimError::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
    }
    let scaled: Vec<Vec<f64>> = at_t
        .iter()
        .map(|x| (0..d).map(|i| (0..d).map(|k| operator[(i, k)] * x[k]).sum()).collect())
        .collect();
    let statistics: Vec<f64> = (0..d)
        .map(|i| {
            let a: Vec<f64> = scaled.iter().map(|x| x[i]).collect();
            let b: Vec<f64> = at_ct.iter().map(|x| x[i]).collect();
            ks_two_sample(&a, &b)
        })
        .collect();
    let threshold = 1.5 * 1.36 * (2.0 / n as f64).sqrt();
    let passed = statistics.iter().all(|s| *s < threshold);
    Ok(KsReport {
        statistics,
        threshold,
        n,
        passed,
    })
}

impl ProcessModel {
    /// Draws `n` samples of `X(t)` and of `X(ct)` from independent streams
    /// and tests them against `operator` (normally `c^E`).
    pub fn semiselfsimilarity(
        &self,
        t: f64,
        n: usize,
        seed: u64,
        operator: &DMatrix<f64>,
    ) -> Result<KsReport, SimError> {
        if n < MIN_ENSEMBLE {
            return Err(SimError::EnsembleTooSmall {
                got: n,
                need: MIN_ENSEMBLE,
            });
        }
        let c = self.spec().c();
        let at_t = self.sample_marginals(t, n, &mut rng::stream(seed, "selfsim/t"))?;
        let at_ct = self.sample_marginals(c * t, n, &mut rng::stream(seed, "selfsim/ct"))?;
        semiselfsimilarity_test(&at_t, &at_ct, operator)
    }
}
