//! Closed-form Hausdorff dimensions of the graph `{(t, X(t)) : t ∈ B}` and of
//! the range `X(B)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DimensionError {
    #[error("InvalidInputs: {0}")]
    InvalidInputs(String),
}

/// Which side of the critical value `α_1 s = d_1` the formula falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formula {
    GraphMulti,
    Graph1d,
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionInputs {
    pub alpha1: f64,
    /// `None` for a single spectral block; treated as `α_2 = α_1`.
    pub alpha2: Option<f64>,
    pub d1: usize,
    /// Hausdorff dimension of the time set.
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub value: f64,
    pub branch: Branch,
    pub formula: Formula,
}

impl DimensionInputs {
    pub fn new(alpha1: f64, alpha2: Option<f64>, d1: usize, s: f64) -> Self {
        Self { alpha1, alpha2, d1, s }
    }

    fn validate(&self) -> Result<(f64, f64), DimensionError> {
        let bad = |m: String| Err(DimensionError::InvalidInputs(m));
        if !(self.alpha1 > 0.0 && self.alpha1 <= 2.0) {
            return bad(format!("alpha1 = {} not in (0, 2]", self.alpha1));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return bad(format!("s = {} not in [0, 1]", self.s));
        }
        if self.d1 == 0 {
            return bad("d1 must be at least 1".into());
        }
        let alpha2 = match self.alpha2 {
            None => self.alpha1,
            Some(a2) if a2 > 0.0 && a2 < self.alpha1 => a2,
            // α_2 = α_1 is the documented stand-in for p = 1.
            Some(a2) if a2 == self.alpha1 => a2,
            Some(a2) => return bad(format!("alpha2 = {a2} not in (0, alpha1)")),
        };
        Ok((self.alpha1, alpha2))
    }

    fn branch(&self) -> Branch {
        if self.alpha1 * self.s <= self.d1 as f64 {
            Branch::Slow
        } else {
            Branch::Fast
        }
    }
}

/// Graph dimension for `d ≥ 2`:
/// `s·max(α_1, 1)` if `α_1 s ≤ d_1`, else `1 + max(α_2, 1)(s − 1/α_1)`.
pub fn graph_dimension(inp: &DimensionInputs) -> Result<DimensionResult, DimensionError> {
    let (a1, a2) = inp.validate()?;
    let branch = inp.branch();
    let value = match branch {
        Branch::Slow => inp.s * a1.max(1.0),
        Branch::Fast => 1.0 + a2.max(1.0) * (inp.s - 1.0 / a1),
    };
    Ok(DimensionResult {
        value,
        branch,
        formula: Formula::GraphMulti,
    })
}

/// Graph dimension for `d = 1`: `s·max(α, 1)` if `α s ≤ 1`, else `1 + s − 1/α`.
pub fn graph_dimension_1d(alpha: f64, s: f64) -> Result<DimensionResult, DimensionError> {
    let inp = DimensionInputs::new(alpha, None, 1, s);
    inp.validate()?;
    let branch = inp.branch();
    let value = match branch {
        Branch::Slow => s * alpha.max(1.0),
        Branch::Fast => 1.0 + s - 1.0 / alpha,
    };
    Ok(DimensionResult {
        value,
        branch,
        formula: Formula::Graph1d,
    })
}

/// Range dimension: `α_1 s` if `α_1 s ≤ d_1`, else `1 + α_2(s − 1/α_1)`.
pub fn range_dimension(inp: &DimensionInputs) -> Result<DimensionResult, DimensionError> {
    let (a1, a2) = inp.validate()?;
    let branch = inp.branch();
    let value = match branch {
        Branch::Slow => a1 * inp.s,
        Branch::Fast => 1.0 + a2 * (inp.s - 1.0 / a1),
    };
    Ok(DimensionResult {
        value,
        branch,
        formula: Formula::Range,
    })
}

/// Graph dimension for a process in `R^d`, dispatching on `d`.
pub fn graph_dimension_for(d: usize, inp: &DimensionInputs) -> Result<DimensionResult, DimensionError> {
    if d == 1 {
        graph_dimension_1d(inp.alpha1, inp.s)
    } else {
        graph_dimension(inp)
    }
}

/// The four regimes of the sojourn-time lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SojournCase {
    /// `α_1 ≤ d_1`, `α_1 ≥ 1`: exponent `α_1`.
    I,
    /// `α_1 ≤ d_1`, `α_1 < 1`: exponent 1.
    II,
    /// `α_1 > d_1 = 1`, `α_2 ≥ 1`: exponent `1 + α_2(1 − 1/α_1)`.
    III,
    /// `α_1 > d_1 = 1`, `α_2 < 1`: exponent `2 − 1/α_1`.
    IV,
}

/// Sojourn case and the limiting exponent of `E[T_Z(a, s)]` as `a → 0`.
///
/// In dimension one the graph behaves like case (iv) whenever `α > 1`
/// (there is no second block, and the time coordinate supplies the extra
/// unit of mass), and like case (ii)/(i) otherwise.
pub fn sojourn_exponent(alpha1: f64, alpha2: Option<f64>, d1: usize) -> (SojournCase, f64) {
    let a2 = alpha2.unwrap_or(alpha1);
    if alpha1 <= d1 as f64 {
        if alpha1 >= 1.0 {
            (SojournCase::I, alpha1)
        } else {
            (SojournCase::II, 1.0)
        }
    } else if alpha2.is_some() && a2 >= 1.0 {
        (SojournCase::III, 1.0 + a2 * (1.0 - 1.0 / alpha1))
    } else {
        (SojournCase::IV, 2.0 - 1.0 / alpha1)
    }
}
