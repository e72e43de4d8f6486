//! Matrix exponents: validation, spectral decomposition by real parts of the
//! eigenvalues, and the scaling operators `s^E = exp(log s · E)`.
//!
//! The invariant subspace of each block is read off a reordered complex Schur
//! form rather than from kernels of minimal-polynomial factors, which are
//! numerically unstable. Since each block collects whole conjugate pairs its
//! subspace is real, and a real orthonormal basis is extracted by SVD.

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{FitError, ScalingFit};
use crate::linalg;

/// Real parts closer than this are grouped into one block.
pub const TAU_GROUP: f64 = 1e-8;
/// Change-of-basis condition number above which decomposition is refused.
pub const MAX_CONDITION: f64 = 1e12;

// Adjacent clusters closer than `MERGE_GAP · (1 + ‖E‖)` whose subspaces are
// nearly parallel are split defective eigenvalues, not separate blocks.
const MERGE_GAP: f64 = 1e-3;
const MERGE_SIGMA: f64 = 1e-5;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectralError {
    #[error("NotSquare: matrix is {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("EmptyMatrix: exponent must be at least 1x1")]
    EmptyMatrix,
    #[error("NonFinite: exponent entries and c must be finite")]
    NonFinite,
    #[error("ScalingConstantOutOfRange: c = {0} must exceed 1")]
    ScalingConstantOutOfRange(f64),
    #[error("EigenvalueRealPartTooSmall: eigenvalue {re}{im:+}i has real part below 1/2")]
    EigenvalueRealPartTooSmall { re: f64, im: f64 },
    #[error("IllConditionedBasis: change of basis has condition number {0:e}")]
    IllConditionedBasis(f64),
    #[error("InvalidScale: s = {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("GridTooNarrow: norm-growth grid needs >= 20 points over >= 4 decades")]
    GridTooNarrow,
    #[error("{0}")]
    Fit(#[from] FitError),
}

impl SpectralError {
    /// Stable identifier used for CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Self::NotSquare { .. } => "NotSquare",
            Self::EmptyMatrix => "EmptyMatrix",
            Self::NonFinite => "NonFinite",
            Self::ScalingConstantOutOfRange(_) => "ScalingConstantOutOfRange",
            Self::EigenvalueRealPartTooSmall { .. } => "EigenvalueRealPartTooSmall",
            Self::IllConditionedBasis(_) => "IllConditionedBasis",
            Self::InvalidScale(_) => "InvalidScale",
            Self::GridTooNarrow => "GridTooNarrow",
            Self::Fit(FitError::DegenerateGrid(_)) => "DegenerateGrid",
        }
    }
}

/// A validated exponent `E` together with its scaling constant `c > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSpec {
    matrix: DMatrix<f64>,
    c: f64,
    eigenvalues: Vec<Complex<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentJson {
    c: f64,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for ExponentSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExponentJson {
            c: self.c,
            matrix: linalg::to_rows(&self.matrix),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExponentSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = ExponentJson::deserialize(d)?;
        ExponentSpec::from_rows(&raw.matrix, raw.c).map_err(serde::de::Error::custom)
    }
}

impl ExponentSpec {
    pub fn from_rows(rows: &[Vec<f64>], c: f64) -> Result<Self, SpectralError> {
        let m = linalg::from_rows(rows).ok_or(SpectralError::NotSquare {
            rows: rows.len(),
            cols: rows.iter().map(|r| r.len()).max().unwrap_or(0),
        })?;
        validate_exponent(&m, c)
    }

    pub fn diagonal(entries: &[f64], c: f64) -> Result<Self, SpectralError> {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries));
        validate_exponent(&m, c)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in the order produced by the Schur form.
    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    /// Same exponent with a different scaling constant.
    pub fn with_c(&self, c: f64) -> Result<Self, SpectralError> {
        validate_exponent(&self.matrix, c)
    }
}

/// Checks that `m` is square, `c > 1`, and every eigenvalue has real part at
/// least 1/2.
///
/// Real parts are compared per cluster (cluster mean), so a defective
/// eigenvalue at exactly 1/2 that the eigensolver splits into a tiny ring is
/// still accepted.
pub fn validate_exponent(m: &DMatrix<f64>, c: f64) -> Result<ExponentSpec, SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(SpectralError::EmptyMatrix);
    }
    if !c.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if c <= 1.0 {
        return Err(SpectralError::ScalingConstantOutOfRange(c));
    }
    let schur = ComplexSchur::new(m);
    let clusters = schur.clusters(m)?;
    for cl in &clusters {
        if cl.re < 0.5 - 1e-10 * (1.0 + cl.re.abs()) {
            let rep = cl
                .members
                .iter()
                .map(|&i| schur.t[(i, i)])
                .fold(Complex::new(f64::INFINITY, 0.0), |a, z| if z.re < a.re { z } else { a });
            return Err(SpectralError::EigenvalueRealPartTooSmall { re: cl.re, im: rep.im });
        }
    }
    let eigenvalues = (0..m.nrows()).map(|i| schur.t[(i, i)]).collect();
    Ok(ExponentSpec {
        matrix: m.clone(),
        c,
        eigenvalues,
    })
}

/// One spectral block `(a_j, α_j, d_j, V_j, E_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub a: f64,
    pub alpha: f64,
    pub dim: usize,
    /// `d × d_j`, orthonormal columns spanning `V_j`.
    pub basis: DMatrix<f64>,
    /// `d_j × d_j` restriction of `E` to `V_j` in `basis` coordinates.
    pub exponent: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub blocks: Vec<SpectralBlock>,
    /// `[basis_1 | … | basis_p]`.
    pub change_of_basis: DMatrix<f64>,
    pub condition_number: f64,
}

impl SpectralDecomposition {
    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.change_of_basis.nrows()
    }

    pub fn block_diagonal(&self) -> DMatrix<f64> {
        let blocks: Vec<_> = self.blocks.iter().map(|b| b.exponent.clone()).collect();
        linalg::block_diagonal(&blocks)
    }

    /// Max-abs error of `C · blockdiag(E_j) · C⁻¹ − E`.
    pub fn reconstruction_error(&self, e: &ExponentSpec) -> f64 {
        let c = &self.change_of_basis;
        let inv = c.clone().try_inverse().expect("change of basis is invertible");
        linalg::max_abs(&(c * self.block_diagonal() * inv - e.matrix()))
    }

    /// Oblique projector onto `V_j` along the other blocks.
    pub fn projector(&self, j: usize) -> DMatrix<f64> {
        let c = &self.change_of_basis;
        let inv = c.clone().try_inverse().expect("change of basis is invertible");
        let offset: usize = self.blocks[..j].iter().map(|b| b.dim).sum();
        let k = self.blocks[j].dim;
        c.columns(offset, k) * inv.rows(offset, k)
    }

    /// `α_1` and `α_2` (with `α_2 := α_1` when there is a single block).
    pub fn leading_alphas(&self) -> (f64, f64, usize) {
        let b1 = &self.blocks[0];
        let a2 = self.blocks.get(1).map_or(b1.alpha, |b| b.alpha);
        (b1.alpha, a2, b1.dim)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    a: f64,
    alpha: f64,
    dim: usize,
    eigenvalues: Vec<[f64; 2]>,
    basis: Vec<Vec<f64>>,
    exponent: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    p: usize,
    d: usize,
    blocks: Vec<BlockJson>,
    change_of_basis: Vec<Vec<f64>>,
    condition_number: f64,
}

impl Serialize for SpectralDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DecompositionJson {
            p: self.p(),
            d: self.dim(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    a: b.a,
                    alpha: b.alpha,
                    dim: b.dim,
                    eigenvalues: b.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
                    basis: linalg::to_rows(&b.basis),
                    exponent: linalg::to_rows(&b.exponent),
                })
                .collect(),
            change_of_basis: linalg::to_rows(&self.change_of_basis),
            condition_number: self.condition_number,
        }
        .serialize(s)
    }
}

/// Splits `E` into blocks of equal eigenvalue real part, ascending in `a_j`.
pub fn decompose(e: &ExponentSpec) -> Result<SpectralDecomposition, SpectralError> {
    let m = e.matrix();
    let schur = ComplexSchur::new(m);
    let clusters = schur.clusters(m)?;
    let mut blocks = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let basis = cl.basis.clone();
        let exponent = basis.transpose() * m * &basis;
        let mut eigenvalues: Vec<Complex<f64>> =
            cl.members.iter().map(|&i| schur.t[(i, i)]).collect();
        eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        blocks.push(SpectralBlock {
            a: cl.re,
            alpha: 1.0 / cl.re,
            dim: cl.members.len(),
            basis,
            exponent,
            eigenvalues,
        });
    }
    let cols: Vec<_> = blocks.iter().map(|b| b.basis.clone()).collect();
    let change_of_basis = hstack(&cols);
    let condition_number = linalg::condition_number(&change_of_basis);
    if !(condition_number <= MAX_CONDITION) {
        return Err(SpectralError::IllConditionedBasis(condition_number));
    }
    // Recompute E_j from the oblique coordinates so that C⁻¹ E C is block
    // diagonal to working precision even when the blocks are not orthogonal.
    let inv = change_of_basis.clone().try_inverse().expect("checked conditioning");
    let full = &inv * m * &change_of_basis;
    let mut off = 0;
    for b in &mut blocks {
        b.exponent = full.view((off, off), (b.dim, b.dim)).into_owned();
        off += b.dim;
    }
    Ok(SpectralDecomposition {
        blocks,
        change_of_basis,
        condition_number,
    })
}

/// `s^E = exp(ln s · E)`; exactly the identity at `s = 1`.
pub fn scaling_operator(e: &DMatrix<f64>, s: f64) -> Result<DMatrix<f64>, SpectralError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(SpectralError::InvalidScale(s));
    }
    let n = e.nrows();
    if s == 1.0 {
        return Ok(DMatrix::identity(n, n));
    }
    Ok((e * s.ln()).exp())
}

/// Truncated power series `Σ_{k<terms} (ln s · E)^k / k!`. Test oracle only;
/// accurate when `‖ln s · E‖` is small.
pub fn scaling_operator_series(e: &DMatrix<f64>, s: f64, terms: usize) -> DMatrix<f64> {
    let n = e.nrows();
    let x = e * s.ln();
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..terms {
        term = &term * &x / k as f64;
        sum += &term;
    }
    sum
}

/// Regresses `log ‖t^{E_j}‖` (spectral norm) on `log t`.
///
/// The grid must hold at least 20 points spanning four decades inside (0, 1].
pub fn norm_growth_fit(block: &DMatrix<f64>, grid: &[f64]) -> Result<ScalingFit, SpectralError> {
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(SpectralError::GridTooNarrow);
    }
    let mut distinct = grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(FitError::DegenerateGrid(distinct.len()).into());
    }
    if distinct.len() < 20 || (hi / lo).log10() < 4.0 - 1e-9 {
        return Err(SpectralError::GridTooNarrow);
    }
    let norms = grid
        .iter()
        .map(|&t| scaling_operator(block, t).map(|m| linalg::spectral_norm(&m)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScalingFit::log_log(grid, &norms)?)
}

fn hstack(cols: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, |c| c.nrows());
    let total: usize = cols.iter().map(|c| c.ncols()).sum();
    let mut out = DMatrix::zeros(rows, total);
    let mut off = 0;
    for c in cols {
        out.columns_mut(off, c.ncols()).copy_from(c);
        off += c.ncols();
    }
    out
}

struct Cluster {
    members: Vec<usize>,
    re: f64,
    basis: DMatrix<f64>,
}

struct ComplexSchur {
    q: DMatrix<Complex<f64>>,
    t: DMatrix<Complex<f64>>,
}

impl ComplexSchur {
    fn new(m: &DMatrix<f64>) -> Self {
        let (q, t) = Schur::new(m.map(|x| Complex::new(x, 0.0))).unpack();
        Self { q, t }
    }

    fn clusters(&self, m: &DMatrix<f64>) -> Result<Vec<Cluster>, SpectralError> {
        let n = self.t.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.t[(i, i)].re.total_cmp(&self.t[(j, j)].re));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            let re = self.t[(i, i)].re;
            match groups.last_mut() {
                Some(g) if re - self.t[(*g.last().unwrap(), *g.last().unwrap())].re < TAU_GROUP => {
                    g.push(i)
                }
                _ => groups.push(vec![i]),
            }
        }
        let scale = 1.0 + linalg::max_abs(m);
        let mut clusters: Vec<Cluster> = groups
            .into_iter()
            .map(|g| self.make_cluster(g))
            .collect::<Result<_, _>>()?;
        loop {
            let merge = (0..clusters.len().saturating_sub(1)).find(|&k| {
                let (x, y) = (&clusters[k], &clusters[k + 1]);
                if y.re - x.re >= MERGE_GAP * scale {
                    return false;
                }
                let joint = hstack(&[x.basis.clone(), y.basis.clone()]);
                let sv = joint.singular_values();
                sv.iter().cloned().fold(f64::INFINITY, f64::min) < MERGE_SIGMA
            });
            match merge {
                Some(k) => {
                    let y = clusters.remove(k + 1);
                    let mut members = std::mem::take(&mut clusters[k].members);
                    members.extend(y.members);
                    clusters[k] = self.make_cluster(members)?;
                }
                None => break,
            }
        }
        Ok(clusters)
    }

    fn make_cluster(&self, members: Vec<usize>) -> Result<Cluster, SpectralError> {
        let re = members.iter().map(|&i| self.t[(i, i)].re).sum::<f64>() / members.len() as f64;
        let basis = self.invariant_basis(&members)?;
        Ok(Cluster { members, re, basis })
    }

    /// Real orthonormal basis of the invariant subspace belonging to the
    /// eigenvalues at the given diagonal positions.
    fn invariant_basis(&self, members: &[usize]) -> Result<DMatrix<f64>, SpectralError> {
        let n = self.t.nrows();
        let k = members.len();
        let mut t = self.t.clone();
        let mut q = self.q.clone();
        let mut selected = vec![false; n];
        for &i in members {
            selected[i] = true;
        }
        // Bubble selected eigenvalues to the leading positions.
        let mut done = false;
        while !done {
            done = true;
            for i in 0..n.saturating_sub(1) {
                if !selected[i] && selected[i + 1] {
                    swap_adjacent(&mut t, &mut q, i);
                    selected.swap(i, i + 1);
                    done = false;
                }
            }
        }
        let lead = q.columns(0, k);
        let mut real = DMatrix::zeros(n, 2 * k);
        for j in 0..k {
            for r in 0..n {
                real[(r, j)] = lead[(r, j)].re;
                real[(r, k + j)] = lead[(r, j)].im;
            }
        }
        // Leading eigenvectors of the Gram matrix. nalgebra's SVD can return
        // inaccurate singular vectors for rank-deficient input like this one.
        let eig = SymmetricEigen::new(&real * real.transpose());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = eig.eigenvalues[idx[0]];
        let kth = eig.eigenvalues[idx[k - 1]];
        if !(kth > 1e-12 * top) {
            return Err(SpectralError::IllConditionedBasis((top / kth.max(0.0)).sqrt()));
        }
        let mut basis = DMatrix::zeros(n, k);
        for (c, &i) in idx.iter().take(k).enumerate() {
            basis.set_column(c, &eig.eigenvectors.column(i));
        }
        Ok(basis)
    }
}

/// Swaps the diagonal entries at `i` and `i + 1` of an upper-triangular `t`
/// with a Givens rotation, updating `q` so that `q t q*` is unchanged.
fn swap_adjacent(t: &mut DMatrix<Complex<f64>>, q: &mut DMatrix<Complex<f64>>, i: usize) {
    let n = t.nrows();
    let a = t[(i, i)];
    let b = t[(i + 1, i + 1)];
    let x = t[(i, i + 1)];
    // Eigenvector of the 2×2 block for eigenvalue b.
    let (v0, v1) = (x, b - a);
    let r = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (p, s) = if r > 0.0 {
        (v0 / r, v1 / r)
    } else {
        (Complex::new(0.0, 0.0), Complex::new(1.0, 0.0))
    };
    // G = [[p, -s̄], [s, p̄]]; T ← G* T G, Q ← Q G.
    for k in 0..n {
        let (ti, tj) = (t[(i, k)], t[(i + 1, k)]);
        t[(i, k)] = p.conj() * ti + s.conj() * tj;
        t[(i + 1, k)] = -s * ti + p * tj;
    }
    for k in 0..n {
        let (ti, tj) = (t[(k, i)], t[(k, i + 1)]);
        t[(k, i)] = ti * p + tj * s;
        t[(k, i + 1)] = -ti * s.conj() + tj * p.conj();
        let (qi, qj) = (q[(k, i)], q[(k, i + 1)]);
        q[(k, i)] = qi * p + qj * s;
        q[(k, i + 1)] = -qi * s.conj() + qj * p.conj();
    }
    t[(i + 1, i)] = Complex::new(0.0, 0.0);
}
