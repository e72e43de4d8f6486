/// A path sampled on the dyadic grid `t_k = k·2^{−n}`.
///
/// `values` holds `X(t_k)` row-major, `d` coordinates per grid point. Paths
/// normally cover `k = 0..=2^n`; prefix paths stop earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPath {
    pub n: u32,
    pub d: usize,
    pub seed: u64,
    /// Name of the random stream the path was drawn from.
    pub stream: String,
    pub values: Vec<f64>,
}

impl LevyPath {
    pub fn len(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    /// Exact grid time `k·2^{−n}`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    /// Graph point `Z(t_k) = (t_k, X(t_k))`.
    pub fn graph_point(&self, k: usize) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.d + 1);
        z.push(self.time(k));
        z.extend_from_slice(self.point(k));
        z
    }

    /// One coordinate as a series.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.d).copied().collect()
    }
}
