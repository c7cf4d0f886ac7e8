//! Pairwise comparison matrices: validation, consistency measures and
//! geometric-mean (logarithmic least squares) weights.
//!
//! A pairwise comparison matrix (PCM) records cardinal preferences: entry
//! `a_ij > 0` states how many times alternative `i` is preferred to
//! alternative `j`, with `a_ij * a_ji = 1` and a unit diagonal. Entries may be
//! missing as long as the graph of answered comparisons stays connected; an
//! unfinished questionnaire is still usable for clustering.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Relative tolerance accepted for `a_ij * a_ji = 1` at validation time.
///
/// Wide enough to absorb one ulp of rounding from computing `1/x`, narrow
/// enough to reject actually contradictory answers.
pub const RECIPROCITY_RTOL: f64 = 1e-9;

/// Relative mismatch up to which repair mode replaces `a_ji` by `1/a_ij`.
///
/// Data printed with three decimals (e.g. 0.143 for 1/7) fails the strict
/// check but is unambiguously a rounding artefact; anything worse than 1%
/// is treated as a real contradiction.
pub const REPAIR_RTOL: f64 = 1e-2;

/// A validated pairwise comparison matrix, possibly with missing entries.
///
/// Immutable after construction; all invariants (unit diagonal, reciprocity,
/// positivity, connected comparison graph) hold for every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Pcm {
    label: String,
    n: usize,
    entries: Vec<Option<f64>>, // row-major n*n
}

/// A mirrored entry rewritten by repair mode: `(row, col)` was replaced by
/// the reciprocal of `(col, row)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairedPair {
    pub row: usize,
    pub col: usize,
}

impl Pcm {
    /// Validates a grid of optional entries into a `Pcm`.
    ///
    /// Missing entries are preserved as missing. Fails with `BadShape`,
    /// `BadDiagonal`, `NonPositiveEntry`, `NonReciprocal` or
    /// `DisconnectedGraph`.
    pub fn new(label: impl Into<String>, grid: Vec<Vec<Option<f64>>>) -> Result<Self> {
        Self::build(label.into(), grid, false).map(|(pcm, _)| pcm)
    }

    /// Like [`Pcm::new`] but replaces `a_ji` by `1/a_ij` (upper triangle
    /// authoritative) whenever a mirrored pair mismatches by less than
    /// [`REPAIR_RTOL`] relative, returning the repaired pairs alongside.
    pub fn new_repaired(
        label: impl Into<String>,
        grid: Vec<Vec<Option<f64>>>,
    ) -> Result<(Self, Vec<RepairedPair>)> {
        Self::build(label.into(), grid, true)
    }

    /// Builds a complete matrix from plain rows, strict validation.
    pub fn from_rows(label: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(label, rows_to_grid(rows))
    }

    /// Builds a complete matrix from plain rows with repair mode on,
    /// discarding the repair notes. Convenient for data transcribed from
    /// rounded decimal tables.
    pub fn from_rows_repaired(label: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new_repaired(label, rows_to_grid(rows)).map(|(pcm, _)| pcm)
    }

    /// The consistent matrix `a_ij = w_i / w_j` generated by a positive
    /// weight vector.
    pub fn consistent_from_weights(label: impl Into<String>, weights: &[f64]) -> Result<Self> {
        let label = label.into();
        let n = weights.len();
        if n < 2 {
            return Err(Error::BadShape {
                label,
                detail: format!("need at least 2 weights, got {n}"),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositiveEntry {
                    label,
                    i,
                    j: i,
                    value: w,
                });
            }
        }
        let mut entries = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = Some(weights[i] / weights[j]);
            }
        }
        Ok(Self { label, n, entries })
    }

    fn build(
        label: String,
        grid: Vec<Vec<Option<f64>>>,
        repair: bool,
    ) -> Result<(Self, Vec<RepairedPair>)> {
        let n = grid.len();
        if n < 2 {
            return Err(Error::BadShape {
                label,
                detail: format!("matrix order must be at least 2, got {n}"),
            });
        }
        if let Some((i, row)) = grid.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::BadShape {
                label,
                detail: format!("row {i} has {} cells, expected {n}", row.len()),
            });
        }

        let mut entries = vec![None; n * n];
        for (i, row) in grid.into_iter().enumerate() {
            for (j, cell) in row.into_iter().enumerate() {
                if let Some(v) = cell {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::NonPositiveEntry {
                            label,
                            i,
                            j,
                            value: v,
                        });
                    }
                    entries[i * n + j] = Some(v);
                }
            }
        }

        for i in 0..n {
            match entries[i * n + i] {
                Some(v) if (v - 1.0).abs() <= RECIPROCITY_RTOL => {}
                _ => return Err(Error::BadDiagonal { label, i }),
            }
        }

        let mut repairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                match (entries[i * n + j], entries[j * n + i]) {
                    (None, None) => {}
                    (Some(upper), Some(lower)) => {
                        let residual = (upper * lower - 1.0).abs();
                        if residual <= RECIPROCITY_RTOL {
                            continue;
                        }
                        if repair && residual <= REPAIR_RTOL {
                            entries[j * n + i] = Some(1.0 / upper);
                            repairs.push(RepairedPair { row: j, col: i });
                        } else {
                            return Err(Error::NonReciprocal {
                                label,
                                i,
                                j,
                                detail: format!(
                                    "a_ij = {upper}, a_ji = {lower}, product = {}",
                                    upper * lower
                                ),
                            });
                        }
                    }
                    (Some(_), None) | (None, Some(_)) => {
                        return Err(Error::NonReciprocal {
                            label,
                            i,
                            j,
                            detail: "one direction is missing".to_string(),
                        })
                    }
                }
            }
        }

        // Connectivity of the comparison graph: BFS over present pairs.
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && j != i && entries[i * n + j].is_some() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(index) = seen.iter().position(|&s| !s) {
            return Err(Error::DisconnectedGraph { label, index });
        }

        Ok((Self { label, n, entries }, repairs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Entry `(i, j)`, or `None` when that comparison was not answered.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        assert!(i < self.n && j < self.n, "index out of range");
        self.entries[i * self.n + j]
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(|e| e.is_some())
    }

    /// The transposed matrix (also a valid PCM).
    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self {
            label: self.label.clone(),
            n,
            entries,
        }
    }

    /// Simultaneous row/column relabeling: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`. `perm` must be a permutation of
    /// `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut check = vec![false; n];
        for &p in perm {
            assert!(p < n && !check[p], "not a permutation");
            check[p] = true;
        }
        let mut entries = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.entries[perm[i] * n + perm[j]];
            }
        }
        Self {
            label: self.label.clone(),
            n,
            entries,
        }
    }

    /// Grid of optional entries, row major. Used by dataset export.
    pub fn rows(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteMatrix {
                label: self.label.clone(),
            })
        }
    }

    /// Entry of a complete matrix; panics when missing.
    pub(crate) fn val(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j].expect("entry checked present")
    }

    /// Cardinal transitivity check: `|a_ij * a_jk - a_ik| <= tol * a_ik`
    /// for every triple. Needs a complete matrix.
    pub fn is_consistent(&self, tol: f64) -> Result<bool> {
        self.require_complete()?;
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let lhs = self.val(i, j) * self.val(j, k);
                    let rhs = self.val(i, k);
                    if (lhs - rhs).abs() > tol * rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Dominant eigenvalue of a complete matrix via power iteration.
    ///
    /// The matrix is positive, so the Perron eigenvalue is simple and the
    /// iteration converges; the Collatz-Wielandt bounds certify a relative
    /// error below 1e-10 at exit. Returns `NoConvergence` after 10 000
    /// iterations, which signals pathological input.
    pub fn lambda_max(&self) -> Result<f64> {
        self.require_complete()?;
        let n = self.n;
        const MAX_ITER: usize = 10_000;
        const RQ_TOL: f64 = 1e-12;
        const CW_RTOL: f64 = 1e-10;

        let mut x = vec![1.0 / n as f64; n];
        let mut rayleigh_prev = f64::NAN;
        for _ in 0..MAX_ITER {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += self.val(i, j) * x[j];
                }
                y[i] = acc;
            }
            let mut cw_lo = f64::INFINITY;
            let mut cw_hi = f64::NEG_INFINITY;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let ratio = y[i] / x[i];
                cw_lo = cw_lo.min(ratio);
                cw_hi = cw_hi.max(ratio);
                num += x[i] * y[i];
                den += x[i] * x[i];
            }
            let rayleigh = num / den;
            let converged =
                (rayleigh - rayleigh_prev).abs() < RQ_TOL && (cw_hi - cw_lo) <= CW_RTOL * cw_hi;
            if converged {
                debug_assert!(rayleigh >= n as f64 - 1e-9);
                return Ok(rayleigh);
            }
            rayleigh_prev = rayleigh;
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..n {
                x[i] = y[i] / norm;
            }
        }
        Err(Error::NoConvergence { max_iter: MAX_ITER })
    }

    /// Consistency index and ratio derived from the dominant eigenvalue.
    pub fn consistency_report(&self, ri: &RiTable) -> Result<InconsistencyReport> {
        let n = self.n;
        let lambda_max = self.lambda_max()?;
        let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
        // Every 2x2 reciprocal matrix is consistent, so CR is defined as 0
        // there and no random index is needed.
        let (cr, ri_used) = if n == 2 {
            (0.0, 0.0)
        } else {
            let ri_used = ri.get(n).ok_or(Error::MissingRandomIndex { n })?;
            (ci / ri_used, ri_used)
        };
        Ok(InconsistencyReport {
            lambda_max,
            ci,
            cr,
            ri_used,
        })
    }

    /// Geometric-mean weights: the unique optimum of the logarithmic least
    /// squares problem for a complete matrix, `w_i` proportional to the
    /// geometric mean of row `i`.
    pub fn llsm_weights(&self) -> Result<WeightVector> {
        self.require_complete()?;
        let n = self.n;
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mean_log = (0..n).map(|j| self.val(i, j).ln()).sum::<f64>() / n as f64;
            weights.push(mean_log.exp());
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        WeightVector::new(weights)
    }
}

fn rows_to_grid(rows: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| Some(v)).collect())
        .collect()
}

/// A positive priority vector normalized to sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, &w)) = weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w.is_finite() && w > 0.0))
        {
            return Err(Error::NonPositiveEntry {
                label: "weight vector".to_string(),
                i,
                j: i,
                value: w,
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("weights must sum to 1, got {total}")));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Alternatives sorted by descending weight, 0-based; ties broken by
    /// ascending alternative index so reports are reproducible.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        order
    }
}

/// Inconsistency statistics of one matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InconsistencyReport {
    /// Dominant eigenvalue; at least `n`, with equality iff consistent.
    pub lambda_max: f64,
    /// `(lambda_max - n) / (n - 1)`.
    pub ci: f64,
    /// `ci / ri_used`; below 0.1 is the conventional acceptance rule.
    pub cr: f64,
    /// Random index applied, recorded for reproducibility.
    pub ri_used: f64,
}

/// Random index table mapping matrix order to the average consistency index
/// of random matrices of that order.
#[derive(Debug, Clone, PartialEq)]
pub struct RiTable(std::collections::BTreeMap<usize, f64>);

impl RiTable {
    /// Saaty's standard values for orders 3 through 8.
    pub fn saaty() -> Self {
        Self(
            [
                (3, 0.58),
                (4, 0.90),
                (5, 1.12),
                (6, 1.24),
                (7, 1.32),
                (8, 1.41),
            ]
            .into_iter()
            .collect(),
        )
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self(entries.into_iter().collect())
    }

    /// The default table with one order overridden.
    pub fn with_override(mut self, order: usize, value: f64) -> Self {
        self.0.insert(order, value);
        self
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.0.get(&n).copied()
    }
}

impl Default for RiTable {
    fn default() -> Self {
        Self::saaty()
    }
}
