//! Group aggregation of pairwise comparison matrices and comparison of the
//! resulting rankings.
//!
//! Two routes are offered. The conventional one takes the entrywise
//! geometric mean of all matrices and derives weights from the common
//! matrix. The clustering-based one solves a 1-medoid problem and promotes
//! the medoid to group aggregate, which guarantees the aggregate is an
//! opinion actually held by one of the decision-makers. A third thin
//! variant aggregates per-matrix weight vectors instead of matrices.

use std::fmt;

use crate::dissim::{DissimilarityMatrix, Measure};
use crate::error::{Error, Result};
use crate::kmedoids::{solve_exact, KMedoidsProblem};
use crate::pcm::{Pcm, WeightVector};

/// How an aggregate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMethod {
    GeometricMean,
    Medoid(Measure),
}

impl fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregationMethod::GeometricMean => write!(f, "geometric_mean"),
            AggregationMethod::Medoid(m) => write!(f, "medoid_{}", m.to_string().to_lowercase()),
        }
    }
}

/// An aggregate matrix with its weights and implied ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationOutcome {
    pub aggregate: Pcm,
    pub weights: WeightVector,
    /// 0-based alternatives by descending weight.
    pub ranking: Vec<usize>,
    pub method: AggregationMethod,
}

impl AggregationOutcome {
    /// JSON export: matrix rows, weights, 1-based ranking and method tag.
    pub fn to_json(&self) -> String {
        #[derive(serde::Serialize)]
        struct Export {
            method: String,
            label: String,
            n: usize,
            entries: Vec<Vec<Option<f64>>>,
            weights: Vec<f64>,
            ranking: Vec<usize>,
        }
        let export = Export {
            method: self.method.to_string(),
            label: self.aggregate.label().to_string(),
            n: self.aggregate.n(),
            entries: self.aggregate.rows(),
            weights: self.weights.weights().to_vec(),
            ranking: self.ranking.iter().map(|&i| i + 1).collect(),
        };
        let mut s = serde_json::to_string_pretty(&export).expect("plain struct serializes");
        s.push('\n');
        s
    }
}

/// Entrywise geometric mean of the matrices, then weights from the common
/// matrix.
///
/// With incomplete inputs each entry is averaged over the matrices that
/// answered it; an entry answered by nobody fails with `IncompleteMatrix`
/// rather than being silently imputed. Reciprocity of the result is exact
/// because the lower triangle is written as the reciprocal of the upper.
pub fn aggregate_geometric(pcms: &[Pcm]) -> Result<AggregationOutcome> {
    let n = check_uniform_order(pcms)?;
    let mut grid: Vec<Vec<Option<f64>>> = vec![vec![None; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let logs: Vec<f64> = pcms
                .iter()
                .filter_map(|p| p.get(i, j))
                .map(f64::ln)
                .collect();
            if logs.is_empty() {
                return Err(Error::IncompleteMatrix {
                    label: format!("aggregate entry ({i},{j}) answered by no matrix"),
                });
            }
            let gm = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
            grid[i][j] = Some(gm);
            grid[j][i] = Some(1.0 / gm);
        }
    }
    let aggregate = Pcm::new("aggregate", grid)?;
    let weights = aggregate.llsm_weights()?;
    let ranking = weights.ranking();
    Ok(AggregationOutcome {
        aggregate,
        weights,
        ranking,
        method: AggregationMethod::GeometricMean,
    })
}

/// One-cluster aggregation: the medoid of the whole set under `measure`
/// becomes the aggregate, so the result is always one of the inputs.
pub fn aggregate_by_medoid(pcms: &[Pcm], measure: Measure) -> Result<AggregationOutcome> {
    check_uniform_order(pcms)?;
    let medoid = if pcms.len() == 1 {
        0
    } else {
        let delta = DissimilarityMatrix::build(pcms, measure)?;
        let problem = KMedoidsProblem::new(&delta, 1)?;
        solve_exact(&problem)?.medoids[0]
    };
    let aggregate = pcms[medoid].clone();
    let weights = aggregate.llsm_weights()?;
    let ranking = weights.ranking();
    Ok(AggregationOutcome {
        aggregate,
        weights,
        ranking,
        method: AggregationMethod::Medoid(measure),
    })
}

/// Aggregate priorities instead of matrices: per-matrix geometric-mean
/// weights, combined by another geometric mean and renormalized.
pub fn aggregate_priorities(pcms: &[Pcm]) -> Result<WeightVector> {
    let n = check_uniform_order(pcms)?;
    let mut log_sum = vec![0.0; n];
    for pcm in pcms {
        let w = pcm.llsm_weights()?;
        for (acc, &wi) in log_sum.iter_mut().zip(w.weights()) {
            *acc += wi.ln();
        }
    }
    let mut combined: Vec<f64> = log_sum
        .iter()
        .map(|&s| (s / pcms.len() as f64).exp())
        .collect();
    let total: f64 = combined.iter().sum();
    for w in &mut combined {
        *w /= total;
    }
    WeightVector::new(combined)
}

fn check_uniform_order(pcms: &[Pcm]) -> Result<usize> {
    let first = pcms.first().ok_or(Error::EmptyInput)?;
    for p in &pcms[1..] {
        if p.n() != first.n() {
            return Err(Error::OrderMismatch {
                a: first.label().to_string(),
                an: first.n(),
                b: p.label().to_string(),
                bn: p.n(),
            });
        }
    }
    Ok(first.n())
}

/// Outcome of comparing two rankings of the same alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankingComparison {
    Equal,
    /// Alternative pairs (0-based, ascending) ordered differently.
    Reversals(Vec<(usize, usize)>),
}

/// Pairs of alternatives on which two rankings disagree.
pub fn compare_rankings(a: &[usize], b: &[usize]) -> Result<RankingComparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let n = a.len();
    let position = |ranking: &[usize]| -> Result<Vec<usize>> {
        let mut pos = vec![usize::MAX; n];
        for (rank, &alt) in ranking.iter().enumerate() {
            if alt >= n || pos[alt] != usize::MAX {
                return Err(Error::Config(format!(
                    "ranking is not a permutation of 0..{n}"
                )));
            }
            pos[alt] = rank;
        }
        Ok(pos)
    };
    let pa = position(a)?;
    let pb = position(b)?;
    let mut reversals = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            if (pa[x] < pa[y]) != (pb[x] < pb[y]) {
                reversals.push((x, y));
            }
        }
    }
    if reversals.is_empty() {
        Ok(RankingComparison::Equal)
    } else {
        Ok(RankingComparison::Reversals(reversals))
    }
}
