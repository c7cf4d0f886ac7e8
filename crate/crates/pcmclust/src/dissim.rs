//! Dissimilarity measures between pairwise comparison matrices and the
//! dissimilarity matrix consumed by the clustering solvers.
//!
//! Seven measures are provided. `D1` (the Euclidean distance of entry
//! logarithms, after Crawford and Williams) and `D2` (the corresponding
//! Manhattan distance) are metrics. `D3`-`D7` are built from cross products
//! `a_ij * b_ji`, the quantity behind Saaty's compatibility index; of those
//! only `D6` and `D7` satisfy the triangle inequality. All seven are
//! symmetric, vanish exactly on identical matrices, and are invariant under
//! relabeling (hence transposition) of the alternatives.
//!
//! With incomplete matrices each sum or extremum runs over the comparisons
//! answered in *both* matrices, while the fixed normalizers of `D4` and `D6`
//! stay at the full order. Matrices with fewer answers therefore carry less
//! dissimilarity mass, so complete matrices have a stronger effect on the
//! clustering.
//!
//! Logarithms are natural logarithms; under a fixed measure the clustering
//! only depends on relative magnitudes, so the base is a convention.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pcm::Pcm;
use crate::textfmt::sig17;

/// Slack used by the triangle-inequality checker to ignore floating-point
/// noise on genuinely metric input.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// Identifier of a dissimilarity measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// Euclidean distance of entry logarithms. Metric.
    D1,
    /// Manhattan distance of entry logarithms. Metric.
    D2,
    /// Sum of `a_ij * b_ji - 1` over all ordered pairs. Not a metric.
    D3,
    /// Mean of `max{a_ij b_ji, a_ji b_ij} - 1` over unordered pairs. Not a metric.
    D4,
    /// Largest `a_ij * b_ji - 1`. Not a metric.
    D5,
    /// Mean of `1 - min{a_ij b_ji, a_ji b_ij}` over unordered pairs. Metric.
    D6,
    /// Largest `1 - a_ij * b_ji`. Metric.
    D7,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::D1,
        Measure::D2,
        Measure::D3,
        Measure::D4,
        Measure::D5,
        Measure::D6,
        Measure::D7,
    ];

    /// Whether the measure satisfies the triangle inequality (and identity of
    /// indiscernibles), i.e. is a distance on the set of PCMs.
    pub fn is_metric(self) -> bool {
        matches!(self, Measure::D1 | Measure::D2 | Measure::D6 | Measure::D7)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", *self as u8 + 1)
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Measure::D1),
            "d2" => Ok(Measure::D2),
            "d3" => Ok(Measure::D3),
            "d4" => Ok(Measure::D4),
            "d5" => Ok(Measure::D5),
            "d6" => Ok(Measure::D6),
            "d7" => Ok(Measure::D7),
            other => Err(Error::Config(format!(
                "unknown measure '{other}', expected d1..d7"
            ))),
        }
    }
}

/// Dissimilarity between two matrices of the same order.
///
/// Incomplete inputs must share at least one off-diagonal comparison.
pub fn dissim(a: &Pcm, b: &Pcm, measure: Measure) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::OrderMismatch {
            a: a.label().to_string(),
            an: a.n(),
            b: b.label().to_string(),
            bn: b.n(),
        });
    }
    let n = a.n();

    // Unordered off-diagonal pairs answered in both matrices.
    let mut common = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a.get(i, j).is_some() && b.get(i, j).is_some() {
                common.push((i, j));
            }
        }
    }
    if common.is_empty() {
        return Err(Error::NoCommonComparisons {
            a: a.label().to_string(),
            b: b.label().to_string(),
        });
    }

    let value = match measure {
        Measure::D1 => ordered_sum(a, b, &common, |x, y| {
            let d = x.ln() - y.ln();
            d * d
        })
        .sqrt(),
        Measure::D2 => ordered_sum(a, b, &common, |x, y| (x.ln() - y.ln()).abs()),
        Measure::D3 => {
            let mut acc = 0.0;
            for &(i, j) in &common {
                acc += cross(a, b, i, j) - 1.0;
                acc += cross(a, b, j, i) - 1.0;
            }
            acc
        }
        Measure::D4 => {
            let mut acc = 0.0;
            for &(i, j) in &common {
                acc += cross(a, b, i, j).max(cross(a, b, j, i)) - 1.0;
            }
            acc * 2.0 / (n as f64 * (n as f64 - 1.0))
        }
        Measure::D5 => common
            .iter()
            .flat_map(|&(i, j)| [cross(a, b, i, j) - 1.0, cross(a, b, j, i) - 1.0])
            .fold(f64::NEG_INFINITY, f64::max),
        Measure::D6 => {
            let mut acc = 0.0;
            for &(i, j) in &common {
                acc += 1.0 - cross(a, b, i, j).min(cross(a, b, j, i));
            }
            acc * 2.0 / (n as f64 * (n as f64 - 1.0))
        }
        Measure::D7 => common
            .iter()
            .flat_map(|&(i, j)| [1.0 - cross(a, b, i, j), 1.0 - cross(a, b, j, i)])
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(value)
}

fn cross(a: &Pcm, b: &Pcm, i: usize, j: usize) -> f64 {
    a.val(i, j) * b.val(j, i)
}

fn ordered_sum(a: &Pcm, b: &Pcm, common: &[(usize, usize)], term: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for &(i, j) in common {
        acc += term(a.val(i, j), b.val(i, j));
        acc += term(a.val(j, i), b.val(j, i));
    }
    acc
}

/// Symmetric matrix of pairwise dissimilarities between `m` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    measure: Measure,
    labels: Vec<String>,
    m: usize,
    delta: Vec<f64>, // row-major m*m
}

impl DissimilarityMatrix {
    /// Evaluates `measure` on every pair of matrices.
    ///
    /// Each unordered pair is computed once and mirrored, so the result is
    /// exactly symmetric with a zero diagonal.
    pub fn build(pcms: &[Pcm], measure: Measure) -> Result<Self> {
        if pcms.len() < 2 {
            return Err(Error::Config(format!(
                "dissimilarity matrix needs at least 2 matrices, got {}",
                pcms.len()
            )));
        }
        let m = pcms.len();
        let mut delta = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = dissim(&pcms[i], &pcms[j], measure)?;
                delta[i * m + j] = d;
                delta[j * m + i] = d;
            }
        }
        Ok(Self {
            measure,
            labels: pcms.iter().map(|p| p.label().to_string()).collect(),
            m,
            delta,
        })
    }

    /// Wraps an existing grid of dissimilarities, validating symmetry, the
    /// zero diagonal and non-negativity.
    pub fn from_raw(labels: Vec<String>, grid: Vec<Vec<f64>>, measure: Measure) -> Result<Self> {
        let m = grid.len();
        if m < 2 || labels.len() != m || grid.iter().any(|r| r.len() != m) {
            return Err(Error::Config(
                "dissimilarity grid must be square (m >= 2) with one label per row".to_string(),
            ));
        }
        for i in 0..m {
            if grid[i][i] != 0.0 {
                return Err(Error::Config(format!("delta[{i}][{i}] must be 0")));
            }
            for j in 0..m {
                let v = grid[i][j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("delta[{i}][{j}] = {v} is invalid")));
                }
                if (v - grid[j][i]).abs() > 1e-12 {
                    return Err(Error::Config(format!("delta[{i}][{j}] != delta[{j}][{i}]")));
                }
            }
        }
        let mut delta = vec![0.0; m * m];
        for (i, row) in grid.into_iter().enumerate() {
            delta[i * m..(i + 1) * m].copy_from_slice(&row);
        }
        Ok(Self {
            measure,
            labels,
            m,
            delta,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.m && j < self.m, "index out of range");
        self.delta[i * self.m + j]
    }

    /// All triples `(i, j, k)` with `delta(i,k) > delta(i,j) + delta(j,k)`
    /// beyond [`TRIANGLE_SLACK`]; reported once per unordered endpoint pair
    /// (`i < k`). Empty for metric measures.
    pub fn check_triangle(&self) -> Vec<(usize, usize, usize)> {
        let mut violations = Vec::new();
        for i in 0..self.m {
            for k in (i + 1)..self.m {
                for j in 0..self.m {
                    if j == i || j == k {
                        continue;
                    }
                    if self.get(i, k) > self.get(i, j) + self.get(j, k) + TRIANGLE_SLACK {
                        violations.push((i, j, k));
                    }
                }
            }
        }
        violations
    }

    /// Tab-separated export with row/column labels and 17-significant-digit
    /// entries, suitable for external clustering tools.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("label");
        for l in &self.labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for i in 0..self.m {
            out.push_str(&self.labels[i]);
            for j in 0..self.m {
                out.push('\t');
                out.push_str(&sig17(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triple() -> (Pcm, Pcm, Pcm) {
        let a = Pcm::from_rows(
            "A",
            &[
                vec![1.0, 2.0, 1.0],
                vec![0.5, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        let b = Pcm::from_rows(
            "B",
            &[
                vec![1.0, 3.0, 1.0],
                vec![1.0 / 3.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        let c = Pcm::from_rows(
            "C",
            &[
                vec![1.0, 4.0, 1.0],
                vec![0.25, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        (a, b, c)
    }

    #[test]
    fn d3_counterexample_values() {
        let (a, b, c) = triple();
        assert!((dissim(&a, &b, Measure::D3).unwrap() - 1.0 / 6.0).abs() <= 1e-12);
        assert!((dissim(&b, &c, Measure::D3).unwrap() - 1.0 / 12.0).abs() <= 1e-12);
        assert!((dissim(&a, &c, Measure::D3).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn d4_d5_counterexample_values() {
        let (a, b, c) = triple();
        assert!((dissim(&a, &b, Measure::D4).unwrap() - 1.0 / 6.0).abs() <= 1e-12);
        assert!((dissim(&b, &c, Measure::D4).unwrap() - 1.0 / 9.0).abs() <= 1e-12);
        assert!((dissim(&a, &c, Measure::D4).unwrap() - 1.0 / 3.0).abs() <= 1e-12);
        assert!((dissim(&a, &b, Measure::D5).unwrap() - 0.5).abs() <= 1e-12);
        assert!((dissim(&b, &c, Measure::D5).unwrap() - 1.0 / 3.0).abs() <= 1e-12);
        assert!((dissim(&a, &c, Measure::D5).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn self_dissimilarity_is_zero_for_all_measures() {
        let (a, _, _) = triple();
        for m in Measure::ALL {
            assert_eq!(dissim(&a, &a, m).unwrap(), 0.0, "{m}");
        }
    }

    #[test]
    fn triangle_checker_flags_d3_triple_only() {
        let (a, b, c) = triple();
        let pcms = [a, b, c];
        let d3 = DissimilarityMatrix::build(&pcms, Measure::D3).unwrap();
        assert_eq!(d3.check_triangle(), vec![(0, 1, 2)]);
        let d1 = DissimilarityMatrix::build(&pcms, Measure::D1).unwrap();
        assert!(d1.check_triangle().is_empty());
    }

    #[test]
    fn build_delta_matches_pairwise_calls() {
        let (a, b, c) = triple();
        let pcms = [a, b, c];
        let delta = DissimilarityMatrix::build(&pcms, Measure::D3).unwrap();
        assert_eq!(
            delta.get(0, 1),
            dissim(&pcms[0], &pcms[1], Measure::D3).unwrap()
        );
        assert_eq!(delta.get(1, 0), delta.get(0, 1));
        for i in 0..3 {
            assert_eq!(delta.get(i, i), 0.0);
        }
    }

    #[test]
    fn identical_matrices_give_zero_delta() {
        let (a, _, _) = triple();
        let delta = DissimilarityMatrix::build(&[a.clone(), a], Measure::D1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(delta.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let (a, _, _) = triple();
        let two = Pcm::from_rows("two", &[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        assert!(matches!(
            dissim(&a, &two, Measure::D1).unwrap_err(),
            Error::OrderMismatch { .. }
        ));
    }

    #[test]
    fn incomplete_pairs_use_common_comparisons_only() {
        // Both matrices know (0,1); only one knows (0,2)/(1,2).
        let p = Pcm::new(
            "p",
            vec![
                vec![Some(1.0), Some(2.0), Some(4.0)],
                vec![Some(0.5), Some(1.0), Some(2.0)],
                vec![Some(0.25), Some(0.5), Some(1.0)],
            ],
        )
        .unwrap();
        let q = Pcm::new(
            "q",
            vec![
                vec![Some(1.0), Some(8.0), None],
                vec![Some(0.125), Some(1.0), Some(2.0)],
                vec![None, Some(0.5), Some(1.0)],
            ],
        )
        .unwrap();
        // Only pairs (0,1) and (1,2) are common; D1 over those two pairs.
        let expect = (2.0 * (2.0f64.ln() - 8.0f64.ln()).powi(2)).sqrt();
        assert!((dissim(&p, &q, Measure::D1).unwrap() - expect).abs() < 1e-12);
        // D3 gains mass only from common pairs as well.
        let d3 = dissim(&p, &q, Measure::D3).unwrap();
        let t = 2.0 * 0.125;
        let expect3 = (t - 1.0) + (1.0 / t - 1.0);
        assert!((d3 - expect3).abs() < 1e-12);
    }

    #[test]
    fn disjoint_comparisons_are_rejected() {
        // p answers the path 0-1-2-3, q answers 0-2, 0-3, 1-3: both graphs
        // are connected but no comparison is shared.
        let p = Pcm::new(
            "p",
            vec![
                vec![Some(1.0), Some(2.0), None, None],
                vec![Some(0.5), Some(1.0), Some(3.0), None],
                vec![None, Some(1.0 / 3.0), Some(1.0), Some(2.0)],
                vec![None, None, Some(0.5), Some(1.0)],
            ],
        )
        .unwrap();
        let q = Pcm::new(
            "q",
            vec![
                vec![Some(1.0), None, Some(5.0), Some(2.0)],
                vec![None, Some(1.0), None, Some(4.0)],
                vec![Some(0.2), None, Some(1.0), None],
                vec![Some(0.5), Some(0.25), None, Some(1.0)],
            ],
        )
        .unwrap();
        assert!(matches!(
            dissim(&p, &q, Measure::D3).unwrap_err(),
            Error::NoCommonComparisons { .. }
        ));
    }

    #[test]
    fn metric_flags_match_the_classification() {
        assert!(Measure::D1.is_metric());
        assert!(Measure::D2.is_metric());
        assert!(!Measure::D3.is_metric());
        assert!(!Measure::D4.is_metric());
        assert!(!Measure::D5.is_metric());
        assert!(Measure::D6.is_metric());
        assert!(Measure::D7.is_metric());
    }

    #[test]
    fn measure_round_trips_through_strings() {
        for m in Measure::ALL {
            let s = m.to_string();
            assert_eq!(s.parse::<Measure>().unwrap(), m);
            assert_eq!(s.to_lowercase().parse::<Measure>().unwrap(), m);
        }
        assert!("d9".parse::<Measure>().is_err());
    }

    #[test]
    fn tsv_export_has_labels_and_roundtrippable_numbers() {
        let (a, b, _) = triple();
        let delta = DissimilarityMatrix::build(&[a, b], Measure::D3).unwrap();
        let tsv = delta.to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next().unwrap(), "label\tA\tB");
        let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
        assert_eq!(row[0], "A");
        let parsed: f64 = row[2].parse().unwrap();
        assert_eq!(parsed, delta.get(0, 1));
    }
}
