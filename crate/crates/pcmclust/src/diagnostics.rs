//! Cluster-count diagnostics: elbow series over the exact optimum,
//! silhouette values, agglomerative dendrograms and per-cluster
//! inconsistency summaries.
//!
//! None of these pick "the" number of clusters automatically; no reliable
//! rule exists for general dissimilarities, so the diagnostics are reported
//! and the choice stays with the analyst.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::kmedoids::{solve_exact, ClusteringSolution, KMedoidsProblem};
use crate::pcm::{Pcm, RiTable};
use crate::textfmt::sig17;

/// Exact optimal objective for every cluster count.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowSeries {
    /// `(k, optimal objective)` for `k = 1..=k_max`; non-increasing in `k`.
    pub points: Vec<(usize, f64)>,
}

impl ElbowSeries {
    /// TSV export: `k<TAB>objective` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("k\tobjective\n");
        for &(k, obj) in &self.points {
            out.push_str(&format!("{k}\t{}\n", sig17(obj)));
        }
        out
    }
}

/// Optimal objective as a function of the cluster count, computed with the
/// exact solver so the curve is the true optimum-vs-k function.
pub fn elbow(
    delta: &DissimilarityMatrix,
    k_max: usize,
    forbidden: &BTreeSet<usize>,
) -> Result<ElbowSeries> {
    if k_max == 0 || k_max > delta.m() {
        return Err(Error::Config(format!(
            "k_max must lie in 1..={}, got {k_max}",
            delta.m()
        )));
    }
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let problem = KMedoidsProblem::with_forbidden(delta, k, forbidden.clone())?;
        let solution = solve_exact(&problem)?;
        points.push((k, solution.objective));
    }
    Ok(ElbowSeries { points })
}

/// Per-object silhouette values and their mean for one clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport {
    /// `s_i in [-1, 1]`; objects in singleton clusters get 0 by the
    /// Kaufman-Rousseeuw convention.
    pub per_object: Vec<f64>,
    pub mean: f64,
    pub k: usize,
}

/// Classic silhouette: `s_i = (b_i - a_i) / max(a_i, b_i)` with `a_i` the
/// mean dissimilarity to own-cluster co-members and `b_i` the smallest mean
/// dissimilarity to another cluster. Undefined for one cluster.
pub fn silhouette(
    delta: &DissimilarityMatrix,
    solution: &ClusteringSolution,
) -> Result<SilhouetteReport> {
    let m = delta.m();
    if solution.assignment.len() != m {
        return Err(Error::Config(
            "solution does not belong to this dissimilarity matrix".to_string(),
        ));
    }
    let k = solution.k();
    if k < 2 {
        return Err(Error::SingleCluster);
    }

    let clusters: Vec<Vec<usize>> = solution
        .medoids
        .iter()
        .map(|&med| solution.cluster_members(med))
        .collect();
    let cluster_of: Vec<usize> = (0..m)
        .map(|i| {
            solution
                .medoids
                .iter()
                .position(|&med| med == solution.assignment[i])
                .expect("assignment targets a medoid")
        })
        .collect();

    let mut per_object = Vec::with_capacity(m);
    for i in 0..m {
        let own = &clusters[cluster_of[i]];
        if own.len() == 1 {
            per_object.push(0.0);
            continue;
        }
        let a = own
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| delta.get(i, j))
            .sum::<f64>()
            / (own.len() - 1) as f64;
        let b = clusters
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != cluster_of[i])
            .map(|(_, members)| {
                members.iter().map(|&j| delta.get(i, j)).sum::<f64>() / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        per_object.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
    }
    let mean = per_object.iter().sum::<f64>() / m as f64;
    Ok(SilhouetteReport {
        per_object,
        mean,
        k,
    })
}

/// Linkage rule for agglomerative clustering.
///
/// Average linkage is the default: it is well defined for arbitrary
/// dissimilarities (including non-metric ones) and produces no inversions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Linkage::Average => write!(f, "average"),
            Linkage::Single => write!(f, "single"),
            Linkage::Complete => write!(f, "complete"),
        }
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::Config(format!(
                "unknown linkage '{other}', expected average|single|complete"
            ))),
        }
    }
}

/// Height transform applied to the dissimilarities before merging; squaring
/// spreads small distances and can make the tree structure easier to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeightTransform {
    #[default]
    Identity,
    Square,
}

/// One agglomerative merge. Cluster ids follow the usual convention: leaves
/// are `0..m`, the cluster created by merge `t` has id `m + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

/// A stepwise dendrogram: `m - 1` merges over `m` labelled leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    pub labels: Vec<String>,
}

impl Dendrogram {
    /// Newick text with branch lengths. Each node sits at its merge height
    /// (leaves at 0) and a branch length is the height difference to the
    /// parent, so leaf-to-root depths all equal the root height.
    pub fn to_newick(&self) -> String {
        let m = self.labels.len();
        let mut s = String::new();
        self.write_newick(&mut s, m + self.merges.len() - 1, f64::NAN);
        s.push(';');
        s.push('\n');
        s
    }

    fn write_newick(&self, out: &mut String, node: usize, parent_height: f64) {
        let m = self.labels.len();
        let height = if node < m {
            0.0
        } else {
            let merge = &self.merges[node - m];
            out.push('(');
            self.write_newick(out, merge.a, merge.height);
            out.push(',');
            self.write_newick(out, merge.b, merge.height);
            out.push(')');
            merge.height
        };
        if node < m {
            out.push_str(&sanitize_newick_label(&self.labels[node]));
        }
        if parent_height.is_finite() {
            out.push_str(&format!(":{}", parent_height - height));
        }
    }

    /// Merge table as TSV: `step, cluster_a, cluster_b, height, size`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("step\tcluster_a\tcluster_b\theight\tsize\n");
        for (t, merge) in self.merges.iter().enumerate() {
            out.push_str(&format!(
                "{t}\t{}\t{}\t{}\t{}\n",
                merge.a,
                merge.b,
                sig17(merge.height),
                merge.size
            ));
        }
        out
    }
}

fn sanitize_newick_label(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            '(' | ')' | ',' | ':' | ';' | ' ' | '\t' | '\'' | '"' => '_',
            c => c,
        })
        .collect()
}

/// Sequential greedy merging of the closest pair under the linkage rule.
/// Ties go to the lexicographically smallest cluster-id pair.
pub fn agglomerate(
    delta: &DissimilarityMatrix,
    linkage: Linkage,
    transform: HeightTransform,
) -> Dendrogram {
    let m = delta.m();
    // Working distances indexed by cluster id; active ids only.
    let total = 2 * m - 1;
    let mut dist = vec![vec![0.0f64; total]; total];
    for i in 0..m {
        for j in 0..m {
            let d = delta.get(i, j);
            dist[i][j] = match transform {
                HeightTransform::Identity => d,
                HeightTransform::Square => d * d,
            };
        }
    }
    let mut size = vec![0usize; total];
    for s in size.iter_mut().take(m) {
        *s = 1;
    }
    let mut active: Vec<usize> = (0..m).collect();
    let mut merges = Vec::with_capacity(m - 1);

    for step in 0..(m - 1) {
        let mut best = (usize::MAX, usize::MAX);
        let mut best_d = f64::INFINITY;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                if dist[a][b] < best_d {
                    best_d = dist[a][b];
                    best = (a, b);
                }
            }
        }
        let (a, b) = best;
        let new = m + step;
        size[new] = size[a] + size[b];
        for &other in &active {
            if other == a || other == b {
                continue;
            }
            let d = match linkage {
                Linkage::Average => {
                    (size[a] as f64 * dist[a][other] + size[b] as f64 * dist[b][other])
                        / (size[a] + size[b]) as f64
                }
                Linkage::Single => dist[a][other].min(dist[b][other]),
                Linkage::Complete => dist[a][other].max(dist[b][other]),
            };
            dist[new][other] = d;
            dist[other][new] = d;
        }
        active.retain(|&c| c != a && c != b);
        active.push(new);
        debug_assert!(
            merges
                .last()
                .map_or(true, |prev: &Merge| best_d >= prev.height),
            "merge heights must be non-decreasing"
        );
        merges.push(Merge {
            a,
            b,
            height: best_d,
            size: size[new],
        });
    }

    Dendrogram {
        merges,
        labels: delta.labels().to_vec(),
    }
}

/// Five-number summary plus Tukey outliers of the consistency ratios inside
/// one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotStats {
    pub medoid: usize,
    pub size: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Object indices with CR outside `[q1 - 1.5 IQR, q3 + 1.5 IQR]`.
    pub outliers: Vec<usize>,
}

/// Boxplot statistics of CR per cluster, in medoid order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterInconsistencySummary {
    pub clusters: Vec<BoxplotStats>,
}

impl ClusterInconsistencySummary {
    /// TSV export, one row per cluster; outliers listed by label.
    pub fn to_tsv(&self, labels: &[String]) -> String {
        let mut out = String::from("medoid\tsize\tmin\tq1\tmedian\tq3\tmax\toutliers\n");
        for c in &self.clusters {
            let outliers: Vec<&str> = c.outliers.iter().map(|&i| labels[i].as_str()).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                labels[c.medoid],
                c.size,
                sig17(c.min),
                sig17(c.q1),
                sig17(c.median),
                sig17(c.q3),
                sig17(c.max),
                outliers.join(";")
            ));
        }
        out
    }
}

/// Linear-interpolation quantile (the numpy default) on sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-cluster distribution of consistency ratios for a clustering of
/// complete matrices.
pub fn cluster_cr_summary(
    pcms: &[Pcm],
    solution: &ClusteringSolution,
    ri: &RiTable,
) -> Result<ClusterInconsistencySummary> {
    if pcms.len() != solution.assignment.len() {
        return Err(Error::Config(
            "solution does not belong to this matrix set".to_string(),
        ));
    }
    let crs: Vec<f64> = pcms
        .iter()
        .map(|p| p.consistency_report(ri).map(|r| r.cr))
        .collect::<Result<_>>()?;

    let mut clusters = Vec::with_capacity(solution.k());
    for &med in &solution.medoids {
        let members = solution.cluster_members(med);
        let mut values: Vec<f64> = members.iter().map(|&i| crs[i]).collect();
        values.sort_by(f64::total_cmp);
        let q1 = quantile(&values, 0.25);
        let median = quantile(&values, 0.5);
        let q3 = quantile(&values, 0.75);
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let outliers: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| crs[i] < lo || crs[i] > hi)
            .collect();
        clusters.push(BoxplotStats {
            medoid: med,
            size: members.len(),
            min: values[0],
            q1,
            median,
            q3,
            max: *values.last().expect("cluster is never empty"),
            outliers,
        });
    }
    Ok(ClusterInconsistencySummary { clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissim::Measure;

    fn raw(grid: Vec<Vec<f64>>) -> DissimilarityMatrix {
        let labels = (0..grid.len()).map(|i| format!("m{i}")).collect();
        DissimilarityMatrix::from_raw(labels, grid, Measure::D1).unwrap()
    }

    #[test]
    fn elbow_of_counterexample_triple() {
        let delta = DissimilarityMatrix::from_raw(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                vec![0.0, 1.0 / 6.0, 0.5],
                vec![1.0 / 6.0, 0.0, 1.0 / 12.0],
                vec![0.5, 1.0 / 12.0, 0.0],
            ],
            Measure::D3,
        )
        .unwrap();
        let series = elbow(&delta, 3, &BTreeSet::new()).unwrap();
        assert_eq!(series.points.len(), 3);
        assert!((series.points[0].1 - 0.25).abs() < 1e-15);
        // k = 2: isolate the expensive object A; B and C merge at 1/12.
        assert!((series.points[1].1 - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(series.points[2].1, 0.0);
    }

    #[test]
    fn elbow_is_flat_zero_for_identical_objects() {
        let delta = raw(vec![vec![0.0; 4]; 4]);
        let series = elbow(&delta, 4, &BTreeSet::new()).unwrap();
        for &(_, obj) in &series.points {
            assert_eq!(obj, 0.0);
        }
    }

    #[test]
    fn silhouette_perfect_separation_is_one() {
        // Two duplicate groups, within delta 0, between 1.
        let delta = raw(vec![
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0],
        ]);
        let solution = solve_exact(&KMedoidsProblem::new(&delta, 2).unwrap()).unwrap();
        let report = silhouette(&delta, &solution).unwrap();
        assert_eq!(report.k, 2);
        for &s in &report.per_object {
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!((report.mean - 1.0).abs() < 1e-15);
    }

    #[test]
    fn silhouette_matches_hand_computation() {
        // Three objects, clusters {0,1} and {2}.
        let delta = raw(vec![
            vec![0.0, 2.0, 6.0],
            vec![2.0, 0.0, 4.0],
            vec![6.0, 4.0, 0.0],
        ]);
        let solution = solve_exact(&KMedoidsProblem::new(&delta, 2).unwrap()).unwrap();
        assert_eq!(solution.medoids, vec![0, 2]);
        assert_eq!(solution.assignment, vec![0, 0, 2]);
        let report = silhouette(&delta, &solution).unwrap();
        // s_0 = (6 - 2)/6, s_1 = (4 - 2)/4, s_2 = 0 (singleton).
        assert!((report.per_object[0] - 4.0 / 6.0).abs() < 1e-15);
        assert!((report.per_object[1] - 0.5).abs() < 1e-15);
        assert_eq!(report.per_object[2], 0.0);
        let mean = (4.0 / 6.0 + 0.5) / 3.0;
        assert!((report.mean - mean).abs() < 1e-15);
    }

    #[test]
    fn silhouette_rejects_single_cluster() {
        let delta = raw(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let solution = solve_exact(&KMedoidsProblem::new(&delta, 1).unwrap()).unwrap();
        assert!(matches!(
            silhouette(&delta, &solution).unwrap_err(),
            Error::SingleCluster
        ));
    }

    #[test]
    fn forced_merge_order() {
        let delta = raw(vec![
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ]);
        let dendro = agglomerate(&delta, Linkage::Average, HeightTransform::Identity);
        assert_eq!(dendro.merges.len(), 2);
        assert_eq!((dendro.merges[0].a, dendro.merges[0].b), (0, 1));
        assert_eq!(dendro.merges[0].height, 1.0);
        assert_eq!(dendro.merges[0].size, 2);
        assert_eq!((dendro.merges[1].a, dendro.merges[1].b), (2, 3));
        assert_eq!(dendro.merges[1].height, 10.0);
        assert_eq!(dendro.merges[1].size, 3);
    }

    #[test]
    fn square_transform_squares_first_merge_height() {
        let delta = raw(vec![
            vec![0.0, 3.0, 10.0],
            vec![3.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ]);
        let plain = agglomerate(&delta, Linkage::Average, HeightTransform::Identity);
        let squared = agglomerate(&delta, Linkage::Average, HeightTransform::Square);
        assert_eq!(
            (plain.merges[0].a, plain.merges[0].b),
            (squared.merges[0].a, squared.merges[0].b)
        );
        assert_eq!(squared.merges[0].height, plain.merges[0].height.powi(2));
    }

    #[test]
    fn newick_encodes_branch_lengths() {
        let delta = raw(vec![
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ]);
        let dendro = agglomerate(&delta, Linkage::Average, HeightTransform::Identity);
        assert_eq!(dendro.to_newick(), "(m2:10,(m0:1,m1:1):9);\n");
    }

    #[test]
    fn single_and_complete_linkage_bracket_average() {
        let delta = raw(vec![
            vec![0.0, 1.0, 4.0, 9.0],
            vec![1.0, 0.0, 3.0, 8.0],
            vec![4.0, 3.0, 0.0, 2.0],
            vec![9.0, 8.0, 2.0, 0.0],
        ]);
        let single = agglomerate(&delta, Linkage::Single, HeightTransform::Identity);
        let complete = agglomerate(&delta, Linkage::Complete, HeightTransform::Identity);
        let average = agglomerate(&delta, Linkage::Average, HeightTransform::Identity);
        let root = |d: &Dendrogram| d.merges.last().unwrap().height;
        assert!(root(&single) <= root(&average));
        assert!(root(&average) <= root(&complete));
    }

    #[test]
    fn cr_summary_of_identical_consistent_matrices_is_zero() {
        let p = Pcm::consistent_from_weights("c", &[0.5, 0.3, 0.2]).unwrap();
        let pcms = vec![p.clone(), p.clone(), p];
        let delta = DissimilarityMatrix::build(&pcms, Measure::D1).unwrap();
        let solution = solve_exact(&KMedoidsProblem::new(&delta, 1).unwrap()).unwrap();
        let summary = cluster_cr_summary(&pcms, &solution, &RiTable::saaty()).unwrap();
        let stats = &summary.clusters[0];
        assert_eq!(stats.size, 3);
        for v in [stats.min, stats.q1, stats.median, stats.q3, stats.max] {
            assert!(v.abs() < 1e-9);
        }
        assert!(stats.outliers.is_empty());
    }

    #[test]
    fn single_member_cluster_collapses_the_boxplot() {
        let near = Pcm::from_rows(
            "near",
            &[
                vec![1.0, 2.0, 4.2],
                vec![0.5, 1.0, 2.0],
                vec![1.0 / 4.2, 0.5, 1.0],
            ],
        )
        .unwrap();
        let far = Pcm::from_rows(
            "far",
            &[
                vec![1.0, 0.2, 5.0],
                vec![5.0, 1.0, 0.2],
                vec![0.2, 5.0, 1.0],
            ],
        )
        .unwrap();
        let pcms = vec![near.clone(), near, far];
        let delta = DissimilarityMatrix::build(&pcms, Measure::D3).unwrap();
        let solution = solve_exact(&KMedoidsProblem::new(&delta, 2).unwrap()).unwrap();
        let summary = cluster_cr_summary(&pcms, &solution, &RiTable::saaty()).unwrap();
        let singleton = summary
            .clusters
            .iter()
            .find(|c| c.size == 1)
            .expect("the far matrix is isolated");
        assert_eq!(singleton.min, singleton.median);
        assert_eq!(singleton.median, singleton.max);
        assert_eq!(singleton.q1, singleton.q3);
        assert!(singleton.outliers.is_empty());
    }

    #[test]
    fn quartiles_match_sorted_oracle() {
        let values = [0.08, 0.01, 0.03, 0.05, 0.02];
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(quantile(&sorted, 0.5), 0.03);
        assert_eq!(quantile(&sorted, 0.25), 0.02);
        assert_eq!(quantile(&sorted, 0.75), 0.05);
        // Single value: every quantile is that value.
        assert_eq!(quantile(&[0.7], 0.25), 0.7);
    }
}
