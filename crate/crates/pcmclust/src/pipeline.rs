//! End-to-end clustering runs: one call turns a dataset and a configuration
//! into the full set of plot-ready files plus a human-readable report.
//!
//! Outputs are deterministic: identical (dataset, config, seed) produce
//! byte-identical files.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use crate::aggregate::{aggregate_by_medoid, AggregationOutcome};
use crate::dataset::Dataset;
use crate::diagnostics::{
    agglomerate, cluster_cr_summary, elbow, silhouette, ClusterInconsistencySummary, ElbowSeries,
    HeightTransform, Linkage, SilhouetteReport,
};
use crate::dissim::{DissimilarityMatrix, Measure};
use crate::error::{Error, Result};
use crate::kmedoids::{
    detect_outliers, eligible_medoids_by_cr, solve_exact, solve_pam, ClusteringSolution,
};
use crate::mds::{embed, EmbeddingResult};
use crate::pcm::RiTable;
use crate::textfmt::{dec3, sig17};

/// Configuration of a full clustering run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub measure: Measure,
    /// Cluster count of the reported solution.
    pub k: usize,
    /// Upper end of the elbow curve; defaults to `min(m, 10)`.
    pub k_max: Option<usize>,
    /// Matrices with CR above this cannot become cluster centres.
    pub cr_threshold: Option<f64>,
    pub linkage: Linkage,
    pub dendro_transform: HeightTransform,
    pub ri: RiTable,
    pub seed: u64,
    /// Clusters up to this size are flagged as outliers.
    pub outlier_max_size: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn new(measure: Measure, k: usize, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            measure,
            k,
            k_max: None,
            cr_threshold: None,
            linkage: Linkage::Average,
            dendro_transform: HeightTransform::Identity,
            ri: RiTable::saaty(),
            seed: 0,
            outlier_max_size: 1,
            out_dir: out_dir.into(),
        }
    }
}

/// Everything a run produced, with the written file paths.
#[derive(Debug)]
pub struct RunOutputs {
    pub files: Vec<PathBuf>,
    pub solution: ClusteringSolution,
    pub outliers: Vec<usize>,
    pub elbow: ElbowSeries,
    pub silhouette: Option<SilhouetteReport>,
    pub embedding: EmbeddingResult,
    pub cr_summary: Option<ClusterInconsistencySummary>,
    pub aggregation: Option<AggregationOutcome>,
    /// True when the exact solver ran out of budget and the heuristic
    /// produced the reported solution.
    pub heuristic_fallback: bool,
    /// True when the elbow curve stops before `k_max` because the exact
    /// search budget was exhausted.
    pub elbow_truncated: bool,
}

/// Runs the full analysis and writes
/// `solution.json, delta.tsv, mds.tsv, silhouette.tsv, elbow.tsv,
/// dendrogram.nwk, dendrogram.tsv, boxplots.tsv, outliers.json, mds.svg,
/// elbow.svg, report.md` into `config.out_dir`.
pub fn run_cluster(dataset: &Dataset, config: &RunConfig) -> Result<RunOutputs> {
    let m = dataset.m();
    if m < 2 {
        return Err(Error::Config(format!(
            "clustering needs at least 2 matrices, got {m}"
        )));
    }
    if config.k == 0 || config.k > m {
        return Err(Error::Config(format!(
            "k must lie in 1..={m}, got {}",
            config.k
        )));
    }
    if let Some(t) = config.cr_threshold {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Config(format!(
                "cr-threshold must be non-negative, got {t}"
            )));
        }
    }
    let labels = dataset.labels();
    let all_complete = dataset.pcms.iter().all(|p| p.is_complete());

    let forbidden: BTreeSet<usize> = match config.cr_threshold {
        Some(threshold) => eligible_medoids_by_cr(&dataset.pcms, threshold, &config.ri)?,
        None => BTreeSet::new(),
    };

    // The default elbow range stops at the eligible-medoid count; an
    // explicit k_max beyond it is the caller's to answer for.
    let eligible = m - forbidden.len();
    let k_max = config
        .k_max
        .unwrap_or_else(|| m.min(10).min(eligible.max(1)));
    if k_max == 0 || k_max > m {
        return Err(Error::Config(format!(
            "k_max must lie in 1..={m}, got {k_max}"
        )));
    }

    let delta = DissimilarityMatrix::build(&dataset.pcms, config.measure)?;

    let problem =
        crate::kmedoids::KMedoidsProblem::with_forbidden(&delta, config.k, forbidden.clone())?;
    let (solution, heuristic_fallback) = match solve_exact(&problem) {
        Ok(sol) => (sol, false),
        Err(Error::SearchBudgetExceeded { .. }) => (solve_pam(&problem, config.seed)?, true),
        Err(e) => return Err(e),
    };

    let outliers = detect_outliers(&solution, config.outlier_max_size);
    // The elbow curve keeps its exact-optimum semantics: when some k
    // exhausts the search budget the curve is truncated there rather than
    // polluted with heuristic values.
    let (elbow_series, elbow_truncated) = match elbow(&delta, k_max, &forbidden) {
        Ok(series) => (series, false),
        Err(Error::SearchBudgetExceeded { .. }) => {
            let mut points = Vec::new();
            for k in 1..=k_max {
                let problem =
                    crate::kmedoids::KMedoidsProblem::with_forbidden(&delta, k, forbidden.clone())?;
                match solve_exact(&problem) {
                    Ok(sol) => points.push((k, sol.objective)),
                    Err(Error::SearchBudgetExceeded { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            (ElbowSeries { points }, true)
        }
        Err(e) => return Err(e),
    };
    let silhouette_report = if config.k >= 2 {
        Some(silhouette(&delta, &solution)?)
    } else {
        None
    };
    let embedding = embed(&delta, 2, config.seed)?;
    let dendro = agglomerate(&delta, config.linkage, config.dendro_transform);
    let crs: Option<Vec<f64>> = if all_complete {
        Some(
            dataset
                .pcms
                .iter()
                .map(|p| p.consistency_report(&config.ri).map(|r| r.cr))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let cr_summary = if all_complete {
        Some(cluster_cr_summary(&dataset.pcms, &solution, &config.ri)?)
    } else {
        None
    };
    let aggregation = if config.k == 1 && all_complete {
        Some(aggregate_by_medoid(&dataset.pcms, config.measure)?)
    } else {
        None
    };

    fs::create_dir_all(&config.out_dir)?;
    let mut files = Vec::new();
    let write = |name: &str, contents: String| -> Result<PathBuf> {
        let path = config.out_dir.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    };

    files.push(write("delta.tsv", delta.to_tsv())?);
    files.push(write("solution.json", solution.to_json(&labels))?);
    files.push(write(
        "mds.tsv",
        mds_tsv(&embedding, &solution, &labels, crs.as_deref()),
    )?);
    files.push(write(
        "silhouette.tsv",
        silhouette_tsv(silhouette_report.as_ref(), &solution, &labels),
    )?);
    files.push(write("elbow.tsv", elbow_series.to_tsv())?);
    files.push(write("dendrogram.nwk", dendro.to_newick())?);
    files.push(write("dendrogram.tsv", dendro.to_tsv())?);
    if let Some(summary) = &cr_summary {
        files.push(write("boxplots.tsv", summary.to_tsv(&labels))?);
    }
    files.push(write(
        "outliers.json",
        outliers_json(&outliers, &solution, &labels, config.outlier_max_size),
    )?);
    files.push(write("mds.svg", svg_scatter(&embedding, &solution))?);
    files.push(write("elbow.svg", svg_line(&elbow_series))?);
    files.push(write(
        "report.md",
        report_md(
            dataset,
            config,
            &solution,
            &outliers,
            &elbow_series,
            silhouette_report.as_ref(),
            &embedding,
            cr_summary.as_ref(),
            aggregation.as_ref(),
            heuristic_fallback,
            elbow_truncated,
        ),
    )?);

    Ok(RunOutputs {
        files,
        solution,
        outliers,
        elbow: elbow_series,
        silhouette: silhouette_report,
        embedding,
        cr_summary,
        aggregation,
        heuristic_fallback,
        elbow_truncated,
    })
}

/// `label, x, y, cluster, cr` rows; cluster ids are 1-based in medoid order.
pub fn mds_tsv(
    embedding: &EmbeddingResult,
    solution: &ClusteringSolution,
    labels: &[String],
    crs: Option<&[f64]>,
) -> String {
    let mut out = String::from("label\tx\ty\tcluster\tcr\n");
    for (i, label) in labels.iter().enumerate() {
        let cluster = solution
            .medoids
            .iter()
            .position(|&med| med == solution.assignment[i])
            .expect("assignment targets a medoid")
            + 1;
        let cr = crs.map(|c| sig17(c[i])).unwrap_or_default();
        out.push_str(&format!(
            "{label}\t{}\t{}\t{cluster}\t{cr}\n",
            sig17(embedding.coords[i][0]),
            sig17(embedding.coords[i][1]),
        ));
    }
    out
}

fn silhouette_tsv(
    report: Option<&SilhouetteReport>,
    solution: &ClusteringSolution,
    labels: &[String],
) -> String {
    let mut out = String::from("label\tmedoid\tsilhouette\n");
    let Some(report) = report else {
        out.push_str("# silhouette is undefined for a single cluster\n");
        return out;
    };
    for (i, label) in labels.iter().enumerate() {
        out.push_str(&format!(
            "{label}\t{}\t{}\n",
            labels[solution.assignment[i]],
            sig17(report.per_object[i])
        ));
    }
    out.push_str(&format!("# mean\t{}\n", sig17(report.mean)));
    out
}

fn outliers_json(
    outliers: &[usize],
    solution: &ClusteringSolution,
    labels: &[String],
    max_size: usize,
) -> String {
    #[derive(serde::Serialize)]
    struct Entry {
        medoid: String,
        members: Vec<String>,
    }
    #[derive(serde::Serialize)]
    struct Export {
        max_size: usize,
        outliers: Vec<Entry>,
    }
    let export = Export {
        max_size,
        outliers: outliers
            .iter()
            .map(|&med| Entry {
                medoid: labels[med].clone(),
                members: solution
                    .cluster_members(med)
                    .into_iter()
                    .map(|i| labels[i].clone())
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&export).expect("plain struct serializes");
    s.push('\n');
    s
}

#[allow(clippy::too_many_arguments)]
fn report_md(
    dataset: &Dataset,
    config: &RunConfig,
    solution: &ClusteringSolution,
    outliers: &[usize],
    elbow_series: &ElbowSeries,
    silhouette_report: Option<&SilhouetteReport>,
    embedding: &EmbeddingResult,
    cr_summary: Option<&ClusterInconsistencySummary>,
    aggregation: Option<&AggregationOutcome>,
    heuristic_fallback: bool,
    elbow_truncated: bool,
) -> String {
    let labels = dataset.labels();
    let mut md = String::new();
    md.push_str("# Clustering report\n\n");
    md.push_str(&format!(
        "- source: `{}` ({} matrices of order {})\n",
        dataset.source,
        dataset.m(),
        dataset.n
    ));
    md.push_str(&format!(
        "- measure: {}, k = {}, linkage: {}, seed: {}\n",
        config.measure, config.k, config.linkage, config.seed
    ));
    if let Some(t) = config.cr_threshold {
        md.push_str(&format!("- medoid eligibility: CR <= {}\n", dec3(t)));
    }
    if !dataset.warnings.is_empty() {
        md.push_str(&format!(
            "- ingestion repaired {} rounded reciprocal pair(s)\n",
            dataset.warnings.len()
        ));
    }
    md.push_str(&format!(
        "- solver: {} ({}), objective: {}\n",
        solution.solver,
        if solution.optimal {
            "certified optimum"
        } else {
            "local search"
        },
        dec3(solution.objective)
    ));
    if heuristic_fallback {
        md.push_str("- note: exact search exceeded its budget; heuristic result reported\n");
    }
    md.push('\n');

    md.push_str("## Clusters\n\n");
    for (c, (&med, size)) in solution
        .medoids
        .iter()
        .zip(solution.cluster_sizes())
        .enumerate()
    {
        md.push_str(&format!(
            "### Cluster {} — centre `{}`, {} member(s)\n\n",
            c + 1,
            labels[med],
            size
        ));
        let members: Vec<&str> = solution
            .cluster_members(med)
            .into_iter()
            .map(|i| labels[i].as_str())
            .collect();
        md.push_str(&format!("members: {}\n\n", members.join(", ")));
        md.push_str("centre matrix:\n\n```\n");
        for row in dataset.pcms[med].rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(dec3).unwrap_or_else(|| "-".to_string()))
                .collect();
            md.push_str(&cells.join("  "));
            md.push('\n');
        }
        md.push_str("```\n\n");
        if let Ok(w) = dataset.pcms[med].llsm_weights() {
            let ws: Vec<String> = w.weights().iter().map(|&x| dec3(x)).collect();
            let rank: Vec<String> = w.ranking().iter().map(|&i| (i + 1).to_string()).collect();
            md.push_str(&format!(
                "centre weights: ({}), ranking: {}\n\n",
                ws.join(", "),
                rank.join(" > ")
            ));
        }
    }

    if let Some(summary) = cr_summary {
        md.push_str("## Inconsistency per cluster (CR)\n\n");
        md.push_str("| cluster | min | Q1 | median | Q3 | max | outliers |\n");
        md.push_str("|---|---|---|---|---|---|---|\n");
        for (c, stats) in summary.clusters.iter().enumerate() {
            let outs: Vec<&str> = stats.outliers.iter().map(|&i| labels[i].as_str()).collect();
            md.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} |\n",
                c + 1,
                dec3(stats.min),
                dec3(stats.q1),
                dec3(stats.median),
                dec3(stats.q3),
                dec3(stats.max),
                outs.join(", ")
            ));
        }
        md.push('\n');
    }

    md.push_str("## Cluster-count diagnostics\n\n");
    md.push_str("| k | optimal objective |\n|---|---|\n");
    for &(k, obj) in &elbow_series.points {
        md.push_str(&format!("| {k} | {} |\n", dec3(obj)));
    }
    md.push('\n');
    if elbow_truncated {
        md.push_str("curve truncated: larger k exceeded the exact search budget\n\n");
    }
    if let Some(report) = silhouette_report {
        md.push_str(&format!(
            "mean silhouette at k = {}: {}\n\n",
            report.k,
            dec3(report.mean)
        ));
    }
    md.push_str(&format!(
        "MDS stress-1: {} (see `mds.tsv`/`mds.svg`)\n\n",
        dec3(embedding.stress)
    ));

    md.push_str("## Outliers\n\n");
    if outliers.is_empty() {
        md.push_str(&format!(
            "no cluster of size <= {} found\n",
            config.outlier_max_size
        ));
    } else {
        for &med in outliers {
            md.push_str(&format!(
                "- `{}` is isolated in its own cluster\n",
                labels[med]
            ));
        }
    }
    md.push('\n');

    if let Some(agg) = aggregation {
        md.push_str("## One-cluster aggregation\n\n");
        let ws: Vec<String> = agg.weights.weights().iter().map(|&x| dec3(x)).collect();
        let rank: Vec<String> = agg.ranking.iter().map(|&i| (i + 1).to_string()).collect();
        md.push_str(&format!(
            "medoid aggregate `{}` ({}), weights ({}), ranking {}\n\n",
            agg.aggregate.label(),
            agg.method,
            ws.join(", "),
            rank.join(" > ")
        ));
    }

    md
}

const PALETTE: [&str; 8] = [
    "#c23b3b", "#3b5bc2", "#2e8b57", "#c2883b", "#7a3bc2", "#3bb7c2", "#c23b8e", "#6b6b6b",
];

/// Minimal static scatter plot of the embedding, one colour per cluster,
/// medoids drawn larger.
fn svg_scatter(embedding: &EmbeddingResult, solution: &ClusteringSolution) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let xs: Vec<f64> = embedding.coords.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = embedding.coords.iter().map(|p| p[1]).collect();
    let span = |v: &[f64]| -> (f64, f64) {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    for (i, point) in embedding.coords.iter().enumerate() {
        let cluster = solution
            .medoids
            .iter()
            .position(|&med| med == solution.assignment[i])
            .expect("assignment targets a medoid");
        let colour = PALETTE[cluster % PALETTE.len()];
        let is_medoid = solution.medoids.contains(&i);
        let r = if is_medoid { 8.0 } else { 4.0 };
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\" fill=\"{colour}\" \
             fill-opacity=\"{}\"/>\n",
            sx(point[0]),
            sy(point[1]),
            if is_medoid { "1.0" } else { "0.6" },
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Minimal static line chart of the elbow curve.
fn svg_line(series: &ElbowSeries) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let k_max = series.points.last().map(|&(k, _)| k).unwrap_or(1) as f64;
    let obj_max = series
        .points
        .iter()
        .map(|&(_, o)| o)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-12);
    let sx = |k: f64| pad + (k - 1.0) / (k_max - 1.0).max(1.0) * (w - 2.0 * pad);
    let sy = |o: f64| h - pad - o / obj_max * (h - 2.0 * pad);

    let points: Vec<String> = series
        .points
        .iter()
        .map(|&(k, o)| format!("{:.2},{:.2}", sx(k as f64), sy(o)))
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad,
        h - pad,
        h - pad,
    );
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        points.join(" "),
        PALETTE[1]
    ));
    for p in &points {
        let (x, y) = p.split_once(',').expect("formatted as x,y");
        svg.push_str(&format!(
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{}\"/>\n",
            PALETTE[1]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;
    use crate::dataset::ingest_str;
    use crate::dataset::DataFormat;

    const BLOBS: &str = "\
# p1
1,2,4
0.5,1,2
0.25,0.5,1

# p2
1,2.2,4.4
0.45454545454545453,1,2
0.22727272727272727,0.5,1

# q1
1,0.5,0.25
2,1,0.5
4,2,1

# q2
1,0.45,0.22
2.2222222222222223,1,0.5
4.545454545454546,2,1
";

    fn run(dir: &Path) -> RunOutputs {
        let dataset = ingest_str(BLOBS, DataFormat::Csv, "blobs.csv").unwrap();
        let config = RunConfig::new(Measure::D1, 2, dir);
        run_cluster(&dataset, &config).unwrap()
    }

    #[test]
    fn run_cluster_recovers_planted_blobs_and_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(dir.path());
        // The two planted groups are separated.
        let sizes = out.solution.cluster_sizes();
        assert_eq!(sizes, vec![2, 2]);
        let a0 = out.solution.assignment[0];
        assert_eq!(out.solution.assignment[1], a0);
        assert_ne!(out.solution.assignment[2], a0);
        for name in [
            "delta.tsv",
            "solution.json",
            "mds.tsv",
            "silhouette.tsv",
            "elbow.tsv",
            "dendrogram.nwk",
            "dendrogram.tsv",
            "boxplots.tsv",
            "outliers.json",
            "mds.svg",
            "elbow.svg",
            "report.md",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let out1 = run(dir1.path());
        let out2 = run(dir2.path());
        assert_eq!(out1.files.len(), out2.files.len());
        for (f1, f2) in out1.files.iter().zip(&out2.files) {
            let b1 = fs::read(f1).unwrap();
            let b2 = fs::read(f2).unwrap();
            assert_eq!(b1, b2, "{} differs", f1.display());
        }
    }

    #[test]
    fn k1_report_contains_the_medoid_aggregation() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = ingest_str(BLOBS, DataFormat::Csv, "blobs.csv").unwrap();
        let config = RunConfig::new(Measure::D3, 1, dir.path());
        let out = run_cluster(&dataset, &config).unwrap();
        let agg = out.aggregation.expect("k = 1 aggregates");
        assert_eq!(agg.aggregate.label(), {
            let med = out.solution.medoids[0];
            dataset.pcms[med].label()
        });
        let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(report.contains("One-cluster aggregation"));
    }

    #[test]
    fn cr_cap_shrinks_the_default_elbow_range() {
        // One matrix is forbidden by the CR cap; the default elbow range
        // must stop at the eligible count instead of failing at k = m.
        let near = crate::pcm::Pcm::from_rows(
            "n",
            &[
                vec![1.0, 2.0, 4.0],
                vec![0.5, 1.0, 2.0],
                vec![0.25, 0.5, 1.0],
            ],
        )
        .unwrap();
        let wild = crate::pcm::Pcm::from_rows(
            "wild",
            &[
                vec![1.0, 4.0, 0.25],
                vec![0.25, 1.0, 4.0],
                vec![4.0, 0.25, 1.0],
            ],
        )
        .unwrap();
        let mut pcms = Vec::new();
        for i in 0..4 {
            let mut p = near.rows();
            p[0][1] = Some(2.0 + 0.01 * i as f64);
            p[1][0] = Some(1.0 / (2.0 + 0.01 * i as f64));
            pcms.push(crate::pcm::Pcm::new(format!("n{i}"), p).unwrap());
        }
        pcms.push(wild);
        let dataset = Dataset::from_pcms(pcms, "capped").unwrap();

        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::new(Measure::D3, 2, dir.path());
        config.cr_threshold = Some(0.1);
        let out = run_cluster(&dataset, &config).unwrap();
        assert_eq!(out.elbow.points.len(), 4); // 5 matrices, 4 eligible
        assert!(!out.solution.medoids.contains(&4));

        // An explicit k_max beyond the eligible count still errors.
        config.k_max = Some(5);
        assert!(matches!(
            run_cluster(&dataset, &config).unwrap_err(),
            Error::Infeasible { .. }
        ));
    }

    #[test]
    fn planted_typo_lands_in_outliers_json() {
        use crate::synthetic::{perturbed_consistent_pcm, with_reciprocal_typo};
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shared = [9.0, 5.0, 2.0, 1.0, 0.6, 0.4, 0.3, 0.2];
        let mut pcms: Vec<_> = (0..12)
            .map(|i| perturbed_consistent_pcm(format!("dm{i}"), &shared, 0.2, &mut rng))
            .collect();
        pcms[5] = with_reciprocal_typo(&pcms[5], 0, 7);
        let dataset = Dataset::from_pcms(pcms, "synthetic").unwrap();

        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::new(Measure::D3, 2, dir.path());
        let out = run_cluster(&dataset, &config).unwrap();
        assert_eq!(out.outliers, vec![5]);

        let json = fs::read_to_string(dir.path().join("outliers.json")).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["outliers"][0]["medoid"], "dm5-typo");
        assert_eq!(value["outliers"][0]["members"][0], "dm5-typo");
    }

    #[test]
    fn bad_config_is_rejected() {
        let dataset = ingest_str(BLOBS, DataFormat::Csv, "blobs.csv").unwrap();
        let mut config = RunConfig::new(Measure::D1, 9, "unused");
        assert!(matches!(
            run_cluster(&dataset, &config).unwrap_err(),
            Error::Config(_)
        ));
        config.k = 2;
        config.cr_threshold = Some(-0.5);
        assert!(matches!(
            run_cluster(&dataset, &config).unwrap_err(),
            Error::Config(_)
        ));
    }
}
