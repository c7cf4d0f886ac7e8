//! Command-line interface over the pcmclust library.
//!
//! Exit codes: 0 ok, 2 parse error, 3 validation error, 4 solver error,
//! 5 configuration error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pcmclust::{
    agglomerate, aggregate_by_medoid, aggregate_geometric, aggregate_priorities, detect_outliers,
    elbow, eligible_medoids_by_cr, embed, ingest, run_cluster, silhouette, solve_exact, DataFormat,
    Dataset, DissimilarityMatrix, Error, HeightTransform, KMedoidsProblem, Linkage, Measure,
    RiTable, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "pcmclust",
    about = "Cluster, diagnose and aggregate pairwise comparison matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
}

impl From<MeasureArg> for Measure {
    fn from(value: MeasureArg) -> Self {
        match value {
            MeasureArg::D1 => Measure::D1,
            MeasureArg::D2 => Measure::D2,
            MeasureArg::D3 => Measure::D3,
            MeasureArg::D4 => Measure::D4,
            MeasureArg::D5 => Measure::D5,
            MeasureArg::D6 => Measure::D6,
            MeasureArg::D7 => Measure::D7,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Single,
    Complete,
}

impl From<LinkageArg> for Linkage {
    fn from(value: LinkageArg) -> Self {
        match value {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for DataFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Csv => DataFormat::Csv,
            FormatArg::Json => DataFormat::Json,
        }
    }
}

/// Arguments shared by every subcommand that reads a dataset.
#[derive(Args)]
struct InputArgs {
    /// Dataset file (CSV blocks or JSON array)
    path: PathBuf,
    /// Dataset file format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset, Error> {
        ingest(&self.path, self.format.into())
    }
}

#[derive(Args)]
struct RiArg {
    /// Override random-index values, e.g. --ri 4=0.89,5=1.11
    #[arg(long, value_parser = parse_ri_overrides)]
    ri: Option<RiOverrides>,
}

#[derive(Clone, Debug)]
struct RiOverrides(Vec<(usize, f64)>);

fn parse_ri_overrides(s: &str) -> Result<RiOverrides, String> {
    let mut overrides = Vec::new();
    for part in s.split(',') {
        let (order, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected order=value, got '{part}'"))?;
        let order: usize = order
            .trim()
            .parse()
            .map_err(|_| format!("invalid order '{order}'"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("invalid value '{value}'"))?;
        overrides.push((order, value));
    }
    Ok(RiOverrides(overrides))
}

impl RiArg {
    fn table(&self) -> RiTable {
        let mut table = RiTable::saaty();
        if let Some(RiOverrides(entries)) = &self.ri {
            for &(order, value) in entries {
                table = table.with_override(order, value);
            }
        }
        table
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and report ingestion warnings
    Validate(InputArgs),
    /// Compute the pairwise dissimilarity matrix (TSV)
    Dissim {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full clustering analysis and write all result files
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        /// Number of clusters
        #[arg(long)]
        k: usize,
        /// Upper end of the elbow curve (default min(m, 10))
        #[arg(long)]
        k_max: Option<usize>,
        /// Forbid matrices with CR above this from being cluster centres
        #[arg(long)]
        cr_threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "average")]
        linkage: LinkageArg,
        /// Square dissimilarities before building the dendrogram
        #[arg(long)]
        square_heights: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Flag clusters up to this size as outliers
        #[arg(long, default_value_t = 1)]
        outlier_max_size: usize,
        #[command(flatten)]
        ri: RiArg,
        /// Output directory
        #[arg(long, default_value = "pcmclust-out")]
        out: PathBuf,
    },
    /// Exact optimal objective for k = 1..k_max (TSV)
    Elbow {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        #[arg(long)]
        k_max: usize,
        #[arg(long)]
        cr_threshold: Option<f64>,
        #[command(flatten)]
        ri: RiArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Silhouette values at a fixed k, or mean silhouettes for k = 2..k_max
    Silhouette {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        #[arg(long, conflicts_with = "k_max")]
        k: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Agglomerative dendrogram (Newick, and optionally the merge table)
    Dendro {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        #[arg(long, value_enum, default_value = "average")]
        linkage: LinkageArg,
        /// Square dissimilarities before merging
        #[arg(long)]
        square_heights: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the merge table TSV here
        #[arg(long)]
        merges: Option<PathBuf>,
    },
    /// 2-D embedding of the dissimilarity matrix (TSV: label, x, y, cluster, cr)
    Mds {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        /// Cluster the objects first and tag each point (1 = no clustering)
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        ri: RiArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric-mean weights and rankings per matrix (TSV)
    Weights {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consistency statistics per matrix (TSV)
    Cr {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        ri: RiArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate the whole dataset into one matrix (JSON)
    Aggregate {
        #[command(flatten)]
        input: InputArgs,
        /// geometric: entrywise geometric mean; medoid: 1-medoid centre;
        /// priorities: geometric mean of per-matrix weight vectors
        #[arg(long, value_enum, default_value = "geometric")]
        method: AggregateMethodArg,
        /// Dissimilarity measure for the medoid method
        #[arg(long, value_enum, default_value = "d1")]
        measure: MeasureArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect singleton (or small) clusters (JSON)
    Outliers {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "d3")]
        measure: MeasureArg,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        max_size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateMethodArg {
    Geometric,
    Medoid,
    Priorities,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::BadShape { .. }
        | Error::BadDiagonal { .. }
        | Error::NonReciprocal { .. }
        | Error::NonPositiveEntry { .. }
        | Error::DisconnectedGraph { .. }
        | Error::IncompleteMatrix { .. }
        | Error::DuplicateLabel { .. }
        | Error::OrderMismatch { .. }
        | Error::NoCommonComparisons { .. }
        | Error::EmptyInput
        | Error::LengthMismatch { .. } => 3,
        Error::Infeasible { .. }
        | Error::SearchBudgetExceeded { .. }
        | Error::NoConvergence { .. }
        | Error::SingleCluster => 4,
        Error::MissingRandomIndex { .. } | Error::Config(_) | Error::Io(_) => 5,
    }
}

/// Writes to the file when given, otherwise to stdout.
fn emit(out: Option<&Path>, contents: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, contents).map_err(Error::from),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate(input) => {
            let dataset = input.load()?;
            for warning in &dataset.warnings {
                eprintln!("warning: {warning}");
            }
            let complete = dataset.pcms.iter().filter(|p| p.is_complete()).count();
            println!(
                "ok: {} matrices of order {} ({} complete, {} repaired pair(s))",
                dataset.m(),
                dataset.n,
                complete,
                dataset.warnings.len()
            );
            Ok(())
        }
        Command::Dissim {
            input,
            measure,
            out,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            emit(out.as_deref(), &delta.to_tsv())
        }
        Command::Cluster {
            input,
            measure,
            k,
            k_max,
            cr_threshold,
            linkage,
            square_heights,
            seed,
            outlier_max_size,
            ri,
            out,
        } => {
            let dataset = input.load()?;
            for warning in &dataset.warnings {
                eprintln!("warning: {warning}");
            }
            let config = RunConfig {
                measure: measure.into(),
                k,
                k_max,
                cr_threshold,
                linkage: linkage.into(),
                dendro_transform: if square_heights {
                    HeightTransform::Square
                } else {
                    HeightTransform::Identity
                },
                ri: ri.table(),
                seed,
                outlier_max_size,
                out_dir: out,
            };
            let outputs = run_cluster(&dataset, &config)?;
            println!(
                "wrote {} files to {} (objective {:.6}, solver {})",
                outputs.files.len(),
                config.out_dir.display(),
                outputs.solution.objective,
                outputs.solution.solver
            );
            Ok(())
        }
        Command::Elbow {
            input,
            measure,
            k_max,
            cr_threshold,
            ri,
            out,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            let forbidden = match cr_threshold {
                Some(t) => eligible_medoids_by_cr(&dataset.pcms, t, &ri.table())?,
                None => BTreeSet::new(),
            };
            let series = elbow(&delta, k_max, &forbidden)?;
            emit(out.as_deref(), &series.to_tsv())
        }
        Command::Silhouette {
            input,
            measure,
            k,
            k_max,
            out,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            match (k, k_max) {
                (Some(k), None) => {
                    let solution = solve_exact(&KMedoidsProblem::new(&delta, k)?)?;
                    let report = silhouette(&delta, &solution)?;
                    let mut text = String::from("label\tmedoid\tsilhouette\n");
                    let labels = dataset.labels();
                    for (i, label) in labels.iter().enumerate() {
                        text.push_str(&format!(
                            "{label}\t{}\t{:.16e}\n",
                            labels[solution.assignment[i]], report.per_object[i]
                        ));
                    }
                    text.push_str(&format!("# mean\t{:.16e}\n", report.mean));
                    emit(out.as_deref(), &text)
                }
                (None, Some(k_max)) => {
                    let mut text = String::from("k\tmean_silhouette\n");
                    for k in 2..=k_max.min(delta.m()) {
                        let solution = solve_exact(&KMedoidsProblem::new(&delta, k)?)?;
                        let report = silhouette(&delta, &solution)?;
                        text.push_str(&format!("{k}\t{:.16e}\n", report.mean));
                    }
                    emit(out.as_deref(), &text)
                }
                _ => Err(Error::Config(
                    "pass exactly one of --k or --k-max".to_string(),
                )),
            }
        }
        Command::Dendro {
            input,
            measure,
            linkage,
            square_heights,
            out,
            merges,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            let transform = if square_heights {
                HeightTransform::Square
            } else {
                HeightTransform::Identity
            };
            let dendro = agglomerate(&delta, linkage.into(), transform);
            emit(out.as_deref(), &dendro.to_newick())?;
            if let Some(path) = merges {
                std::fs::write(path, dendro.to_tsv())?;
            }
            Ok(())
        }
        Command::Mds {
            input,
            measure,
            k,
            seed,
            ri,
            out,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            let solution = solve_exact(&KMedoidsProblem::new(&delta, k)?)?;
            let embedding = embed(&delta, 2, seed)?;
            let crs: Option<Vec<f64>> = if dataset.pcms.iter().all(|p| p.is_complete()) {
                Some(
                    dataset
                        .pcms
                        .iter()
                        .map(|p| p.consistency_report(&ri.table()).map(|r| r.cr))
                        .collect::<Result<_, _>>()?,
                )
            } else {
                None
            };
            emit(
                out.as_deref(),
                &pcmclust::pipeline::mds_tsv(
                    &embedding,
                    &solution,
                    &dataset.labels(),
                    crs.as_deref(),
                ),
            )
        }
        Command::Weights { input, out } => {
            let dataset = input.load()?;
            let mut text = String::from("label");
            for i in 1..=dataset.n {
                text.push_str(&format!("\tw{i}"));
            }
            text.push_str("\tranking\n");
            for pcm in &dataset.pcms {
                let w = pcm.llsm_weights()?;
                text.push_str(pcm.label());
                for &wi in w.weights() {
                    text.push_str(&format!("\t{wi:.16e}"));
                }
                let rank: Vec<String> = w.ranking().iter().map(|&i| (i + 1).to_string()).collect();
                text.push_str(&format!("\t{}\n", rank.join(">")));
            }
            emit(out.as_deref(), &text)
        }
        Command::Cr { input, ri, out } => {
            let dataset = input.load()?;
            let table = ri.table();
            let mut text = String::from("label\tlambda_max\tci\tcr\tri_used\n");
            for pcm in &dataset.pcms {
                let report = pcm.consistency_report(&table)?;
                text.push_str(&format!(
                    "{}\t{:.16e}\t{:.16e}\t{:.16e}\t{}\n",
                    pcm.label(),
                    report.lambda_max,
                    report.ci,
                    report.cr,
                    report.ri_used
                ));
            }
            emit(out.as_deref(), &text)
        }
        Command::Aggregate {
            input,
            method,
            measure,
            out,
        } => {
            let dataset = input.load()?;
            let text = match method {
                AggregateMethodArg::Geometric => aggregate_geometric(&dataset.pcms)?.to_json(),
                AggregateMethodArg::Medoid => {
                    aggregate_by_medoid(&dataset.pcms, measure.into())?.to_json()
                }
                AggregateMethodArg::Priorities => {
                    let w = aggregate_priorities(&dataset.pcms)?;
                    let ranking: Vec<usize> = w.ranking().iter().map(|&i| i + 1).collect();
                    let mut s = serde_json_weights(w.weights(), &ranking);
                    s.push('\n');
                    s
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Outliers {
            input,
            measure,
            k,
            max_size,
            out,
        } => {
            let dataset = input.load()?;
            let delta = DissimilarityMatrix::build(&dataset.pcms, measure.into())?;
            let solution = solve_exact(&KMedoidsProblem::new(&delta, k)?)?;
            let outliers = detect_outliers(&solution, max_size);
            let labels = dataset.labels();
            let mut text = String::from("{\n  \"outliers\": [");
            let entries: Vec<String> = outliers
                .iter()
                .map(|&med| format!("\"{}\"", labels[med]))
                .collect();
            text.push_str(&entries.join(", "));
            text.push_str("]\n}\n");
            emit(out.as_deref(), &text)
        }
    }
}

/// Minimal JSON for the priorities aggregation method, which has no matrix.
fn serde_json_weights(weights: &[f64], ranking: &[usize]) -> String {
    let ws: Vec<String> = weights.iter().map(|w| format!("{w}")).collect();
    let rs: Vec<String> = ranking.iter().map(|r| r.to_string()).collect();
    format!(
        "{{\n  \"method\": \"priorities_geometric_mean\",\n  \"weights\": [{}],\n  \"ranking\": [{}]\n}}",
        ws.join(", "),
        rs.join(", ")
    )
}
