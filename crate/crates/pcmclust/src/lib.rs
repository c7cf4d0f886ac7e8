//! Clustering, weighting and aggregation tools for pairwise comparison
//! matrices (PCMs).
//!
//! In group decision making every participant can provide a PCM of
//! preference ratios. This crate groups such matrices with an exact
//! k-medoids optimisation over PCM-specific dissimilarity measures, and
//! provides the surrounding toolkit: consistency indices, geometric-mean
//! weights, outlier detection, cluster-count diagnostics (elbow, silhouette,
//! dendrograms), 2-D embeddings for plots, and aggregation of a group into a
//! single matrix either by entrywise geometric means or by promoting the
//! 1-medoid to group representative.
//!
//! ```
//! use pcmclust::{DissimilarityMatrix, KMedoidsProblem, Measure, Pcm};
//!
//! let opinions = vec![
//!     Pcm::from_rows("ann", &[vec![1.0, 4.0], vec![0.25, 1.0]])?,
//!     Pcm::from_rows("ben", &[vec![1.0, 5.0], vec![0.2, 1.0]])?,
//!     Pcm::from_rows("eve", &[vec![1.0, 0.2], vec![5.0, 1.0]])?,
//! ];
//! let delta = DissimilarityMatrix::build(&opinions, Measure::D1)?;
//! let solution = pcmclust::solve_exact(&KMedoidsProblem::new(&delta, 2)?)?;
//! // ann and ben agree; eve holds the opposite view.
//! assert_eq!(solution.assignment[0], solution.assignment[1]);
//! assert_ne!(solution.assignment[0], solution.assignment[2]);
//! # Ok::<(), pcmclust::Error>(())
//! ```
//!
//! The `pcmclust` binary (in the companion CLI crate) exposes the same
//! pipeline as subcommands; the book under `book/` walks through the
//! concepts chapter by chapter.

// Index loops over square matrices stay; iterator chains obscure the math.
#![allow(clippy::needless_range_loop)]

pub mod aggregate;
pub mod dataset;
pub mod diagnostics;
pub mod dissim;
mod error;
pub mod kmedoids;
pub mod mds;
pub mod pcm;
pub mod pipeline;
pub mod synthetic;
mod textfmt;

pub use aggregate::{
    aggregate_by_medoid, aggregate_geometric, aggregate_priorities, compare_rankings,
    AggregationMethod, AggregationOutcome, RankingComparison,
};
pub use dataset::{ingest, ingest_str, DataFormat, Dataset, IngestWarning};
pub use diagnostics::{
    agglomerate, cluster_cr_summary, elbow, silhouette, BoxplotStats, ClusterInconsistencySummary,
    Dendrogram, ElbowSeries, HeightTransform, Linkage, Merge, SilhouetteReport,
};
pub use dissim::{dissim, DissimilarityMatrix, Measure};
pub use error::{Error, Result};
pub use kmedoids::{
    detect_outliers, eligible_medoids_by_cr, solve_exact, solve_pam, ClusteringSolution,
    KMedoidsProblem, Solver,
};
pub use mds::{embed, embed_with, EmbedOptions, EmbeddingResult};
pub use pcm::{InconsistencyReport, Pcm, RiTable, WeightVector};
pub use pipeline::{run_cluster, RunConfig, RunOutputs};

// The book's code listings double as doc tests so the guide can never drift
// from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pcm.md")]
    mod pcm {}
    #[doc = include_str!("../../../book/src/dissimilarity.md")]
    mod dissimilarity {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/embedding.md")]
    mod embedding {}
    #[doc = include_str!("../../../book/src/aggregation.md")]
    mod aggregation {}
}
