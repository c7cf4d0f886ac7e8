//! Low-dimensional embedding of a dissimilarity matrix for visualisation.
//!
//! Classical multidimensional scaling (double-centering the squared
//! dissimilarities and taking the top eigenpairs) produces the initial
//! configuration; SMACOF stress majorization then refines it. Non-metric
//! input makes the centered Gram matrix indefinite; negative eigenvalues are
//! truncated to zero, and the full spectrum is reported so the truncated
//! mass can be judged when reading the picture.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};

/// Coordinates approximating a dissimilarity matrix, with fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    /// One point per object, `dim` coordinates each, centered at the origin.
    pub coords: Vec<Vec<f64>>,
    /// Kruskal stress-1 of the final configuration:
    /// `sqrt(sum (delta_ij - d_ij)^2 / sum d_ij^2)`; 0 for a perfect fit.
    pub stress: f64,
    /// Eigenvalues of the double-centered matrix, descending. Negative
    /// values measure how far the input is from being Euclidean.
    pub eigenvalue_spectrum: Vec<f64>,
    /// SMACOF iterations actually run.
    pub iterations: usize,
    /// Raw stress `sum_{i<j} (delta_ij - d_ij)^2` before each update,
    /// including the initial configuration; non-increasing by construction.
    pub stress_history: Vec<f64>,
}

/// Embedding parameters. `max_iter = 0` gives the classical solution only.
#[derive(Debug, Clone)]
pub struct EmbedOptions {
    pub dim: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative raw-stress improvement drops below this.
    pub rel_tol: f64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            dim: 2,
            seed: 0,
            max_iter: 500,
            rel_tol: 1e-8,
        }
    }
}

/// Embeds into `dim` dimensions (2 reproduces the usual scatter plots).
pub fn embed(delta: &DissimilarityMatrix, dim: usize, seed: u64) -> Result<EmbeddingResult> {
    embed_with(
        delta,
        &EmbedOptions {
            dim,
            seed,
            ..EmbedOptions::default()
        },
    )
}

pub fn embed_with(delta: &DissimilarityMatrix, opts: &EmbedOptions) -> Result<EmbeddingResult> {
    let m = delta.m();
    let dim = opts.dim;
    if dim == 0 || m < dim + 1 {
        return Err(Error::Config(format!(
            "embedding into {dim} dimensions needs at least {} objects, got {m}",
            dim + 1
        )));
    }

    let degenerate = (0..m).all(|i| (0..m).all(|j| delta.get(i, j) == 0.0));
    if degenerate {
        // All objects coincide: every point at the origin is the exact answer.
        return Ok(EmbeddingResult {
            coords: vec![vec![0.0; dim]; m],
            stress: 0.0,
            eigenvalue_spectrum: vec![0.0; m],
            iterations: 0,
            stress_history: vec![0.0],
        });
    }

    // Classical MDS: B = -1/2 J D^2 J via direct double-centering.
    let sq = |i: usize, j: usize| {
        let d = delta.get(i, j);
        d * d
    };
    let mut row_mean = vec![0.0; m];
    let mut grand = 0.0;
    for i in 0..m {
        let s: f64 = (0..m).map(|j| sq(i, j)).sum();
        row_mean[i] = s / m as f64;
        grand += s;
    }
    grand /= (m * m) as f64;
    let mut b = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            b[i][j] = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
        }
    }

    let eigen = jacobi_eigen(&b);
    let eigenvalue_spectrum: Vec<f64> = eigen.iter().map(|(v, _)| *v).collect();
    let mut coords = vec![vec![0.0; dim]; m];
    for (t, (value, vector)) in eigen.iter().take(dim).enumerate() {
        // Negative (non-Euclidean) directions are truncated: the axis stays
        // zero, mirroring a rank-deficient configuration.
        let scale = value.max(0.0).sqrt();
        for i in 0..m {
            coords[i][t] = vector[i] * scale;
        }
    }

    // SMACOF refinement. Coincident points with positive dissimilarity can
    // stall the majorization, so such configurations get a tiny seeded
    // jitter first.
    let max_delta = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| delta.get(i, j))
        .fold(0.0f64, f64::max);
    let needs_jitter = (0..m).any(|i| {
        (i + 1..m).any(|j| delta.get(i, j) > 0.0 && point_dist(&coords[i], &coords[j]) == 0.0)
    });
    if needs_jitter && opts.max_iter > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let amp = 1e-6 * max_delta;
        for point in &mut coords {
            for c in point.iter_mut() {
                *c += rng.random_range(-amp..=amp);
            }
        }
    }

    let mut stress_history = vec![raw_stress(delta, &coords)];
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let prev = *stress_history.last().expect("history starts non-empty");
        if prev == 0.0 {
            break;
        }
        coords = guttman_transform(delta, &coords);
        let current = raw_stress(delta, &coords);
        assert!(
            current <= prev * (1.0 + 1e-9) + 1e-15,
            "SMACOF stress must be non-increasing ({prev} -> {current})"
        );
        stress_history.push(current);
        iterations += 1;
        if (prev - current) <= opts.rel_tol * prev {
            break;
        }
    }

    // Center: classical coordinates are centered and the Guttman transform
    // preserves that, but jitter may have shifted the mean.
    for t in 0..dim {
        let mean: f64 = coords.iter().map(|p| p[t]).sum::<f64>() / m as f64;
        for point in &mut coords {
            point[t] -= mean;
        }
    }

    let stress = stress_one(delta, &coords);
    Ok(EmbeddingResult {
        coords,
        stress,
        eigenvalue_spectrum,
        iterations,
        stress_history,
    })
}

fn point_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Raw stress `sum_{i<j} (delta_ij - d_ij)^2`.
pub fn raw_stress(delta: &DissimilarityMatrix, coords: &[Vec<f64>]) -> f64 {
    let m = delta.m();
    let mut acc = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let r = delta.get(i, j) - point_dist(&coords[i], &coords[j]);
            acc += r * r;
        }
    }
    acc
}

fn stress_one(delta: &DissimilarityMatrix, coords: &[Vec<f64>]) -> f64 {
    let m = delta.m();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = point_dist(&coords[i], &coords[j]);
            let r = delta.get(i, j) - d;
            num += r * r;
            den += d * d;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// One majorization step `X <- (1/m) B(X) X`; never increases raw stress.
fn guttman_transform(delta: &DissimilarityMatrix, coords: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = delta.m();
    let dim = coords[0].len();
    let mut bmat = vec![vec![0.0; m]; m];
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i == j {
                continue;
            }
            let d = point_dist(&coords[i], &coords[j]);
            let v = if d > 0.0 { -delta.get(i, j) / d } else { 0.0 };
            bmat[i][j] = v;
            diag -= v;
        }
        bmat[i][i] = diag;
    }
    let mut next = vec![vec![0.0; dim]; m];
    for i in 0..m {
        for t in 0..dim {
            let mut acc = 0.0;
            for j in 0..m {
                acc += bmat[i][j] * coords[j][t];
            }
            next[i][t] = acc / m as f64;
        }
    }
    next
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
/// Returns `(eigenvalue, eigenvector)` pairs sorted by descending value.
fn jacobi_eigen(sym: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = sym.len();
    let mut a: Vec<Vec<f64>> = sym.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob: f64 = sym
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in v.iter_mut() {
                    let (vip, viq) = (row[p], row[q]);
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|t| (a[t][t], (0..n).map(|i| v[i][t]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs
}
