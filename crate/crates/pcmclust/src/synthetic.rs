//! Seeded generators of synthetic comparison matrices, for experimentation
//! and for exercising the pipeline without survey data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::pcm::Pcm;

/// A matrix whose upper-triangle entries are drawn log-uniformly from
/// `[1/scale, scale]` (the usual judgement scale is 9).
pub fn random_pcm(label: impl Into<String>, n: usize, scale: f64, seed: u64) -> Pcm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pcm_with(label, n, scale, &mut rng)
}

/// Like [`random_pcm`] but drawing from a caller-provided generator, so a
/// whole dataset can come from one seed.
pub fn random_pcm_with(label: impl Into<String>, n: usize, scale: f64, rng: &mut impl Rng) -> Pcm {
    assert!(n >= 2 && scale > 1.0);
    let lim = scale.ln();
    let mut grid = vec![vec![None; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-lim..=lim).exp();
            grid[i][j] = Some(v);
            grid[j][i] = Some(1.0 / v);
        }
    }
    Pcm::new(label, grid).expect("generated grid is reciprocal by construction")
}

/// A near-consistent matrix: the ratio matrix of `weights` with every
/// upper-triangle entry multiplied by `exp(e)`, `e` uniform in
/// `[-noise, noise]` on the log scale.
pub fn perturbed_consistent_pcm(
    label: impl Into<String>,
    weights: &[f64],
    noise: f64,
    rng: &mut impl Rng,
) -> Pcm {
    let n = weights.len();
    assert!(n >= 2);
    let mut grid = vec![vec![None; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = weights[i] / weights[j] * rng.random_range(-noise..=noise).exp();
            grid[i][j] = Some(v);
            grid[j][i] = Some(1.0 / v);
        }
    }
    Pcm::new(label, grid).expect("generated grid is reciprocal by construction")
}

/// Replaces entry `(i, j)` by its reciprocal (mirroring `(j, i)` to keep the
/// matrix valid): the classic data-entry mistake of writing `1/x` for `x`.
pub fn with_reciprocal_typo(pcm: &Pcm, i: usize, j: usize) -> Pcm {
    assert!(i != j, "the diagonal cannot carry a reciprocal typo");
    let mut grid = pcm.rows();
    let v = grid[i][j].expect("typo target must be present");
    grid[i][j] = Some(1.0 / v);
    grid[j][i] = Some(v);
    Pcm::new(format!("{}-typo", pcm.label()), grid).expect("flipping a pair keeps the grid valid")
}
