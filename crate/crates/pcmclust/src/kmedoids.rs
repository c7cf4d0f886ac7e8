//! Exact and heuristic k-medoids solvers over a dissimilarity matrix.
//!
//! The underlying 0/1 program picks k objects as cluster centres (`y_j = 1`)
//! and assigns every object to exactly one centre (`x_ij = 1` only where
//! `y_j = 1`), minimising the total assignment dissimilarity. Once the medoid
//! set is fixed the optimal assignment is simply nearest-medoid, so the exact
//! solver searches over medoid subsets only: plain enumeration while the
//! subset count is small, branch-and-bound with a nearest-medoid lower bound
//! beyond that. Both return certified optima; the PAM-style heuristic is the
//! fallback when the node budget runs out.
//!
//! Medoid eligibility constraints (for instance an inconsistency cap on the
//! cluster centres) enter as a forbidden set, which fixes the corresponding
//! `y_j` to zero and keeps the program linear.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::pcm::{Pcm, RiTable};

/// Subset-count threshold below which the exact solver enumerates all medoid
/// subsets instead of branching.
const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Node budget of the branch-and-bound search.
const NODE_BUDGET: u64 = 10_000_000;

/// A k-medoids instance: dissimilarities, cluster count, and objects banned
/// from serving as medoids.
#[derive(Debug, Clone)]
pub struct KMedoidsProblem<'a> {
    delta: &'a DissimilarityMatrix,
    k: usize,
    forbidden: BTreeSet<usize>,
}

impl<'a> KMedoidsProblem<'a> {
    pub fn new(delta: &'a DissimilarityMatrix, k: usize) -> Result<Self> {
        Self::with_forbidden(delta, k, BTreeSet::new())
    }

    /// Fixes `y_j = 0` for every index in `forbidden`.
    pub fn with_forbidden(
        delta: &'a DissimilarityMatrix,
        k: usize,
        forbidden: BTreeSet<usize>,
    ) -> Result<Self> {
        let m = delta.m();
        if let Some(&bad) = forbidden.iter().find(|&&i| i >= m) {
            return Err(Error::Config(format!(
                "forbidden medoid index {bad} out of range (m = {m})"
            )));
        }
        let eligible = m - forbidden.len();
        if k == 0 || k > eligible {
            return Err(Error::Infeasible { k, eligible });
        }
        Ok(Self {
            delta,
            k,
            forbidden,
        })
    }

    pub fn delta(&self) -> &DissimilarityMatrix {
        self.delta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn forbidden(&self) -> &BTreeSet<usize> {
        &self.forbidden
    }

    fn eligible(&self) -> Vec<usize> {
        (0..self.delta.m())
            .filter(|i| !self.forbidden.contains(i))
            .collect()
    }
}

/// Which solver produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Heuristic,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solver::Exact => write!(f, "exact"),
            Solver::Heuristic => write!(f, "heuristic"),
        }
    }
}

/// A clustering: medoid set, nearest-medoid assignment and objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringSolution {
    /// Medoid object indices, ascending.
    pub medoids: Vec<usize>,
    /// `assignment[i]` is the medoid (object index) serving object `i`; each
    /// medoid serves itself.
    pub assignment: Vec<usize>,
    /// Total dissimilarity of objects to their medoids.
    pub objective: f64,
    /// Whether the solution is certified globally optimal.
    pub optimal: bool,
    pub solver: Solver,
}

impl ClusteringSolution {
    pub fn k(&self) -> usize {
        self.medoids.len()
    }

    /// Objects served by `medoid`, in index order (includes the medoid).
    pub fn cluster_members(&self, medoid: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| (m == medoid).then_some(i))
            .collect()
    }

    /// Cluster sizes in medoid order.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.medoids
            .iter()
            .map(|&med| self.assignment.iter().filter(|&&a| a == med).count())
            .collect()
    }

    /// JSON export with labels resolved: medoids, per-object assignment,
    /// objective, solver tag and optimality flag.
    pub fn to_json(&self, labels: &[String]) -> String {
        let export = SolutionExport {
            k: self.k(),
            objective: self.objective,
            optimal: self.optimal,
            solver: self.solver,
            medoids: self.medoids.iter().map(|&i| labels[i].clone()).collect(),
            assignment: self
                .assignment
                .iter()
                .enumerate()
                .map(|(i, &m)| AssignmentExport {
                    object: labels[i].clone(),
                    medoid: labels[m].clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&export).expect("plain struct serializes");
        s.push('\n');
        s
    }
}

#[derive(serde::Serialize)]
struct SolutionExport {
    k: usize,
    objective: f64,
    optimal: bool,
    solver: Solver,
    medoids: Vec<String>,
    assignment: Vec<AssignmentExport>,
}

#[derive(serde::Serialize)]
struct AssignmentExport {
    object: String,
    medoid: String,
}

/// Nearest-medoid assignment for a fixed medoid set (ascending indices).
/// Ties go to the lowest medoid index; a medoid always serves itself.
fn assign(delta: &DissimilarityMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let m = delta.m();
    let mut assignment = vec![0usize; m];
    let mut objective = 0.0;
    for i in 0..m {
        if medoids.binary_search(&i).is_ok() {
            assignment[i] = i;
            continue;
        }
        let mut best = medoids[0];
        let mut best_d = delta.get(i, medoids[0]);
        for &med in &medoids[1..] {
            let d = delta.get(i, med);
            if d < best_d {
                best_d = d;
                best = med;
            }
        }
        assignment[i] = best;
        objective += best_d;
    }
    (assignment, objective)
}

fn subset_objective(delta: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    let m = delta.m();
    let mut objective = 0.0;
    for i in 0..m {
        let mut best = f64::INFINITY;
        for &med in medoids {
            let d = delta.get(i, med);
            if d < best {
                best = d;
            }
        }
        objective += best;
    }
    objective
}

fn binomial_capped(n: usize, k: usize, cap: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return cap + 1;
        }
    }
    acc as u64
}

/// Certified optimum of the k-medoids program.
///
/// Among multiple optimal medoid sets the lexicographically smallest index
/// set is returned, and assignment ties go to the lowest medoid index, so
/// output is deterministic.
pub fn solve_exact(problem: &KMedoidsProblem) -> Result<ClusteringSolution> {
    let delta = problem.delta;
    let k = problem.k;
    let eligible = problem.eligible();

    let best = if binomial_capped(eligible.len(), k, ENUMERATION_LIMIT) <= ENUMERATION_LIMIT {
        enumerate_subsets(delta, &eligible, k)
    } else {
        branch_and_bound(problem)?
    };

    let (assignment, objective) = assign(delta, &best);
    Ok(ClusteringSolution {
        medoids: best,
        assignment,
        objective,
        optimal: true,
        solver: Solver::Exact,
    })
}

/// Lexicographic enumeration of all k-subsets; the first strict improvement
/// wins, which keeps the lexicographically smallest optimum.
fn enumerate_subsets(delta: &DissimilarityMatrix, eligible: &[usize], k: usize) -> Vec<usize> {
    let e = eligible.len();
    let mut picks: Vec<usize> = (0..k).collect();
    let mut best_set: Vec<usize> = Vec::new();
    let mut best_obj = f64::INFINITY;
    let mut subset = vec![0usize; k];
    loop {
        for (slot, &p) in picks.iter().enumerate() {
            subset[slot] = eligible[p];
        }
        let obj = subset_objective(delta, &subset);
        if obj < best_obj {
            best_obj = obj;
            best_set = subset.clone();
        }
        // next combination
        let mut slot = k;
        loop {
            if slot == 0 {
                return best_set;
            }
            slot -= 1;
            if picks[slot] != slot + e - k {
                picks[slot] += 1;
                for s in (slot + 1)..k {
                    picks[s] = picks[s - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lagrangian relaxation of the assignment constraints, the workhorse
/// lower bound for medoid subset search.
///
/// For any multiplier vector `lambda` over the objects, every clustering
/// with medoid set Y satisfies
/// `objective >= sum_i lambda_i + sum_{j in Y} rho_j`, where
/// `rho_j = sum_i min(0, delta_ij - lambda_i)` is the (non-positive) reduced
/// cost of opening candidate j. At a search node with chosen set S and
/// candidates from position p onward, the bound is therefore
/// `base + sum_{j in S} rho_j + (the r smallest rho at positions >= p)`
/// with r slots left — an O(1) lookup once rho and its suffix sums are
/// precomputed. The multipliers are tuned once at the root by subgradient
/// ascent against a heuristic upper bound.
struct LagrangianBound {
    /// Sum of the multipliers.
    base: f64,
    /// Reduced cost per candidate position, parallel to `eligible`.
    rho: Vec<f64>,
    /// Best feasible medoid set met during the ascent (the opened
    /// candidates of each iteration, evaluated at their true objective).
    primal_set: Vec<usize>,
    primal_objective: f64,
}

impl LagrangianBound {
    fn fit(delta: &DissimilarityMatrix, eligible: &[usize], k: usize, upper_bound: f64) -> Self {
        let m = delta.m();
        let e = eligible.len();

        // Start multipliers at each object's second-cheapest candidate: the
        // price the object would pay if its favourite were not opened.
        let mut lambda: Vec<f64> = (0..m)
            .map(|i| {
                let mut two = [f64::INFINITY; 2];
                for &c in eligible {
                    let d = delta.get(i, c);
                    if d < two[0] {
                        two = [d, two[0]];
                    } else if d < two[1] {
                        two[1] = d;
                    }
                }
                two[1]
            })
            .collect();

        let mut rho = vec![0.0; e];
        let mut order: Vec<usize> = (0..e).collect();
        let mut best_value = f64::NEG_INFINITY;
        let mut best_lambda = lambda.clone();
        let mut primal_set: Vec<usize> = Vec::new();
        let mut primal_objective = f64::INFINITY;
        let mut upper = upper_bound;
        let mut step_scale = 1.0;
        let mut stalled = 0;

        for _ in 0..2000 {
            for (j, &c) in eligible.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..m {
                    let reduced = delta.get(i, c) - lambda[i];
                    if reduced < 0.0 {
                        acc += reduced;
                    }
                }
                rho[j] = acc;
            }
            order.sort_by(|&a, &b| rho[a].total_cmp(&rho[b]));
            let opened = &order[..k];
            let value: f64 =
                lambda.iter().sum::<f64>() + opened.iter().map(|&j| rho[j]).sum::<f64>();
            if value > best_value {
                best_value = value;
                best_lambda.copy_from_slice(&lambda);
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 10 {
                    step_scale *= 0.5;
                    stalled = 0;
                }
            }

            // The opened set is feasible: evaluate it as a primal incumbent.
            let mut guess: Vec<usize> = opened.iter().map(|&j| eligible[j]).collect();
            guess.sort_unstable();
            let guess_obj = subset_objective(delta, &guess);
            if guess_obj < primal_objective {
                primal_objective = guess_obj;
                primal_set = guess;
                upper = upper.min(guess_obj);
            }

            // Stop once the certified gap is negligible.
            if upper - best_value <= 1e-9 * (1.0 + upper.abs()) {
                break;
            }

            // Subgradient: 1 minus how many opened candidates undercut
            // each multiplier.
            let mut grad = vec![1.0f64; m];
            for &j in opened {
                let c = eligible[j];
                for i in 0..m {
                    if delta.get(i, c) < lambda[i] {
                        grad[i] -= 1.0;
                    }
                }
            }
            let norm2: f64 = grad.iter().map(|g| g * g).sum();
            if norm2 == 0.0 || step_scale < 1e-7 {
                break;
            }
            let gap = (upper - value).max(1e-10 * (1.0 + upper.abs()));
            let step = step_scale * gap / norm2;
            for (l, g) in lambda.iter_mut().zip(&grad) {
                *l += step * g;
            }
        }

        for (j, &c) in eligible.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..m {
                let reduced = delta.get(i, c) - best_lambda[i];
                if reduced < 0.0 {
                    acc += reduced;
                }
            }
            rho[j] = acc;
        }

        Self {
            base: best_lambda.iter().sum(),
            rho,
            primal_set,
            primal_objective,
        }
    }
}

/// `suffix_smallest[p][r]` = sum of the r smallest values at positions >= p,
/// for r up to k. Built back to front.
fn suffix_smallest_sums(values: &[f64], k: usize) -> Vec<Vec<f64>> {
    let e = values.len();
    let mut sums = vec![vec![0.0; k + 1]; e + 1];
    let mut pool: Vec<f64> = Vec::with_capacity(k + 1);
    for p in (0..e).rev() {
        let pos = pool.partition_point(|&x| x < values[p]);
        pool.insert(pos, values[p]);
        pool.truncate(k);
        let mut acc = 0.0;
        for r in 1..=k {
            acc += pool.get(r - 1).copied().unwrap_or(0.0);
            sums[p][r] = acc;
        }
    }
    sums
}

/// Depth-first branch-and-bound in lexicographic candidate order.
///
/// Two lower bounds prune the tree: the Lagrangian bound above, and the
/// nearest-medoid relaxation (every object may still use its cheapest
/// remaining candidate). The search is warm-started with the heuristic
/// solution, its objective inflated by a relative 1e-12 so that branches
/// tied with it are still explored; pruning on `bound >= incumbent` then
/// keeps the lexicographically smallest optimum because complete subsets
/// are visited in lexicographic order.
fn branch_and_bound(problem: &KMedoidsProblem) -> Result<Vec<usize>> {
    let delta = problem.delta;
    let k = problem.k;
    let m = delta.m();

    let warm = solve_pam(problem, 0)?;
    let all_eligible = problem.eligible();
    let lagrangian = LagrangianBound::fit(delta, &all_eligible, k, warm.objective);
    // The ascent's own feasible solutions may beat the PAM warm start.
    let (incumbent_obj, incumbent_set) = if lagrangian.primal_objective < warm.objective {
        (lagrangian.primal_objective, lagrangian.primal_set.clone())
    } else {
        (warm.objective, warm.medoids)
    };
    // Strictly above the incumbent objective (even when it is 0), so a tied
    // exact solution still displaces the placeholder.
    let threshold = incumbent_obj * (1.0 + 1e-12) + f64::MIN_POSITIVE;

    // Reduced-cost fixing: forcing candidate j open costs at least
    // base + rho_j + (k-1 smallest other rho). Candidates whose forced-open
    // bound clears the incumbent (plus the tie margin) are in no optimal
    // set and can be dropped outright.
    let mut sorted_rho: Vec<f64> = lagrangian.rho.clone();
    sorted_rho.sort_by(f64::total_cmp);
    let top_k: f64 = sorted_rho.iter().take(k).sum();
    let kth = sorted_rho[k - 1];
    let keep: Vec<bool> = lagrangian
        .rho
        .iter()
        .map(|&rho_j| {
            let forced_open = if rho_j <= kth {
                lagrangian.base + top_k
            } else {
                lagrangian.base + top_k - kth + rho_j
            };
            forced_open < threshold
        })
        .collect();
    let eligible: Vec<usize> = all_eligible
        .iter()
        .zip(&keep)
        .filter_map(|(&c, &kept)| kept.then_some(c))
        .collect();
    let rho: Vec<f64> = lagrangian
        .rho
        .iter()
        .zip(&keep)
        .filter_map(|(&r, &kept)| kept.then_some(r))
        .collect();
    let e = eligible.len();
    debug_assert!(e >= k, "fixing keeps every candidate of an optimal set");

    // Fixing never drops a member of an optimal set, so when the filtered
    // instance shrinks into enumeration range the survivors still contain
    // the lexicographically smallest optimum.
    if binomial_capped(e, k, ENUMERATION_LIMIT) <= ENUMERATION_LIMIT {
        return Ok(enumerate_subsets(delta, &eligible, k));
    }

    let suffix_rho = suffix_smallest_sums(&rho, k);

    // suffix_min[p][i] = cheapest dissimilarity from object i to any
    // candidate at position >= p.
    let mut suffix_min = vec![vec![f64::INFINITY; m]; e + 1];
    for p in (0..e).rev() {
        for i in 0..m {
            suffix_min[p][i] = suffix_min[p + 1][i].min(delta.get(i, eligible[p]));
        }
    }

    struct Search<'s> {
        delta: &'s DissimilarityMatrix,
        eligible: &'s [usize],
        rho: &'s [f64],
        suffix_rho: &'s [Vec<f64>],
        lag_base: f64,
        suffix_min: &'s [Vec<f64>],
        k: usize,
        nodes: u64,
        best_obj: f64,
        best_set: Vec<usize>,
    }

    impl Search<'_> {
        fn dfs(
            &mut self,
            pos: usize,
            chosen: &mut Vec<usize>,
            rho_chosen: f64,
            nearest: &[f64],
        ) -> Result<()> {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(Error::SearchBudgetExceeded {
                    budget: NODE_BUDGET,
                });
            }
            if chosen.len() == self.k {
                let obj: f64 = nearest.iter().sum();
                if obj < self.best_obj {
                    self.best_obj = obj;
                    self.best_set = chosen.clone();
                }
                return Ok(());
            }
            let remaining = self.k - chosen.len();
            let last_start = self.eligible.len() - remaining;
            for p in pos..=last_start {
                let lag_bound = self.lag_base
                    + rho_chosen
                    + self.rho[p]
                    + self.suffix_rho[p + 1][remaining - 1];
                if lag_bound >= self.best_obj {
                    continue;
                }
                let cheapest_remaining: f64 = nearest
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| d.min(self.suffix_min[p][i]))
                    .sum();
                if cheapest_remaining >= self.best_obj {
                    // suffix_min is taken over a shrinking candidate set, so
                    // this bound only grows with p: every later branch at
                    // this level is pruned too.
                    break;
                }
                let cand = self.eligible[p];
                let updated: Vec<f64> = nearest
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| d.min(self.delta.get(i, cand)))
                    .collect();
                chosen.push(cand);
                self.dfs(p + 1, chosen, rho_chosen + self.rho[p], &updated)?;
                chosen.pop();
            }
            Ok(())
        }
    }

    let mut search = Search {
        delta,
        eligible: &eligible,
        rho: &rho,
        suffix_rho: &suffix_rho,
        lag_base: lagrangian.base,
        suffix_min: &suffix_min,
        k,
        nodes: 0,
        best_obj: threshold,
        best_set: incumbent_set,
    };
    let mut chosen = Vec::with_capacity(k);
    search.dfs(0, &mut chosen, 0.0, &vec![f64::INFINITY; m])?;
    Ok(search.best_set)
}

/// PAM-style heuristic: greedy BUILD initialisation followed by best-swap
/// descent. Respects the forbidden set; deterministic for a fixed seed (the
/// seed only shuffles the order in which equally good swaps are scanned).
pub fn solve_pam(problem: &KMedoidsProblem, seed: u64) -> Result<ClusteringSolution> {
    let delta = problem.delta;
    let m = delta.m();
    let k = problem.k;
    let eligible = problem.eligible();

    // BUILD: start from the 1-medoid optimum, then repeatedly add the
    // candidate with the largest objective decrease.
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; m];
    for _ in 0..k {
        let mut best_cand = usize::MAX;
        let mut best_total = f64::INFINITY;
        for &c in &eligible {
            if medoids.contains(&c) {
                continue;
            }
            let total: f64 = (0..m).map(|i| nearest[i].min(delta.get(i, c))).sum();
            if total < best_total {
                best_total = total;
                best_cand = c;
            }
        }
        medoids.push(best_cand);
        for i in 0..m {
            nearest[i] = nearest[i].min(delta.get(i, best_cand));
        }
    }
    medoids.sort_unstable();
    let mut objective = subset_objective(delta, &medoids);

    // SWAP: best-improvement local search.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan: Vec<usize> = eligible.clone();
    loop {
        scan.shuffle(&mut rng);
        let mut best_swap: Option<(usize, usize, f64)> = None;
        for slot in 0..medoids.len() {
            for &c in &scan {
                if medoids.contains(&c) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = c;
                let obj = subset_objective(delta, &trial);
                if obj < best_swap.map_or(objective, |(_, _, o)| o) {
                    best_swap = Some((slot, c, obj));
                }
            }
        }
        match best_swap {
            Some((slot, c, obj)) if obj < objective - 1e-12 * (1.0 + objective.abs()) => {
                medoids[slot] = c;
                medoids.sort_unstable();
                objective = obj;
            }
            _ => break,
        }
    }

    let (assignment, objective) = assign(delta, &medoids);
    Ok(ClusteringSolution {
        medoids,
        assignment,
        objective,
        optimal: false,
        solver: Solver::Heuristic,
    })
}

/// Indices of matrices whose consistency ratio exceeds `threshold`; passing
/// the result as the forbidden set realises an inconsistency cap on the
/// cluster centres as a linear restriction (`y_j = 0`).
pub fn eligible_medoids_by_cr(
    pcms: &[Pcm],
    threshold: f64,
    ri: &RiTable,
) -> Result<BTreeSet<usize>> {
    let mut forbidden = BTreeSet::new();
    for (i, pcm) in pcms.iter().enumerate() {
        if pcm.consistency_report(ri)?.cr > threshold {
            forbidden.insert(i);
        }
    }
    Ok(forbidden)
}

/// Medoids of clusters with at most `max_size` members. A cluster that
/// shrinks to (almost) a single object is fundamentally unlike the rest of
/// the data, which is exactly the footprint of a data-entry mistake such as
/// a ratio written as its reciprocal.
pub fn detect_outliers(solution: &ClusteringSolution, max_size: usize) -> Vec<usize> {
    solution
        .medoids
        .iter()
        .zip(solution.cluster_sizes())
        .filter_map(|(&med, size)| (size <= max_size).then_some(med))
        .collect()
}
