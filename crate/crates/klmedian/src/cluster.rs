//! Discrete k-median solvers over (clients, facilities) pairs and the
//! end-to-end (k, l)-median pipeline.
//!
//! Two solvers share one interface: an exhaustive optimum for instances
//! small enough to verify against, and single-swap local search (the
//! classical 5-approximation) for everything else. The pipeline chains
//! dimension reduction, candidate generation, and a solver, then scores the
//! returned centers against the original, unreduced input so the reported
//! cost is exact.

use std::fmt;

use rayon::prelude::*;

use crate::candidates::candidate_centers;
use crate::error::Error;
use crate::frechet::discrete_frechet;
use crate::reduce::{reduce_dataset, ReductionCache, DEFAULT_REDUCTION_CAP};
use crate::rng::SplitMix64;
use crate::series::TimeSeries;

/// Default bound on the number of center subsets an exhaustive solve may
/// evaluate.
pub const DEFAULT_SOLVE_CAP: u64 = 1_000_000;

/// Client count above which the mask table of the restricted exhaustive
/// route is not attempted.
const MAX_MASK_CLIENTS: usize = 20;
/// Bound on facilities x 2^clients, the mask-table work of the restricted
/// exhaustive route.
const MASK_WORK_LIMIT: u128 = 2_000_000_000;
/// Bound on facilities x clients for the distance matrix of the restricted
/// exhaustive route.
const MASK_DMAT_LIMIT: u128 = 50_000_000;

/// Which k-median solver produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Exhaustive,
    LocalSearch,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solver::Exhaustive => write!(f, "exhaustive"),
            Solver::LocalSearch => write!(f, "local-search"),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(Solver::Exhaustive),
            "local-search" => Ok(Solver::LocalSearch),
            other => Err(format!(
                "unknown solver {other:?}; expected \"exhaustive\" or \"local-search\""
            )),
        }
    }
}

/// A k-median solution: centers, the per-client assignment, and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSolution {
    /// The k chosen centers, sorted by facility index.
    pub centers: Vec<TimeSeries>,
    /// assignment[i] is the index into `centers` nearest to client i (ties
    /// to the lowest index).
    pub assignment: Vec<usize>,
    /// Sum over clients of the distance to their assigned center, summed in
    /// client order.
    pub cost: f64,
    /// The solver that produced this solution.
    pub solver_used: Solver,
}

/// Per-client nearest center (ties to the lowest index) plus the total cost
/// summed in client order. Deterministic regardless of thread count.
fn assign_clients(clients: &[TimeSeries], centers: &[TimeSeries]) -> (Vec<usize>, f64) {
    let choices: Vec<(usize, f64)> = clients
        .par_iter()
        .map(|c| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (i, s) in centers.iter().enumerate() {
                let d = discrete_frechet(c, s).value();
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            (best, best_d)
        })
        .collect();
    let cost = choices.iter().map(|&(_, d)| d).sum();
    (choices.iter().map(|&(i, _)| i).collect(), cost)
}

/// The k-median objective: sum over clients of the distance to the nearest
/// center.
pub fn kmedian_cost(clients: &[TimeSeries], centers: &[TimeSeries]) -> Result<f64, Error> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    Ok(assign_clients(clients, centers).1)
}

/// Distance matrix, facility-major: rows[f][c] = d(clients[c], facilities[f]).
fn distance_rows(facilities: &[TimeSeries], clients: &[TimeSeries]) -> Vec<Vec<f64>> {
    facilities
        .par_iter()
        .map(|f| {
            clients
                .iter()
                .map(|c| discrete_frechet(c, f).value())
                .collect()
        })
        .collect()
}

/// Binomial coefficient, saturating at u128::MAX.
fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        // out * (n - i) is exactly divisible by i + 1 (it becomes C(n, i+1)).
        match out.checked_mul((n - i) as u128) {
            Some(v) => out = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    out
}

fn subset_cost(dist: &[Vec<f64>], n_clients: usize, subset: &[usize]) -> f64 {
    (0..n_clients)
        .map(|c| {
            subset
                .iter()
                .map(|&f| dist[f][c])
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Advances `idx` to the next k-combination of 0..n in lexicographic order;
/// false when exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut pos = k;
    while pos > 0 {
        pos -= 1;
        if idx[pos] < n - (k - pos) {
            idx[pos] += 1;
            for p in pos + 1..k {
                idx[p] = idx[p - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lexicographically first minimum-cost k-subset of `pool` (pool ascending,
/// so subset order matches global facility order). Returns global indices.
fn best_ksubset_lex(
    dist: &[Vec<f64>],
    n_clients: usize,
    pool: &[usize],
    k: usize,
) -> (Vec<usize>, f64) {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best_subset: Vec<usize> = idx.iter().map(|&p| pool[p]).collect();
    let mut best_cost = subset_cost(dist, n_clients, &best_subset);
    while next_combination(&mut idx, pool.len()) {
        let subset: Vec<usize> = idx.iter().map(|&p| pool[p]).collect();
        let cost = subset_cost(dist, n_clients, &subset);
        if cost < best_cost {
            best_cost = cost;
            best_subset = subset;
        }
    }
    (best_subset, best_cost)
}

fn finish(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    subset: Vec<usize>,
    solver_used: Solver,
) -> ClusterSolution {
    let centers: Vec<TimeSeries> = subset.iter().map(|&f| facilities[f].clone()).collect();
    let (assignment, cost) = assign_clients(clients, &centers);
    ClusterSolution {
        centers,
        assignment,
        cost,
        solver_used,
    }
}

/// [`exhaustive_kmedian_capped`] with [`DEFAULT_SOLVE_CAP`].
pub fn exhaustive_kmedian(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    k: usize,
) -> Result<ClusterSolution, Error> {
    exhaustive_kmedian_capped(clients, facilities, k, DEFAULT_SOLVE_CAP)
}

/// Globally optimal k-subset of `facilities`, ties broken by lexicographic
/// subset order (facility indices). When the subset count exceeds `cap`, a
/// restricted route solves the instance exactly for small client counts by
/// first identifying, per client group, the lowest-index facility serving it
/// best; the lexicographically minimal optimum provably uses only those
/// facilities plus lowest-index padding, so enumerating subsets of that pool
/// reproduces the unrestricted answer bit for bit. Instances too large for
/// both routes fail with the cap error.
///
/// Panics when k is zero or `clients` is empty.
pub fn exhaustive_kmedian_capped(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    k: usize,
    cap: u64,
) -> Result<ClusterSolution, Error> {
    assert!(k >= 1, "k must be positive");
    assert!(!clients.is_empty(), "need at least one client");
    if facilities.len() < k {
        return Err(Error::NotEnoughFacilities {
            have: facilities.len(),
            need: k,
        });
    }
    if binomial(facilities.len(), k) <= u128::from(cap) {
        return Ok(exhaustive_full(clients, facilities, k));
    }
    exhaustive_restricted(clients, facilities, k, cap)
}

/// Direct route: enumerate every k-subset of the facilities.
pub(crate) fn exhaustive_full(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    k: usize,
) -> ClusterSolution {
    let dist = distance_rows(facilities, clients);
    let pool: Vec<usize> = (0..facilities.len()).collect();
    let (subset, _) = best_ksubset_lex(&dist, clients.len(), &pool, k);
    finish(clients, facilities, subset, Solver::Exhaustive)
}

/// Restricted route: identical output to [`exhaustive_full`] (see
/// [`exhaustive_kmedian_capped`] for the argument) at a cost of
/// facilities x 2^clients instead of C(facilities, k).
pub(crate) fn exhaustive_restricted(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    k: usize,
    cap: u64,
) -> Result<ClusterSolution, Error> {
    let n = clients.len();
    let combinations = binomial(facilities.len(), k);
    let partitions = 1u128 << n.min(127);
    let nf = facilities.len() as u128;
    if n > MAX_MASK_CLIENTS
        || nf * partitions > MASK_WORK_LIMIT
        || nf * n as u128 > MASK_DMAT_LIMIT
    {
        return Err(Error::SolveCapExceeded {
            combinations,
            partitions,
            cap,
        });
    }

    let dist = distance_rows(facilities, clients);
    let full = 1usize << n;
    // best1[mask]: cheapest cost of serving exactly the clients in mask with
    // one facility; bestfac[mask]: the lowest facility index achieving it.
    // (value, facility) minima merge associatively, so chunked evaluation is
    // deterministic regardless of thread count.
    let chunk = (facilities.len() / (rayon::current_num_threads() * 4)).max(1);
    let merged = dist
        .par_chunks(chunk)
        .enumerate()
        .map(|(ci, rows)| {
            let mut best1 = vec![f64::INFINITY; full];
            let mut bestfac = vec![usize::MAX; full];
            let mut sums = vec![0.0f64; full];
            for (off, row) in rows.iter().enumerate() {
                let f = ci * chunk + off;
                for mask in 1..full {
                    let low = mask.trailing_zeros() as usize;
                    sums[mask] = sums[mask & (mask - 1)] + row[low];
                    if sums[mask] < best1[mask]
                        || (sums[mask] == best1[mask] && f < bestfac[mask])
                    {
                        best1[mask] = sums[mask];
                        bestfac[mask] = f;
                    }
                }
            }
            (best1, bestfac)
        })
        .reduce(
            || (vec![f64::INFINITY; full], vec![usize::MAX; full]),
            |(mut b1, mut bf), (o1, of)| {
                for mask in 0..full {
                    if o1[mask] < b1[mask] || (o1[mask] == b1[mask] && of[mask] < bf[mask]) {
                        b1[mask] = o1[mask];
                        bf[mask] = of[mask];
                    }
                }
                (b1, bf)
            },
        );

    let mut pool: Vec<usize> = merged.1[1..].to_vec();
    pool.extend(0..facilities.len().min(2 * k));
    pool.sort_unstable();
    pool.dedup();
    let pool_combinations = binomial(pool.len(), k);
    if pool_combinations > u128::from(cap) {
        return Err(Error::SolveCapExceeded {
            combinations: pool_combinations,
            partitions,
            cap,
        });
    }
    let (subset, _) = best_ksubset_lex(&dist, n, &pool, k);
    Ok(finish(clients, facilities, subset, Solver::Exhaustive))
}

/// Single-swap local search from a seeded greedy start: one random first
/// center, greedy completion, then repeatedly apply the best cost-reducing
/// swap until no swap improves the cost by more than a (1 - 1e-6) factor.
/// On convergence the cost is within 5x of the best k-subset of
/// `facilities` (the classical single-swap bound). Deterministic given the
/// seed; all ties resolve to lowest index.
///
/// Panics when k is zero or `clients` is empty.
pub fn local_search_kmedian(
    clients: &[TimeSeries],
    facilities: &[TimeSeries],
    k: usize,
    seed: u64,
) -> Result<ClusterSolution, Error> {
    assert!(k >= 1, "k must be positive");
    assert!(!clients.is_empty(), "need at least one client");
    if facilities.len() < k {
        return Err(Error::NotEnoughFacilities {
            have: facilities.len(),
            need: k,
        });
    }
    let n = clients.len();
    let nf = facilities.len();
    let dist = distance_rows(facilities, clients);

    let mut rng = SplitMix64::new(seed);
    let mut chosen = vec![rng.next_below(nf as u64) as usize];
    let mut nearest: Vec<f64> = (0..n).map(|c| dist[chosen[0]][c]).collect();
    while chosen.len() < k {
        let mut pick = usize::MAX;
        let mut pick_cost = f64::INFINITY;
        for (f, row) in dist.iter().enumerate() {
            if chosen.contains(&f) {
                continue;
            }
            let cost: f64 = nearest.iter().zip(row).map(|(&cur, &d)| cur.min(d)).sum();
            if cost < pick_cost {
                pick_cost = cost;
                pick = f;
            }
        }
        chosen.push(pick);
        for c in 0..n {
            nearest[c] = nearest[c].min(dist[pick][c]);
        }
    }

    let mut cur_cost: f64 = (0..n)
        .map(|c| chosen.iter().map(|&f| dist[f][c]).fold(f64::INFINITY, f64::min))
        .sum();
    loop {
        // Nearest and second-nearest chosen center per client; removing the
        // center at best_pos leaves exactly second[c] as the fallback.
        let mut best_pos = vec![0usize; n];
        let mut best = vec![f64::INFINITY; n];
        let mut second = vec![f64::INFINITY; n];
        for c in 0..n {
            for (pos, &f) in chosen.iter().enumerate() {
                let d = dist[f][c];
                if d < best[c] {
                    second[c] = best[c];
                    best[c] = d;
                    best_pos[c] = pos;
                } else if d < second[c] {
                    second[c] = d;
                }
            }
        }
        let mut swap: Option<(usize, usize)> = None;
        let mut swap_cost = cur_cost * (1.0 - 1e-6);
        for out_pos in 0..chosen.len() {
            for (f, row) in dist.iter().enumerate() {
                if chosen.contains(&f) {
                    continue;
                }
                let new_cost: f64 = (0..n)
                    .map(|c| {
                        let base = if best_pos[c] == out_pos { second[c] } else { best[c] };
                        base.min(row[c])
                    })
                    .sum();
                if new_cost < swap_cost {
                    swap_cost = new_cost;
                    swap = Some((out_pos, f));
                }
            }
        }
        match swap {
            Some((out_pos, f)) => {
                chosen[out_pos] = f;
                cur_cost = swap_cost;
            }
            None => break,
        }
    }

    chosen.sort_unstable();
    Ok(finish(clients, facilities, chosen, Solver::LocalSearch))
}

/// Configuration for [`kmedian_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Number of centers.
    pub k: usize,
    /// Maximum center complexity.
    pub l: usize,
    /// Approximation parameter, in (0, 1/2].
    pub eps: f64,
    /// Solver for the reduced instance.
    pub solver: Solver,
    /// Seed for local search.
    pub seed: u64,
    /// Complexity cap for dimension reduction.
    pub reduction_cap: usize,
    /// Subset cap for the exhaustive solver.
    pub solve_cap: u64,
}

impl PipelineConfig {
    /// Exhaustive solver, seed 0, default caps.
    pub fn new(k: usize, l: usize, eps: f64) -> Self {
        Self {
            k,
            l,
            eps,
            solver: Solver::Exhaustive,
            seed: 0,
            reduction_cap: DEFAULT_REDUCTION_CAP,
            solve_cap: DEFAULT_SOLVE_CAP,
        }
    }
}

/// Pipeline counters for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineStats {
    /// Reductions answered from the cache.
    pub cache_hits: usize,
    /// Candidate centers generated (before any padding to reach k).
    pub candidates: usize,
    /// Largest complexity among the reduced series.
    pub reduced_max_complexity: usize,
    /// Series whose reduction hit the complexity cap.
    pub capped_series: usize,
}

/// A pipeline result: the solution, counters, and whether the exhaustive
/// solver was replaced by local search.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub solution: ClusterSolution,
    pub stats: PipelineStats,
    /// Present when the requested exhaustive solve exceeded its cap and
    /// local search was used instead; holds a human-readable explanation.
    pub fallback: Option<String>,
}

/// End-to-end (k, l)-median clustering: reduce every series (tolerance
/// eps/16), generate candidate centers from the reduced set (tolerance
/// eps/12), solve k-median over (reduced clients, candidates), then score
/// the chosen centers against the ORIGINAL series, so the reported
/// assignment and cost are exact for the returned centers. With the
/// exhaustive solver the total cost is within a (1 + eps) factor of the
/// optimal (k, l)-median cost (up to the estimator constants); an exhaustive
/// solve that exceeds `solve_cap` falls back to local search and records the
/// fact instead of failing.
///
/// Panics when `series` is empty, k or l is zero, or eps is outside
/// (0, 1/2].
pub fn kmedian_pipeline(
    series: &[TimeSeries],
    cfg: &PipelineConfig,
    cache: &ReductionCache,
) -> PipelineOutcome {
    assert!(!series.is_empty(), "need at least one series");
    assert!(cfg.k >= 1, "k must be positive");
    assert!(cfg.l >= 1, "l must be positive");
    assert!(
        cfg.eps > 0.0 && cfg.eps <= 0.5,
        "eps must lie in (0, 1/2]"
    );

    let reductions = reduce_dataset(series, cfg.l, cfg.eps / 16.0, cfg.reduction_cap, cache);
    let clients: Vec<TimeSeries> = reductions.iter().map(|r| r.series.clone()).collect();
    let cand = candidate_centers(&clients, cfg.k, cfg.l, cfg.eps / 12.0);
    let candidates = cand.centers.len();
    let mut facilities = cand.centers;
    while facilities.len() < cfg.k {
        // Candidate sets are never empty, so duplicates of the first
        // candidate pad harmlessly up to k.
        facilities.push(facilities[0].clone());
    }

    let mut fallback = None;
    let solved = match cfg.solver {
        Solver::LocalSearch => local_search_kmedian(&clients, &facilities, cfg.k, cfg.seed)
            .expect("facilities are padded to k"),
        Solver::Exhaustive => {
            match exhaustive_kmedian_capped(&clients, &facilities, cfg.k, cfg.solve_cap) {
                Ok(s) => s,
                Err(err @ Error::SolveCapExceeded { .. }) => {
                    fallback = Some(format!("{err}; solved with local search instead"));
                    local_search_kmedian(&clients, &facilities, cfg.k, cfg.seed)
                        .expect("facilities are padded to k")
                }
                Err(other) => unreachable!("exhaustive solve cannot fail with {other}"),
            }
        }
    };

    let (assignment, cost) = assign_clients(series, &solved.centers);
    PipelineOutcome {
        solution: ClusterSolution {
            centers: solved.centers,
            assignment,
            cost,
            solver_used: solved.solver_used,
        },
        stats: PipelineStats {
            cache_hits: reductions.iter().filter(|r| r.cache_hit).count(),
            candidates,
            reduced_max_complexity: clients.iter().map(TimeSeries::complexity).max().unwrap_or(0),
            capped_series: reductions.iter().filter(|r| r.capped).count(),
        },
        fallback,
    }
}
