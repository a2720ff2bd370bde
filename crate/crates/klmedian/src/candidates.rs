//! Candidate center generation: a finite set of complexity-l series that is
//! guaranteed to contain a near-optimal k-median solution.
//!
//! The construction covers each series with grid balls: around the series'
//! l-simplification, lay a regular grid of width eps·r in every coordinate a
//! traversal can force, for a ladder of radii r spanning everything from a
//! tiny fraction of the estimated optimal cost up to twice that estimate.
//! Any center within distance r of a series is then within 2r of its
//! simplification, and snapping each coordinate to the grid moves it by at
//! most eps·r.

use rayon::prelude::*;

use crate::cluster::{kmedian_cost, local_search_kmedian};
use crate::reduce::grid_round_up;
use crate::series::TimeSeries;
use crate::simplify::min_error_simplification;

/// Constant-factor guarantee of [`estimate_opt_cost`]: the estimate Δ
/// satisfies Δ* <= Δ <= C_EST·Δ* against the true optimal cost Δ*.
pub const C_EST: f64 = 15.0;

/// A finite candidate-center set with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// Deduplicated centers, sorted by value sequence; every center has
    /// complexity exactly l.
    pub centers: Vec<TimeSeries>,
    /// The radius ladder used for ball construction (empty when the cost
    /// estimate was zero and the simplifications alone suffice).
    pub radii_used: Vec<f64>,
    /// The cost estimate the ladder was scaled by.
    pub delta_estimate: f64,
}

/// First x-index matched to each query position, across every traversal
/// shape of two complexity-l series. A traversal visits query positions left
/// to right, so its first-match rows form a nondecreasing vector starting at
/// 0; conversely any such vector is realized by descending rows within a
/// query position before stepping right. Generated directly (the traversal
/// list itself grows much faster), in lexicographic order.
fn first_match_index_vectors(l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; l];
    loop {
        out.push(cur.clone());
        let mut pos = l;
        loop {
            if pos <= 1 {
                return out; // cur[0] is pinned to 0
            }
            pos -= 1;
            if cur[pos] + 1 < l {
                let v = cur[pos] + 1;
                for c in &mut cur[pos..] {
                    *c = v;
                }
                break;
            }
        }
    }
}

/// Grid multiples of `width` inside [center - span, center + span].
fn grid_interval(center: f64, span: f64, width: f64) -> Vec<f64> {
    let hi = center + span;
    let mut v = grid_round_up(center - span, width);
    let mut out = Vec::new();
    while v <= hi {
        out.push(v);
        let next = grid_round_up(v + width * 0.5, width);
        if next <= v {
            break; // width fell below fp resolution at v
        }
        v = next;
    }
    out
}

fn ball_around(
    x_tilde: &TimeSeries,
    r: f64,
    eps: f64,
    index_vectors: &[Vec<usize>],
) -> Vec<Vec<f64>> {
    let l = x_tilde.complexity();
    let width = eps * r;
    let span = (2.0 + eps) * r;
    let grids: Vec<Vec<f64>> = (0..l)
        .map(|i| grid_interval(x_tilde.values()[i], span, width))
        .collect();
    let mut out = Vec::new();
    for iv in index_vectors {
        let sets: Vec<&[f64]> = iv.iter().map(|&i| grids[i].as_slice()).collect();
        if sets.iter().any(|s| s.is_empty()) {
            continue;
        }
        let mut choice = vec![0usize; l];
        'combos: loop {
            out.push(choice.iter().zip(&sets).map(|(&c, s)| s[c]).collect());
            let mut pos = l;
            loop {
                if pos == 0 {
                    break 'combos;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < sets[pos].len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }
    sort_dedup_rows(&mut out);
    out
}

fn sort_dedup_rows(rows: &mut Vec<Vec<f64>>) {
    rows.sort_unstable_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    rows.dedup();
}

/// The grid ball around a single simplification: all complexity-l series
/// whose coordinates are grid multiples of eps·r within (2+eps)·r of the
/// simplification coordinate a traversal can match them to. Every y with
/// d(x, y) <= r (so d(x_tilde, y) <= 2r) has a ball member within eps·r.
///
/// Panics when eps is outside (0, 1).
pub fn candidate_ball(x_tilde: &TimeSeries, r: f64, eps: f64) -> Vec<TimeSeries> {
    assert!(r > 0.0, "radius must be positive");
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    let vectors = first_match_index_vectors(x_tilde.complexity());
    ball_around(x_tilde, r, eps, &vectors)
        .into_iter()
        .map(|values| TimeSeries::new(values).expect("grid values are finite"))
        .collect()
}

/// Deduplicated l-simplifications of the input series, sorted by values.
fn simplification_set(series: &[TimeSeries], l: usize) -> Vec<TimeSeries> {
    let mut tildes: Vec<Vec<f64>> = series
        .iter()
        .map(|x| min_error_simplification(x, l).series.values().to_vec())
        .collect();
    sort_dedup_rows(&mut tildes);
    tildes
        .into_iter()
        .map(|values| TimeSeries::new(values).expect("simplifications are valid"))
        .collect()
}

/// Estimates the optimal (k, l)-median cost of `series` within a factor of
/// [`C_EST`]: the simplification set G always contains a k-subset within 3x
/// of optimal, and single-swap local search (deterministic, fixed seed) is a
/// 5-approximation over it. An estimate of 0 is exact: it occurs only when
/// some k-subset of G has cost exactly 0.
pub fn estimate_opt_cost(series: &[TimeSeries], k: usize, l: usize) -> f64 {
    assert!(!series.is_empty(), "need at least one series");
    assert!(k >= 1, "k must be positive");
    let g = simplification_set(series, l);
    if k >= g.len() {
        return kmedian_cost(series, &g).expect("G is non-empty");
    }
    local_search_kmedian(series, &g, k, 0)
        .expect("|G| > k checked above")
        .cost
}

/// Builds the full candidate-center set for `series`: all simplifications,
/// plus grid balls around each simplification at radii 2^i·Δ/(C_EST·n) for
/// i in 0..=ceil(log2(C_EST·n))+1, so the ladder reaches past 2Δ. Some
/// k-subset of the result is within a (1+3·eps) factor of the optimal
/// (k, l)-median cost. A zero estimate short-circuits to the
/// simplifications, which are then exactly optimal.
///
/// Panics when eps is outside (0, 1).
pub fn candidate_centers(series: &[TimeSeries], k: usize, l: usize, eps: f64) -> CandidateSet {
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    let delta = estimate_opt_cost(series, k, l);
    let tildes = simplification_set(series, l);
    if delta == 0.0 {
        return CandidateSet {
            centers: tildes,
            radii_used: Vec::new(),
            delta_estimate: 0.0,
        };
    }
    let n = series.len();
    let scale = C_EST * n as f64;
    // scale = 15n is never a power of two, so ceil() has fp headroom.
    let i_max = scale.log2().ceil() as u32 + 1;
    let radii: Vec<f64> = (0..=i_max)
        .map(|i| 2f64.powi(i as i32) * delta / scale)
        .collect();

    let vectors = first_match_index_vectors(l);
    let mut rows: Vec<Vec<f64>> = tildes.iter().map(|t| t.values().to_vec()).collect();
    let ball_rows: Vec<Vec<Vec<f64>>> = tildes
        .par_iter()
        .map(|t| {
            let mut per_tilde = Vec::new();
            for &r in &radii {
                per_tilde.extend(ball_around(t, r, eps, &vectors));
            }
            per_tilde
        })
        .collect();
    for mut b in ball_rows {
        rows.append(&mut b);
    }
    sort_dedup_rows(&mut rows);
    CandidateSet {
        centers: rows
            .into_iter()
            .map(|values| TimeSeries::new(values).expect("grid values are finite"))
            .collect(),
        radii_used: radii,
        delta_estimate: delta,
    }
}
