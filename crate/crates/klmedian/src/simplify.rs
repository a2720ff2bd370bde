//! Minimum-error simplification: the best complexity-`l` series under the
//! discrete Frechet distance, found exactly.
//!
//! A complexity-`l` series within distance `delta` of `x` exists iff `x`
//! splits into at most `l` contiguous blocks whose value ranges each fit in
//! `2 * delta` (blocks are the traversal sectors, block centers the matched
//! values). The optimal `2 * delta` is always the range of some block and
//! hence a difference of two input values, so binary search over the
//! half-differences finds the exact minimum error.

use std::ops::Range;

use crate::series::TimeSeries;

/// An optimal complexity-`l` approximation of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplification {
    /// The simplification itself, complexity exactly `l`.
    pub series: TimeSeries,
    /// Its discrete Frechet distance to the source series.
    pub error: f64,
    /// Contiguous source-index blocks matched to one value each, in order;
    /// at most `l` of them, covering the full index range.
    pub blocks: Vec<Range<usize>>,
}

/// Greedy block decision: can `x` be covered by at most `l` contiguous
/// blocks with per-block `max - min <= 2 * delta`? Returns the maximal
/// left-to-right blocks on success.
pub fn simplify_decide(x: &TimeSeries, l: usize, delta: f64) -> Option<Vec<Range<usize>>> {
    assert!(l >= 1, "block budget must be positive");
    assert!(delta >= 0.0, "delta must be non-negative");
    let vals = x.values();
    let width = 2.0 * delta;
    let mut blocks = Vec::new();
    let mut start = 0;
    let (mut lo, mut hi) = (vals[0], vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        let (nlo, nhi) = (lo.min(v), hi.max(v));
        if nhi - nlo <= width {
            (lo, hi) = (nlo, nhi);
        } else {
            blocks.push(start..i);
            if blocks.len() == l {
                return None;
            }
            start = i;
            (lo, hi) = (v, v);
        }
    }
    blocks.push(start..vals.len());
    debug_assert!(blocks.len() <= l);
    Some(blocks)
}

/// The minimum-error simplification of `x` at complexity exactly `l`.
///
/// The error is the exact minimum of `d_dF(x, y)` over all `y` of complexity
/// at most `l`; the returned series is padded by repeating its first value
/// when fewer than `l` blocks suffice.
pub fn min_error_simplification(x: &TimeSeries, l: usize) -> Simplification {
    assert!(l >= 1, "target complexity must be positive");
    if x.complexity() <= l {
        let blocks = (0..x.complexity()).map(|i| i..i + 1).collect();
        return Simplification {
            series: pad_front(x.values(), l),
            error: 0.0,
            blocks,
        };
    }

    // Candidate errors: half-differences of distinct values, zero included.
    let distinct = x.distinct_values();
    let mut candidates = vec![0.0];
    for (i, &a) in distinct.iter().enumerate() {
        for &b in &distinct[i + 1..] {
            candidates.push((b - a) / 2.0);
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite candidates"));
    candidates.dedup();

    // simplify_decide is monotone in delta, so the first feasible candidate
    // is the optimum.
    let first_feasible = candidates.partition_point(|&d| simplify_decide(x, l, d).is_none());
    let error = candidates[first_feasible];
    let blocks = simplify_decide(x, l, error).expect("partition point is feasible");

    let vals = x.values();
    let centers: Vec<f64> = blocks
        .iter()
        .map(|b| {
            let slice = &vals[b.clone()];
            let lo = slice.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo + hi) / 2.0
        })
        .collect();

    Simplification {
        series: pad_front(&centers, l),
        error,
        blocks,
    }
}

/// Pads to length `l` by repeating the first value.
fn pad_front(values: &[f64], l: usize) -> TimeSeries {
    debug_assert!(!values.is_empty() && values.len() <= l);
    let mut out = vec![values[0]; l - values.len() + 1];
    out.extend_from_slice(&values[1..]);
    TimeSeries::new(out).expect("padded values are non-empty and finite")
}
