//! Discrete Frechet distance: the fast dynamic program and the brute-force
//! traversal oracle used as ground truth in tests.

use crate::error::Error;
use crate::series::{TimeSeries, Traversal};

/// Default bound on how many traversals [`enumerate_traversals`] will
/// materialize. A guard against accidental exponential blowup, not a tuning
/// knob; use [`enumerate_traversals_capped`] to override.
pub const DEFAULT_TRAVERSAL_CAP: u64 = 10_000_000;

/// A discrete Frechet distance: non-negative and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DistanceValue(f64);

impl DistanceValue {
    fn new(value: f64) -> Self {
        debug_assert!(value >= 0.0 && value.is_finite());
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Discrete Frechet distance between `x` and `y`: the minimum over monotone
/// traversals of the maximum matched absolute difference.
///
/// Standard dynamic program, O(|x|·|y|) time and O(min(|x|, |y|)) memory:
/// `D[i][j] = max(|x_i − y_j|, min(D[i−1][j], D[i][j−1], D[i−1][j−1]))`.
pub fn discrete_frechet(x: &TimeSeries, y: &TimeSeries) -> DistanceValue {
    // Roll rows over the longer series so the live rows span the shorter one.
    let (a, b) = if x.complexity() >= y.complexity() {
        (x.values(), y.values())
    } else {
        (y.values(), x.values())
    };
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut curr = vec![0.0f64; n];
    for (i, &av) in a.iter().enumerate() {
        for (j, &bv) in b.iter().enumerate() {
            let c = (av - bv).abs();
            let best = match (i, j) {
                (0, 0) => c,
                (0, _) => curr[j - 1].max(c),
                (_, 0) => prev[0].max(c),
                _ => prev[j].min(prev[j - 1]).min(curr[j - 1]).max(c),
            };
            curr[j] = best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    DistanceValue::new(prev[n - 1])
}

/// Number of traversals of the `m x l` grid, saturating at `u128::MAX`.
pub fn count_traversals(m: usize, l: usize) -> u128 {
    assert!(m >= 1 && l >= 1, "grid dimensions must be positive");
    // c[j] holds row i of the pair-count table; Delannoy-style recurrence.
    let mut prev = vec![0u128; l];
    let mut curr = vec![0u128; l];
    for i in 0..m {
        for j in 0..l {
            curr[j] = if i == 0 && j == 0 {
                1
            } else {
                let up = if i > 0 { prev[j] } else { 0 };
                let left = if j > 0 { curr[j - 1] } else { 0 };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { 0 };
                up.saturating_add(left).saturating_add(diag)
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[l - 1]
}

/// Every traversal of the `m x l` grid, in lexicographic order by pair
/// sequence, under the default cap.
pub fn enumerate_traversals(m: usize, l: usize) -> Result<Vec<Traversal>, Error> {
    enumerate_traversals_capped(m, l, DEFAULT_TRAVERSAL_CAP)
}

/// Every traversal of the `m x l` grid, in lexicographic order by pair
/// sequence. Errors out without enumerating when the count exceeds `cap`.
pub fn enumerate_traversals_capped(
    m: usize,
    l: usize,
    cap: u64,
) -> Result<Vec<Traversal>, Error> {
    assert!(m >= 1 && l >= 1, "grid dimensions must be positive");
    let count = count_traversals(m, l);
    if count > u128::from(cap) {
        return Err(Error::TraversalCapExceeded { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut path = vec![(0usize, 0usize)];
    // Successor order (i, j+1) < (i+1, j) < (i+1, j+1) yields lexicographic
    // order over whole pair sequences.
    fn walk(
        path: &mut Vec<(usize, usize)>,
        m: usize,
        l: usize,
        out: &mut Vec<Traversal>,
    ) {
        let &(i, j) = path.last().expect("path starts non-empty");
        if (i, j) == (m - 1, l - 1) {
            out.push(Traversal::new(path.clone()).expect("constructed steps are valid"));
            return;
        }
        for step in [(0, 1), (1, 0), (1, 1)] {
            let next = (i + step.0, j + step.1);
            if next.0 < m && next.1 < l {
                path.push(next);
                walk(path, m, l, out);
                path.pop();
            }
        }
    }
    walk(&mut path, m, l, &mut out);
    Ok(out)
}

/// Literal realization of the distance definition: min over all enumerated
/// traversals of the max matched difference. Test oracle; must agree exactly
/// with [`discrete_frechet`] wherever it runs.
pub fn brute_force_frechet(x: &TimeSeries, y: &TimeSeries) -> Result<DistanceValue, Error> {
    let traversals = enumerate_traversals(x.complexity(), y.complexity())?;
    let xs = x.values();
    let ys = y.values();
    let best = traversals
        .iter()
        .map(|t| {
            t.pairs()
                .iter()
                .map(|&(i, j)| (xs[i] - ys[j]).abs())
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(DistanceValue::new(best))
}
