//! Core sequence types: time series, rank sequences, and traversals.
//!
//! A time series here is a non-empty sequence of finite values; its
//! complexity is its length. A rank sequence abstracts a series down to the
//! order pattern of its values (1 = smallest distinct value). A traversal is
//! a monotone walk over the index grid of two series, the combinatorial
//! object underlying the discrete Frechet distance.

use crate::error::Error;

/// A univariate time series. Non-empty, every value finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(&value) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of values, i.e. the complexity of the series.
    pub fn complexity(&self) -> usize {
        self.values.len()
    }

    /// Distinct values in strictly increasing order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vs = self.values.clone();
        vs.sort_by(|a, b| a.partial_cmp(b).expect("values are finite"));
        vs.dedup();
        vs
    }

    /// Collapses runs of consecutive equal values to a single value.
    ///
    /// Keeps the first value, the last value, and the set of distinct values
    /// unchanged; the result has no two equal neighbours.
    pub fn canonicalize(&self) -> TimeSeries {
        let mut out = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        TimeSeries { values: out }
    }

    /// Replaces every value by its 1-based rank among the distinct values.
    ///
    /// The result is surjective onto `1..=alphabet_size` by construction.
    pub fn rank_sequence(&self) -> RankSequence {
        let distinct = self.distinct_values();
        let ranks = self
            .values
            .iter()
            .map(|v| {
                1 + distinct
                    .binary_search_by(|d| d.partial_cmp(v).expect("values are finite"))
                    .expect("every value occurs in its own distinct set")
            })
            .collect();
        RankSequence {
            ranks,
            alphabet_size: distinct.len(),
        }
    }
}

/// The order pattern of a series: 1-based ranks over an alphabet of distinct
/// values, rank 1 denoting the smallest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankSequence {
    ranks: Vec<usize>,
    alphabet_size: usize,
}

impl RankSequence {
    pub fn new(ranks: Vec<usize>, alphabet_size: usize) -> Result<Self, Error> {
        if ranks.is_empty() {
            return Err(Error::EmptyRankSequence);
        }
        if let Some(&rank) = ranks.iter().find(|&&r| r == 0 || r > alphabet_size) {
            return Err(Error::RankOutOfRange {
                rank,
                alphabet_size,
            });
        }
        Ok(Self {
            ranks,
            alphabet_size,
        })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether every rank of the alphabet occurs at least once.
    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.alphabet_size];
        for &r in &self.ranks {
            seen[r - 1] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// Substitutes concrete values for ranks: rank `r` becomes
    /// `sorted_values[r - 1]`.
    ///
    /// `sorted_values` must be strictly increasing and match the alphabet
    /// size. When `self` is surjective the output's rank sequence is `self`.
    pub fn apply_values(&self, sorted_values: &[f64]) -> Result<TimeSeries, Error> {
        if sorted_values.len() != self.alphabet_size {
            return Err(Error::AlphabetSizeMismatch {
                expected: self.alphabet_size,
                found: sorted_values.len(),
            });
        }
        // partial_cmp keeps NaN pairs on the error path.
        let increasing = |w: &[f64]| matches!(w[0].partial_cmp(&w[1]), Some(std::cmp::Ordering::Less));
        if sorted_values.windows(2).any(|w| !increasing(w)) {
            return Err(Error::ValuesNotIncreasing);
        }
        TimeSeries::new(self.ranks.iter().map(|&r| sorted_values[r - 1]).collect())
    }
}

/// A monotone traversal of the index grid `[0, m) x [0, l)`: starts at
/// `(0, 0)`, ends at `(m - 1, l - 1)`, and advances each step by one of
/// `(0, +1)`, `(+1, 0)`, `(+1, +1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Traversal {
    pairs: Vec<(usize, usize)>,
}

impl Traversal {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self, Error> {
        if pairs.is_empty() {
            return Err(Error::EmptyTraversal);
        }
        if pairs[0] != (0, 0) {
            return Err(Error::TraversalStart { found: pairs[0] });
        }
        for w in pairs.windows(2) {
            let (from, to) = (w[0], w[1]);
            let step = (to.0.wrapping_sub(from.0), to.1.wrapping_sub(from.1));
            if !matches!(step, (0, 1) | (1, 0) | (1, 1)) {
                return Err(Error::TraversalStep { from, to });
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The `(m, l)` grid this traversal spans, read off its final pair.
    pub fn target_shape(&self) -> (usize, usize) {
        let &(i, j) = self.pairs.last().expect("traversals are non-empty");
        (i + 1, j + 1)
    }
}
