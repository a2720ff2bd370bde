//! l-profiles: the rank fingerprints of traversal sectors.
//!
//! A traversal of (x, y) with |y| = l splits x into l sectors: sector j is
//! the set of x-values matched to y_j. The sectors cover contiguous index
//! intervals; consecutive intervals either touch or overlap in exactly one
//! index (a staircase). The l-profile of a traversal records, per sector,
//! the ranks of the sector's min and max within set(x). The set of all
//! l-profiles of x determines x's distance to every complexity-l series,
//! which is what makes profiles the key of the complexity reduction.

use std::collections::{BTreeSet, HashSet};

use crate::error::Error;
use crate::frechet::count_traversals;
use crate::series::{TimeSeries, Traversal};

/// One l-profile: per sector, the 1-based (min-rank, max-rank) pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    entries: Vec<(usize, usize)>,
}

impl Profile {
    pub fn new(entries: Vec<(usize, usize)>) -> Result<Self, Error> {
        if entries.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for &(lo, hi) in &entries {
            if lo == 0 || lo > hi {
                return Err(Error::RankPairOrder { min: lo, max: hi });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }
}

/// All l-profiles of one series: the distance-determining fingerprint for
/// queries of complexity `query_complexity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSet {
    profiles: BTreeSet<Profile>,
    alphabet_size: usize,
    query_complexity: usize,
}

impl ProfileSet {
    pub fn profiles(&self) -> &BTreeSet<Profile> {
        &self.profiles
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn query_complexity(&self) -> usize {
        self.query_complexity
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn contains(&self, p: &Profile) -> bool {
        self.profiles.contains(p)
    }
}

/// The traversal sectors of x under `t`: sector j is the set of x-values
/// matched to query position j, as a sorted deduplicated list.
pub fn traversal_sectors(
    x: &TimeSeries,
    l: usize,
    t: &Traversal,
) -> Result<Vec<Vec<f64>>, Error> {
    assert!(l >= 1, "query complexity must be positive");
    let expected = (x.complexity(), l);
    if t.target_shape() != expected {
        return Err(Error::TraversalShape {
            expected,
            found: t.target_shape(),
        });
    }
    let mut sectors = vec![Vec::new(); l];
    for &(i, j) in t.pairs() {
        sectors[j].push(x.values()[i]);
    }
    for s in &mut sectors {
        s.sort_by(|a, b| a.partial_cmp(b).expect("series values are finite"));
        s.dedup();
    }
    Ok(sectors)
}

/// Feasibility of a profile given by concrete (min, max) value pairs: true
/// iff some traversal's sectors realize exactly these per-sector extremes.
///
/// Dynamic program over (sector h, prefix length t), O(|x|·l). Three boolean
/// tables: feasibility, min hit, max hit.
pub fn assignment_dp(x: &TimeSeries, p_values: &[(f64, f64)]) -> Result<bool, Error> {
    if p_values.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let distinct = x.distinct_values();
    let rank_of = |v: f64| -> Result<usize, Error> {
        distinct
            .binary_search_by(|d| d.partial_cmp(&v).expect("finite values"))
            .map(|i| i + 1)
            .map_err(|_| Error::ValueNotInSeries { value: v })
    };
    let mut pairs = Vec::with_capacity(p_values.len());
    for &(lo, hi) in p_values {
        // partial_cmp keeps NaN entries on the error path.
        if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
            return Err(Error::ProfileEntryOrder { min: lo, max: hi });
        }
        pairs.push((rank_of(lo)?, rank_of(hi)?));
    }
    let ranks: Vec<usize> = x.rank_sequence().ranks().to_vec();
    Ok(rank_feasible(&ranks, &pairs))
}

/// Rank-level core of [`assignment_dp`]. `xr` are 1-based ranks.
///
/// State, for sector h and prefix x_1..x_t: feas = sectors 1..h can tile the
/// prefix with each value inside its pair and sectors 1..h-1 hitting both
/// extremes; fmin/fmax = additionally sector h already contains its min/max.
/// Sector h+1 may start after t (disjoint) or at t (sharing one index), so a
/// closed sector hands off either from (h-1, t-1) or from (h-1, t). The
/// hand-off may require fmin and fmax together: of any two witness
/// configurations at (h-1, t) the one whose last interval reaches further
/// left subsumes the other, so a single configuration achieves both flags.
pub(crate) fn rank_feasible(xr: &[usize], pairs: &[(usize, usize)]) -> bool {
    let m = xr.len();
    let mut prev_feas = vec![false; m + 1];
    let mut prev_min = vec![false; m + 1];
    let mut prev_max = vec![false; m + 1];
    let mut curr_feas = vec![false; m + 1];
    let mut curr_min = vec![false; m + 1];
    let mut curr_max = vec![false; m + 1];
    prev_feas[0] = true;
    prev_min[0] = true;
    prev_max[0] = true;
    for &(lo, hi) in pairs {
        curr_feas[0] = false;
        curr_min[0] = false;
        curr_max[0] = false;
        for t in 1..=m {
            let v = xr[t - 1];
            let (mut f, mut fmin, mut fmax) = (false, false, false);
            if v >= lo && v <= hi {
                if curr_feas[t - 1] {
                    f = true;
                    fmin = curr_min[t - 1] || v == lo;
                    fmax = curr_max[t - 1] || v == hi;
                }
                let closed_disjoint = prev_feas[t - 1] && prev_min[t - 1] && prev_max[t - 1];
                let closed_shared = prev_feas[t] && prev_min[t] && prev_max[t];
                if closed_disjoint || closed_shared {
                    f = true;
                    fmin = fmin || v == lo;
                    fmax = fmax || v == hi;
                }
            }
            curr_feas[t] = f;
            curr_min[t] = fmin;
            curr_max[t] = fmax;
        }
        std::mem::swap(&mut prev_feas, &mut curr_feas);
        std::mem::swap(&mut prev_min, &mut curr_min);
        std::mem::swap(&mut prev_max, &mut curr_max);
    }
    prev_feas[m] && prev_min[m] && prev_max[m]
}

/// The profile set of x for complexity-l queries, computed by testing every
/// candidate rank-pair profile with [`assignment_dp`]'s dynamic program.
///
/// Enumerates (r(r+1)/2)^l candidates; meant for the small alphabets the
/// reduction produces.
pub fn profile_set(x: &TimeSeries, l: usize) -> ProfileSet {
    assert!(l >= 1, "query complexity must be positive");
    let rs = x.rank_sequence();
    let r = rs.alphabet_size();
    let xr = rs.ranks().to_vec();

    let mut pair_options = Vec::new();
    for lo in 1..=r {
        for hi in lo..=r {
            pair_options.push((lo, hi));
        }
    }

    let mut profiles = BTreeSet::new();
    let mut choice = vec![0usize; l];
    loop {
        let pairs: Vec<(usize, usize)> = choice.iter().map(|&c| pair_options[c]).collect();
        if rank_feasible(&xr, &pairs) {
            profiles.insert(Profile { entries: pairs });
        }
        // Odometer over the candidate space.
        let mut pos = l;
        loop {
            if pos == 0 {
                return ProfileSet {
                    profiles,
                    alphabet_size: r,
                    query_complexity: l,
                };
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < pair_options.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Oracle twin of [`profile_set`]: collects profiles directly from every
/// enumerated traversal. Must agree exactly wherever it runs.
pub fn brute_profile_set(x: &TimeSeries, l: usize) -> Result<ProfileSet, Error> {
    assert!(l >= 1, "query complexity must be positive");
    let traversals = crate::frechet::enumerate_traversals(x.complexity(), l)?;
    let xr = x.rank_sequence();
    let ranks = xr.ranks();
    let mut profiles = BTreeSet::new();
    for t in traversals {
        let mut entries = vec![(usize::MAX, 0usize); l];
        for &(i, j) in t.pairs() {
            let r = ranks[i];
            entries[j].0 = entries[j].0.min(r);
            entries[j].1 = entries[j].1.max(r);
        }
        profiles.insert(Profile { entries });
    }
    Ok(ProfileSet {
        profiles,
        alphabet_size: xr.alphabet_size(),
        query_complexity: l,
    })
}

// ---------------------------------------------------------------------------
// Internal engine: staircase enumeration over compact profile codes. Used by
// the complexity-reduction search, where profile sets are compared millions
// of times. Equivalence with profile_set/brute_profile_set is pinned by
// tests in this module.

/// Sparse-table range min/max over a rank sequence; O(1) inclusive queries.
pub(crate) struct RankRmq {
    mins: Vec<Vec<u8>>,
    maxs: Vec<Vec<u8>>,
}

impl RankRmq {
    pub(crate) fn new(ranks: &[u8]) -> Self {
        let n = ranks.len();
        let levels = usize::BITS as usize - n.leading_zeros() as usize;
        let mut mins = Vec::with_capacity(levels);
        let mut maxs = Vec::with_capacity(levels);
        mins.push(ranks.to_vec());
        maxs.push(ranks.to_vec());
        let mut width = 1;
        while 2 * width <= n {
            let prev_min = &mins[mins.len() - 1];
            let prev_max = &maxs[maxs.len() - 1];
            let count = n - 2 * width + 1;
            let mut next_min = Vec::with_capacity(count);
            let mut next_max = Vec::with_capacity(count);
            for i in 0..count {
                next_min.push(prev_min[i].min(prev_min[i + width]));
                next_max.push(prev_max[i].max(prev_max[i + width]));
            }
            mins.push(next_min);
            maxs.push(next_max);
            width *= 2;
        }
        Self { mins, maxs }
    }

    /// Min rank over the inclusive index range `lo..=hi`.
    pub(crate) fn min(&self, lo: usize, hi: usize) -> u8 {
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        self.mins[k][lo].min(self.mins[k][hi + 1 - (1 << k)])
    }

    /// Max rank over the inclusive index range `lo..=hi`.
    pub(crate) fn max(&self, lo: usize, hi: usize) -> u8 {
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        self.maxs[k][lo].max(self.maxs[k][hi + 1 - (1 << k)])
    }
}

/// Per-sector code: (min, max) packed into 16 bits at the sector's stride.
/// Supports l <= 8 sectors and alphabets up to 255.
pub(crate) fn entry_code(min: u8, max: u8, sector: usize) -> u128 {
    (u128::from(min) | (u128::from(max) << 8)) << (16 * sector)
}

pub(crate) const MAX_ENGINE_SECTORS: usize = 8;
pub(crate) const MAX_ENGINE_ALPHABET: usize = 255;

/// A profile set in coded form, with per-depth prefix sets for early
/// rejection during candidate search.
pub(crate) struct ProfileTarget {
    l: usize,
    /// prefixes[d] holds every depth-(d+1) prefix code; the last level holds
    /// the complete profile codes.
    prefixes: Vec<HashSet<u128>>,
}

impl ProfileTarget {
    pub(crate) fn codes(&self) -> &HashSet<u128> {
        &self.prefixes[self.l - 1]
    }
}

/// Builds the coded profile set of `ranks` for `l` sectors by enumerating
/// staircases (one per traversal). Returns None when the staircase count
/// exceeds `budget`.
pub(crate) fn build_target(ranks: &[u8], l: usize, budget: u64) -> Option<ProfileTarget> {
    debug_assert!((1..=MAX_ENGINE_SECTORS).contains(&l));
    if count_traversals(ranks.len(), l) > u128::from(budget) {
        return None;
    }
    let rmq = RankRmq::new(ranks);
    let mut prefixes = vec![HashSet::new(); l];
    collect_codes(&rmq, ranks.len(), l, 0, 0, 0, &mut prefixes);
    Some(ProfileTarget { l, prefixes })
}

fn collect_codes(
    rmq: &RankRmq,
    t: usize,
    l: usize,
    sector: usize,
    start: usize,
    acc: u128,
    prefixes: &mut [HashSet<u128>],
) {
    if sector + 1 == l {
        // Last sector must reach the final index.
        let code = acc | entry_code(rmq.min(start, t - 1), rmq.max(start, t - 1), sector);
        prefixes[sector].insert(code);
        return;
    }
    for end in start..t {
        let code = acc | entry_code(rmq.min(start, end), rmq.max(start, end), sector);
        prefixes[sector].insert(code);
        // Next sector shares index `end` or starts directly after it.
        collect_codes(rmq, t, l, sector + 1, end, code, prefixes);
        if end + 1 < t {
            collect_codes(rmq, t, l, sector + 1, end + 1, code, prefixes);
        }
    }
}

/// Whether `ranks` has exactly the coded profile set `target`. Walks the
/// staircases of `ranks`, rejecting as soon as any profile prefix falls
/// outside the target's prefix sets, and finally compares profile counts.
pub(crate) fn matches_target(ranks: &[u8], target: &ProfileTarget) -> bool {
    let rmq = RankRmq::new(ranks);
    let mut seen = HashSet::new();
    if !check_codes(&rmq, ranks.len(), 0, 0, 0, target, &mut seen) {
        return false;
    }
    seen.len() == target.codes().len()
}

fn check_codes(
    rmq: &RankRmq,
    t: usize,
    sector: usize,
    start: usize,
    acc: u128,
    target: &ProfileTarget,
    seen: &mut HashSet<u128>,
) -> bool {
    if sector + 1 == target.l {
        let code = acc | entry_code(rmq.min(start, t - 1), rmq.max(start, t - 1), sector);
        if !target.prefixes[sector].contains(&code) {
            return false;
        }
        seen.insert(code);
        return true;
    }
    for end in start..t {
        let code = acc | entry_code(rmq.min(start, end), rmq.max(start, end), sector);
        if !target.prefixes[sector].contains(&code) {
            return false;
        }
        if !check_codes(rmq, t, sector + 1, end, code, target, seen) {
            return false;
        }
        if end + 1 < t && !check_codes(rmq, t, sector + 1, end + 1, code, target, seen) {
            return false;
        }
    }
    true
}

/// Decodes an engine profile code back into rank pairs (test support).
#[cfg(test)]
pub(crate) fn decode_profile(code: u128, l: usize) -> Vec<(usize, usize)> {
    (0..l)
        .map(|j| {
            let chunk = (code >> (16 * j)) & 0xFFFF;
            ((chunk & 0xFF) as usize, (chunk >> 8) as usize)
        })
        .collect()
}
