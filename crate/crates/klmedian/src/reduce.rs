//! Value-domain quantization and profile-preserving complexity reduction.
//!
//! Per series the reduction runs in two stages. Quantization snaps every
//! value up onto a grid of width eps times the series' own minimum
//! l-simplification error, which bounds the alphabet without distorting any
//! distance to a complexity-l query by more than a (1 ± eps) factor. The
//! complexity search then looks for the shortest rank sequence with exactly
//! the same profile set; since profile sets depend only on rank sequences,
//! results are shared across series through a rank-pattern cache.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::profile::{
    build_target, matches_target, ProfileTarget, MAX_ENGINE_ALPHABET, MAX_ENGINE_SECTORS,
};
use crate::series::{RankSequence, TimeSeries};
use crate::simplify::min_error_simplification;

/// Default complexity cap for reduction searches.
pub const DEFAULT_REDUCTION_CAP: usize = 12;

/// Staircase enumeration budget when coding a profile-set target.
const TARGET_STAIRCASE_BUDGET: u64 = 20_000_000;

/// Upper bound on candidate rank sequences examined per search.
const CANDIDATE_BUDGET: u128 = 5_000_000;

/// Result of value-domain quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSeries {
    /// The quantized series (identical to the input when `grid_width` is 0).
    pub series: TimeSeries,
    /// Grid cell width eps·Δ, or 0 when Δ = 0 and no rounding happened.
    pub grid_width: f64,
    /// Δ, the minimum l-simplification error of the input.
    pub source_error: f64,
}

/// Result of complexity reduction for one series.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// The reduced series, over the same value alphabet as the quantized
    /// input. All distances to complexity-l queries are preserved exactly
    /// relative to the quantized series.
    pub series: TimeSeries,
    /// True when no equivalent sequence of length <= cap was found (or the
    /// search guards gave up); `series` is then the canonicalized quantized
    /// input, which preserves distances but may exceed the cap.
    pub capped: bool,
    /// True when the rank pattern was already in the cache.
    pub cache_hit: bool,
}

/// Smallest grid multiple q·width >= v, robust to floating-point rounding
/// in the division.
pub(crate) fn grid_round_up(v: f64, width: f64) -> f64 {
    debug_assert!(width > 0.0);
    let mut q = (v / width).ceil();
    while (q - 1.0) * width >= v {
        q -= 1.0;
    }
    while q * width < v {
        q += 1.0;
    }
    // + 0.0 normalizes -0.0 so equal values share one bit pattern.
    q * width + 0.0
}

/// Rounds every value of x up to the next multiple of eps·Δ, where Δ is x's
/// minimum l-simplification error. Distances to any complexity-l series are
/// preserved within a (1 ± eps) factor, and the value alphabet shrinks to
/// O(l / eps) values. Δ = 0 means x already has the structure of a
/// complexity-l series; rounding is skipped entirely.
///
/// Panics when `l` is zero or `eps` is outside (0, 1].
pub fn reduce_value_domain(x: &TimeSeries, l: usize, eps: f64) -> QuantizedSeries {
    assert!(l >= 1, "target complexity must be positive");
    assert!(eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]");
    let delta = min_error_simplification(x, l).error;
    if delta == 0.0 {
        return QuantizedSeries {
            series: x.clone(),
            grid_width: 0.0,
            source_error: 0.0,
        };
    }
    let width = eps * delta;
    let values: Vec<f64> = x.values().iter().map(|&v| grid_round_up(v, width)).collect();
    QuantizedSeries {
        series: TimeSeries::new(values).expect("rounding preserves validity"),
        grid_width: width,
        source_error: delta,
    }
}

type CacheKey = (Vec<u32>, u32);

/// Shared memo of complexity-reduction results, keyed by (rank sequence,
/// effective complexity). Entries are immutable once written; concurrent
/// duplicate computation of a key is benign because values are
/// deterministic.
#[derive(Debug, Default)]
pub struct ReductionCache {
    map: Mutex<HashMap<CacheKey, Vec<u32>>>,
}

impl ReductionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache mutex").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &CacheKey) -> Option<Vec<u32>> {
        self.map.lock().expect("cache mutex").get(key).cloned()
    }

    fn insert(&self, key: CacheKey, value: Vec<u32>) {
        self.map.lock().expect("cache mutex").insert(key, value);
    }

    /// Loads a cache from its line-oriented text format, skipping malformed
    /// lines. Returns the cache and one warning per skipped line.
    pub fn load(path: &Path) -> std::io::Result<(Self, Vec<String>)> {
        let file = std::fs::File::open(path)?;
        let mut map = HashMap::new();
        let mut warnings = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            match parse_cache_line(trimmed) {
                Ok((key, value)) => {
                    map.insert(key, value);
                }
                Err(why) => warnings.push(format!("cache line {}: {}", idx + 1, why)),
            }
        }
        Ok((
            Self {
                map: Mutex::new(map),
            },
            warnings,
        ))
    }

    /// Writes the cache in its text format, entries sorted for reproducible
    /// files.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut entries: Vec<(CacheKey, Vec<u32>)> = {
            let map = self.map.lock().expect("cache mutex");
            map.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        entries.sort_unstable();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for ((ranks, l_eff), value) in &entries {
            let r = ranks.iter().max().expect("keys are non-empty");
            write!(out, "{r},{l_eff}:")?;
            for (i, k) in ranks.iter().enumerate() {
                if i > 0 {
                    write!(out, " ")?;
                }
                write!(out, "{k}")?;
            }
            write!(out, " ->")?;
            for v in value {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }
}

/// Parses one `r,ell:k1 k2 ... -> v1 v2 ...` record.
fn parse_cache_line(line: &str) -> Result<(CacheKey, Vec<u32>), String> {
    let (head, tail) = line.split_once(':').ok_or("missing ':'")?;
    let (r_str, l_str) = head.split_once(',').ok_or("missing ',' in header")?;
    let r: u32 = r_str.trim().parse().map_err(|_| "bad alphabet size")?;
    let l_eff: u32 = l_str.trim().parse().map_err(|_| "bad complexity")?;
    let (key_str, val_str) = tail.split_once("->").ok_or("missing '->'")?;
    let parse_ranks = |s: &str| -> Result<Vec<u32>, String> {
        s.split_whitespace()
            .map(|tok| tok.parse::<u32>().map_err(|_| format!("bad rank '{tok}'")))
            .collect()
    };
    let key = parse_ranks(key_str)?;
    let value = parse_ranks(val_str)?;
    if key.is_empty() || value.is_empty() {
        return Err("empty rank sequence".into());
    }
    if l_eff == 0 {
        return Err("complexity must be positive".into());
    }
    for &k in key.iter().chain(&value) {
        if k == 0 || k > r {
            return Err(format!("rank {k} outside 1..={r}"));
        }
    }
    if key.iter().max() != Some(&r) {
        return Err("alphabet size does not match key ranks".into());
    }
    Ok(((key, l_eff), value))
}

/// Searches for the lexicographically first, shortest rank sequence with the
/// same profile set as `ranks` at complexity `l_eff`, trying lengths r..=cap.
/// Returns None when the search gives up: alphabet or complexity beyond the
/// staircase engine, enumeration over budget, or no match within the cap.
fn search_equivalent(ranks: &[u32], l_eff: usize, cap: usize) -> Option<Vec<u32>> {
    let r = *ranks.iter().max().expect("non-empty rank sequence") as usize;
    if r > MAX_ENGINE_ALPHABET || l_eff > MAX_ENGINE_SECTORS {
        return None;
    }
    let ranks_u8: Vec<u8> = ranks.iter().map(|&k| k as u8).collect();
    let target = build_target(&ranks_u8, l_eff, TARGET_STAIRCASE_BUDGET)?;
    let max_len = cap.min(ranks.len());
    let first = ranks_u8[0];
    let last = *ranks_u8.last().expect("non-empty rank sequence");

    let mut examined: u128 = 0;
    for t in r.max(1)..=max_len {
        // Interior positions have at most r-1 choices each (no consecutive
        // duplicates); first and last are forced.
        let bound = if t <= 2 {
            1u128
        } else {
            (r as u128 - 1).checked_pow(t as u32 - 2)?
        };
        examined = examined.checked_add(bound)?;
        if examined > CANDIDATE_BUDGET {
            return None;
        }
        if t == 1 && first != last {
            continue;
        }
        let mut buf = vec![0u8; t];
        buf[0] = first;
        let mut used = vec![false; r + 1];
        used[first as usize] = true;
        if let Some(found) = extend_candidate(&mut buf, 1, r, last, r - 1, &mut used, &target) {
            return Some(found);
        }
    }
    None
}

/// Depth-first candidate construction: symbols ascending (lexicographic),
/// no consecutive duplicates, last symbol forced, and enough positions left
/// to cover every missing symbol (surjectivity).
fn extend_candidate(
    buf: &mut [u8],
    pos: usize,
    r: usize,
    last: u8,
    missing: usize,
    used: &mut [bool],
    target: &ProfileTarget,
) -> Option<Vec<u32>> {
    let t = buf.len();
    if pos == t {
        debug_assert_eq!(missing, 0);
        if matches_target(buf, target) {
            return Some(buf.iter().map(|&s| u32::from(s)).collect());
        }
        return None;
    }
    let remaining_after = t - pos - 1;
    for sym in 1..=r as u8 {
        if sym == buf[pos - 1] {
            continue;
        }
        if pos == t - 1 && sym != last {
            continue;
        }
        let introduces = !used[sym as usize];
        let new_missing = missing - usize::from(introduces);
        if new_missing > remaining_after {
            continue;
        }
        buf[pos] = sym;
        if introduces {
            used[sym as usize] = true;
        }
        let found = extend_candidate(buf, pos + 1, r, last, new_missing, used, target);
        if introduces {
            used[sym as usize] = false;
        }
        if found.is_some() {
            return found;
        }
    }
    None
}

fn key_of(canon: &TimeSeries, l_eff: usize) -> CacheKey {
    let ranks: Vec<u32> = canon
        .rank_sequence()
        .ranks()
        .iter()
        .map(|&k| k as u32)
        .collect();
    (ranks, l_eff as u32)
}

fn apply_ranks(ranks: &[u32], canon: &TimeSeries) -> TimeSeries {
    let values = canon.distinct_values();
    let seq = RankSequence::new(ranks.iter().map(|&k| k as usize).collect(), values.len())
        .expect("cached rank sequences are valid");
    seq.apply_values(&values)
        .expect("alphabet matches by construction")
}

/// Replaces x with a (usually much shorter) series preserving all distances
/// to complexity-l queries within a (1 ± eps) factor: quantize the value
/// domain, drop consecutive duplicate values, then search for the shortest
/// rank sequence with an identical profile set. Complexities 1 and 2 are
/// lifted to 3 for the profile machinery; short queries embed by padding.
///
/// `cap` bounds the complexity searched; when nothing within the cap (or
/// within the internal search budgets) matches, the canonicalized quantized
/// series is returned with `capped` set instead of failing.
///
/// Panics when `l` or `cap` is zero or `eps` is outside (0, 1].
pub fn complexity_reduction(
    x: &TimeSeries,
    l: usize,
    eps: f64,
    cap: usize,
    cache: &ReductionCache,
) -> Reduction {
    assert!(cap >= 1, "cap must be positive");
    let l_eff = l.max(3);
    let quantized = reduce_value_domain(x, l_eff, eps);
    let canon = quantized.series.canonicalize();
    let key = key_of(&canon, l_eff);
    if let Some(value) = cache.get(&key) {
        return Reduction {
            series: apply_ranks(&value, &canon),
            capped: false,
            cache_hit: true,
        };
    }
    match search_equivalent(&key.0, l_eff, cap) {
        Some(found) => {
            let series = apply_ranks(&found, &canon);
            cache.insert(key, found);
            Reduction {
                series,
                capped: false,
                cache_hit: false,
            }
        }
        None => Reduction {
            series: canon,
            capped: true,
            cache_hit: false,
        },
    }
}

/// Elementwise [`complexity_reduction`] over a dataset with one shared
/// cache. Output order matches input order, and results — including the
/// per-item `cache_hit` flags — do not depend on the number of worker
/// threads: hits are attributed as if items were processed sequentially.
pub fn reduce_dataset(
    dataset: &[TimeSeries],
    l: usize,
    eps: f64,
    cap: usize,
    cache: &ReductionCache,
) -> Vec<Reduction> {
    assert!(cap >= 1, "cap must be positive");
    let l_eff = l.max(3);

    // Quantize and canonicalize in parallel; this is pure per-series work.
    let canons: Vec<TimeSeries> = dataset
        .par_iter()
        .map(|x| reduce_value_domain(x, l_eff, eps).series.canonicalize())
        .collect();
    let keys: Vec<CacheKey> = canons.iter().map(|c| key_of(c, l_eff)).collect();

    // Hit attribution follows sequential processing order: every occurrence
    // of a key cached before the call is a hit; for keys new to this call,
    // the first occurrence computes and later occurrences are hits exactly
    // when that computation produced a cache entry (fallbacks are not
    // cached, so their repeats recompute nothing and count as misses).
    let mut first_idx: HashMap<&CacheKey, usize> = HashMap::new();
    let mut resolved: HashMap<&CacheKey, Option<Vec<u32>>> = HashMap::new();
    let mut pre_cached: HashSet<&CacheKey> = HashSet::new();
    let mut pending: Vec<usize> = Vec::new();
    for (i, key) in keys.iter().enumerate() {
        if first_idx.contains_key(key) {
            continue;
        }
        first_idx.insert(key, i);
        if let Some(value) = cache.get(key) {
            resolved.insert(key, Some(value));
            pre_cached.insert(key);
        } else {
            pending.push(i);
        }
    }

    // Search unique new keys in parallel, then publish in input order.
    let searched: Vec<Option<Vec<u32>>> = pending
        .par_iter()
        .map(|&i| search_equivalent(&keys[i].0, l_eff, cap))
        .collect();
    for (&i, found) in pending.iter().zip(&searched) {
        if let Some(value) = found {
            cache.insert(keys[i].clone(), value.clone());
        }
        resolved.insert(&keys[i], found.clone());
    }

    let mut out = Vec::with_capacity(dataset.len());
    for (i, key) in keys.iter().enumerate() {
        match resolved.get(key).expect("every key resolved") {
            Some(ranks) => out.push(Reduction {
                series: apply_ranks(ranks, &canons[i]),
                capped: false,
                cache_hit: pre_cached.contains(key) || first_idx[key] != i,
            }),
            None => out.push(Reduction {
                series: canons[i].clone(),
                capped: true,
                cache_hit: false,
            }),
        }
    }
    out
}
