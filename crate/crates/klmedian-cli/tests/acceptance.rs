//! End-to-end acceptance checks, one test per shipped guarantee: brute-force
//! oracles at desk scale for distances, simplification, quantization, and
//! profiles; covering and approximation bounds for candidate generation and
//! the clustering pipeline; determinism and cache round-trips for the CLI.
//!
//! Test names are ordered (a01..a10) so `cargo test --test acceptance`
//! prints one pass/fail line per guarantee.

use std::collections::BTreeMap;
use std::process::Command;

use klmedian::{
    assignment_dp, brute_force_frechet, brute_profile_set, candidate_ball, candidate_centers,
    complexity_reduction, discrete_frechet, estimate_opt_cost, exhaustive_kmedian,
    kmedian_pipeline, local_search_kmedian, min_error_simplification, profile_set,
    reduce_dataset, reduce_value_domain, PipelineConfig, Profile, ReductionCache, Solver,
    SplitMix64, TimeSeries, DEFAULT_REDUCTION_CAP,
};

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(values).expect("test series are non-empty and finite")
}

/// Random series of length 1..=max_len with values drawn from `alphabet`.
fn random_series(rng: &mut SplitMix64, max_len: usize, alphabet: &[f64]) -> TimeSeries {
    let len = 1 + rng.next_below(max_len as u64) as usize;
    let values = (0..len)
        .map(|_| alphabet[rng.next_below(alphabet.len() as u64) as usize])
        .collect();
    series(values)
}

/// Quarter-integer alphabet covering [lo, hi].
fn quarter_alphabet(lo: f64, hi: f64) -> Vec<f64> {
    let steps = ((hi - lo) * 4.0).round() as usize;
    (0..=steps).map(|i| lo + i as f64 * 0.25).collect()
}

/// Calls `f` with every length-`len` tuple over `items`, in odometer order.
fn for_each_tuple<T: Copy>(items: &[T], len: usize, mut f: impl FnMut(&[T])) {
    let mut idx = vec![0usize; len];
    let mut tuple = vec![items[0]; len];
    loop {
        for (slot, &i) in tuple.iter_mut().zip(&idx) {
            *slot = items[i];
        }
        f(&tuple);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < items.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Every series over `alphabet` with length 1..=max_len.
fn all_series(alphabet: &[f64], max_len: usize) -> Vec<TimeSeries> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for_each_tuple(alphabet, len, |tuple| out.push(series(tuple.to_vec())));
    }
    out
}

#[test]
fn a01_distance_matches_brute_enumeration() {
    let mut rng = SplitMix64::new(0xA001);
    let alphabet = [0.0, 1.0, 2.0, 3.0];
    for _ in 0..1000 {
        let x = random_series(&mut rng, 6, &alphabet);
        let y = random_series(&mut rng, 6, &alphabet);
        let fast = discrete_frechet(&x, &y).value();
        let brute = brute_force_frechet(&x, &y)
            .expect("traversal counts at length <= 6 are tiny")
            .value();
        assert_eq!(
            fast, brute,
            "distance mismatch for {:?} vs {:?}",
            x.values(),
            y.values()
        );
    }
    println!("criterion 1 satisfied: 1000 random pairs match the traversal enumeration exactly");
}

/// Minimum simplification error over all candidate tuples whose values are
/// midpoints (v_i + v_j) / 2 of input values; an optimal simplification can
/// always be chosen from that set.
fn brute_min_simplification_error(x: &TimeSeries, l: usize) -> f64 {
    let mut mids = Vec::new();
    let vals = x.values();
    for (i, &a) in vals.iter().enumerate() {
        for &b in &vals[i..] {
            mids.push((a + b) / 2.0);
        }
    }
    mids.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mids.dedup();
    let mut best = f64::INFINITY;
    for_each_tuple(&mids, l, |tuple| {
        let cand = series(tuple.to_vec());
        let d = discrete_frechet(x, &cand).value();
        if d < best {
            best = d;
        }
    });
    best
}

#[test]
fn a02_simplification_error_is_minimal() {
    let mut rng = SplitMix64::new(0xA002);
    let alphabet = [0.0, 1.0, 2.0, 3.0, 4.0];
    for case in 0..500 {
        let x = random_series(&mut rng, 6, &alphabet);
        let l = 1 + case % 3;
        let simp = min_error_simplification(&x, l);
        assert!(simp.series.complexity() <= l);
        let brute = brute_min_simplification_error(&x, l);
        assert_eq!(
            simp.error,
            brute,
            "simplification error mismatch for {:?} at l = {l}",
            x.values()
        );
    }
    println!("criterion 2 satisfied: 500 random series match the midpoint-tuple brute force exactly");
}

#[test]
fn a03_quantization_sandwich_and_alphabet_bound() {
    let mut rng = SplitMix64::new(0xA003);
    let alphabet = quarter_alphabet(0.0, 8.0);
    let query_alphabet = quarter_alphabet(-1.0, 9.0);
    for _ in 0..100 {
        let x = random_series(&mut rng, 20, &alphabet);
        for &eps in &[0.1, 0.25, 0.5] {
            for l in 1..=3 {
                let xq = reduce_value_domain(&x, l, eps);
                // Alphabet bound, stated for the effective complexity the
                // pipeline quantizes at; the ceiling is taken tolerantly so
                // exactly-representable ratios do not round up.
                let l_eff = l.max(3) as f64;
                let cells = ((2.0 + eps) / eps - 1e-9).ceil();
                assert!(
                    xq.series.distinct_values().len() as f64 <= l_eff * (cells + 2.0),
                    "alphabet of {:?} exceeds {} for eps = {eps}, l = {l}",
                    xq.series.values(),
                    l_eff * (cells + 2.0)
                );
                for _ in 0..200 {
                    let y = random_series(&mut rng, l, &query_alphabet);
                    let dx = discrete_frechet(&x, &y).value();
                    let dq = discrete_frechet(&xq.series, &y).value();
                    assert!(
                        dq <= (1.0 + eps) * dx + 1e-9,
                        "upper sandwich fails: {dq} vs {dx} (eps = {eps}, l = {l})"
                    );
                    assert!(
                        dq >= (1.0 - eps) * dx - 1e-9,
                        "lower sandwich fails: {dq} vs {dx} (eps = {eps}, l = {l})"
                    );
                }
            }
        }
    }
    println!("criterion 3 satisfied: quantization keeps 200-query distances within (1 +/- eps) and the alphabet bound");
}

#[test]
fn a04_feasibility_dp_matches_sector_search() {
    let alphabet = [1.0, 2.0, 3.0];
    for x in all_series(&alphabet, 7) {
        let distinct = x.distinct_values();
        let r = distinct.len();
        let mut rank_pairs = Vec::new();
        for i in 1..=r {
            for j in i..=r {
                rank_pairs.push((i, j));
            }
        }
        for l in 1..=3 {
            let brute = brute_profile_set(&x, l).expect("small series enumerate fine");
            for_each_tuple(&rank_pairs, l, |entries| {
                let profile = Profile::new(entries.to_vec()).expect("pairs are ordered");
                let expected = brute.contains(&profile);
                let values: Vec<(f64, f64)> = entries
                    .iter()
                    .map(|&(i, j)| (distinct[i - 1], distinct[j - 1]))
                    .collect();
                let got = assignment_dp(&x, &values).expect("values come from the series");
                assert_eq!(
                    got,
                    expected,
                    "feasibility mismatch for {:?}, profile {:?}",
                    x.values(),
                    entries
                );
            });
        }
    }
    println!("criterion 4 satisfied: feasibility DP matches the exhaustive sector search on all series and profiles");
}

#[test]
fn a05_profile_sets_match_brute_and_rank_invariance() {
    let alphabet = [1.0, 2.0, 3.0];
    // Strictly increasing re-valuations of the 3-letter alphabet.
    let maps: [[f64; 3]; 2] = [[4.0, 7.0, 11.0], [-3.0, -0.5, 6.0]];
    for x in all_series(&alphabet, 6) {
        let ps = profile_set(&x, 3);
        let brute = brute_profile_set(&x, 3).expect("small series enumerate fine");
        assert_eq!(ps, brute, "profile set mismatch for {:?}", x.values());
        for map in &maps {
            let mapped = series(
                x.values()
                    .iter()
                    .map(|&v| map[(v as usize) - 1])
                    .collect(),
            );
            assert_eq!(
                profile_set(&mapped, 3),
                ps,
                "profile set changed under re-valuation for {:?}",
                x.values()
            );
        }
    }
    println!("criterion 5 satisfied: profile sets equal the brute-force oracle and are rank-invariant");
}

#[test]
fn a06_reduction_preserves_profiles_and_distances() {
    let mut rng = SplitMix64::new(0xA006);
    let alphabet = quarter_alphabet(0.0, 10.0);
    let query_alphabet = quarter_alphabet(-1.0, 11.0);
    let cache = ReductionCache::new();
    for case in 0..100 {
        let x = random_series(&mut rng, 30, &alphabet);
        let l = 1 + case % 3;
        for &eps in &[0.5, 0.99] {
            let l_eff = l.max(3);
            let quantized = reduce_value_domain(&x, l_eff, eps).series;
            let red = complexity_reduction(&x, l, eps, DEFAULT_REDUCTION_CAP, &cache);
            let z = &red.series;
            assert_eq!(
                brute_profile_set(z, l_eff).unwrap(),
                brute_profile_set(&quantized, l_eff).unwrap(),
                "profile sets differ for {:?} (eps = {eps}, l = {l})",
                x.values()
            );
            assert!(
                z.complexity() <= quantized.canonicalize().complexity(),
                "reduction grew the series for {:?}",
                x.values()
            );
            for _ in 0..200 {
                let y = random_series(&mut rng, l, &query_alphabet);
                let dx = discrete_frechet(&x, &y).value();
                let dz = discrete_frechet(z, &y).value();
                assert!(
                    dz <= (1.0 + eps) * dx + 1e-9,
                    "upper sandwich fails after reduction: {dz} vs {dx}"
                );
                assert!(
                    dz >= (1.0 - eps) * dx - 1e-9,
                    "lower sandwich fails after reduction: {dz} vs {dx}"
                );
            }
        }
    }
    println!("criterion 6 satisfied: reductions keep profile sets exactly and distances within (1 +/- eps)");
}

#[test]
fn a07_grid_ball_covers_radius() {
    let mut rng = SplitMix64::new(0xA007);
    let alphabet = quarter_alphabet(0.0, 8.0);
    let eps = 0.5;
    for case in 0..100 {
        let x = random_series(&mut rng, 12, &alphabet);
        let l = 1 + case % 3;
        let simp = min_error_simplification(&x, l);
        let delta = simp.error;
        // r >= delta is required for the ball around the simplification to
        // cover every low-complexity series within r of the original.
        let r = 1.25 * delta + 0.5;
        let ball = candidate_ball(&simp.series, r, eps);

        // Rejection-sample y of complexity <= l with d(x, y) <= r; fall back
        // to a perturbation of the simplification that satisfies the radius
        // by the triangle inequality.
        let mut y = None;
        for _ in 0..500 {
            let len = 1 + rng.next_below(l as u64) as usize;
            let values: Vec<f64> = (0..len)
                .map(|_| {
                    let base =
                        simp.series.values()[rng.next_below(simp.series.complexity() as u64) as usize];
                    base + (2.0 * rng.next_f64() - 1.0) * r
                })
                .collect();
            let cand = series(values);
            if discrete_frechet(&x, &cand).value() <= r {
                y = Some(cand);
                break;
            }
        }
        let y = y.unwrap_or_else(|| {
            let slack = 0.9 * (r - delta);
            series(
                simp.series
                    .values()
                    .iter()
                    .map(|&v| v + (2.0 * rng.next_f64() - 1.0) * slack)
                    .collect(),
            )
        });
        assert!(discrete_frechet(&x, &y).value() <= r);

        let nearest = ball
            .iter()
            .map(|c| discrete_frechet(&y, c).value())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= eps * r + 1e-9,
            "no candidate within eps*r = {} of sampled series (got {nearest})",
            eps * r
        );
    }
    println!("criterion 7 satisfied: 100 sampled series within radius r all have a candidate within eps*r");
}

/// Shared instance generator for the pipeline-quality and local-search
/// criteria; both must see identical instances.
fn clustering_instances() -> Vec<(Vec<TimeSeries>, usize, usize)> {
    let mut rng = SplitMix64::new(0xA008);
    let mut out = Vec::new();
    for _ in 0..50 {
        // l = 2 instances generate large candidate sets, so they lean on
        // smaller corpora; all sizes stay within n <= 8, m <= 10, k <= 2.
        let l = if rng.next_below(5) < 2 { 2 } else { 1 };
        let k = 1 + rng.next_below(2) as usize;
        let n = if l == 2 {
            2 + rng.next_below(5) as usize
        } else {
            2 + rng.next_below(7) as usize
        };
        let m_max = 1 + rng.next_below(10) as usize;
        let mut dataset = Vec::with_capacity(n);
        for _ in 0..n {
            let len = 1 + rng.next_below(m_max as u64) as usize;
            let values = (0..len).map(|_| rng.next_below(7) as f64).collect();
            dataset.push(series(values));
        }
        out.push((dataset, k, l));
    }
    out
}

#[test]
fn a08_pipeline_cost_near_grid_optimum() {
    let eps = 0.5;
    for (dataset, k, l) in clustering_instances() {
        let cfg = PipelineConfig::new(k, l, eps);
        let cache = ReductionCache::new();
        let outcome = kmedian_pipeline(&dataset, &cfg, &cache);
        assert!(
            outcome.fallback.is_none(),
            "exhaustive pipeline unexpectedly fell back: {:?}",
            outcome.fallback
        );
        assert_eq!(outcome.solution.solver_used, Solver::Exhaustive);

        let delta = estimate_opt_cost(&dataset, k, l);
        if delta == 0.0 {
            // Zero estimate certifies a zero optimum; the pipeline must hit it.
            assert!(outcome.solution.cost <= 1e-9);
            continue;
        }

        // Brute-force optimum over a dense value grid: center vertices may
        // take any multiple of (eps/4) * delta / n inside the data range
        // (clamping an optimal center into the range never hurts).
        let values: Vec<f64> = dataset.iter().flat_map(|s| s.values().to_vec()).collect();
        let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let step = (eps / 4.0) * delta / dataset.len() as f64;
        let mut grid = Vec::new();
        let mut i = 0u64;
        loop {
            let v = vmin + i as f64 * step;
            if v >= vmax {
                break;
            }
            grid.push(v);
            i += 1;
        }
        grid.push(vmax);
        assert!(grid.len() <= 800, "grid unexpectedly dense: {}", grid.len());

        let mut facilities = Vec::new();
        for_each_tuple(&grid, l, |tuple| facilities.push(series(tuple.to_vec())));
        let opt_grid = exhaustive_kmedian(&dataset, &facilities, k)
            .expect("grid instance within solver limits")
            .cost;

        assert!(
            outcome.solution.cost <= (1.0 + eps) * opt_grid + 1e-9,
            "pipeline cost {} exceeds (1 + eps) * grid optimum {}",
            outcome.solution.cost,
            opt_grid
        );
    }
    println!("criterion 8 satisfied: exhaustive pipeline cost is within (1 + eps) of the dense-grid optimum");
}

#[test]
fn a09_local_search_within_five_times_exhaustive() {
    let eps = 0.5;
    for (dataset, k, l) in clustering_instances() {
        // Same reduced clients and candidate facilities the pipeline solves
        // over; the two solvers are compared on identical inputs.
        let cache = ReductionCache::new();
        let reduced: Vec<TimeSeries> = reduce_dataset(
            &dataset,
            l,
            eps / 16.0,
            DEFAULT_REDUCTION_CAP,
            &cache,
        )
        .into_iter()
        .map(|r| r.series)
        .collect();
        let mut facilities = candidate_centers(&reduced, k, l, eps / 12.0).centers;
        while facilities.len() < k {
            facilities.push(facilities[0].clone());
        }
        let exhaustive = exhaustive_kmedian(&reduced, &facilities, k)
            .expect("instances fit the solver limits");
        let local = local_search_kmedian(&reduced, &facilities, k, 0)
            .expect("facilities suffice for k centers");
        assert!(
            local.cost >= exhaustive.cost - 1e-12,
            "local search beat the exhaustive optimum: {} < {}",
            local.cost,
            exhaustive.cost
        );
        assert!(
            local.cost <= 5.0 * exhaustive.cost + 1e-9,
            "local search cost {} exceeds 5x exhaustive {}",
            local.cost,
            exhaustive.cost
        );
    }
    println!("criterion 9 satisfied: local search stays within 5x of the exhaustive optimum on every instance");
}

#[test]
fn a10_cli_determinism_and_cache_round_trip() {
    let bin = env!("CARGO_BIN_EXE_klmedian");
    let dir = std::env::temp_dir().join(format!("klmedian-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let corpus = dir.join("corpus.jsonl");
    std::fs::write(
        &corpus,
        concat!(
            "{\"id\":\"a\",\"values\":[0,4,0,4,1]}\n",
            "{\"id\":\"b\",\"values\":[1,5,0,3]}\n",
            "{\"id\":\"c\",\"values\":[10,14,10]}\n",
            "{\"id\":\"d\",\"values\":[11,13,9,12]}\n",
            "{\"id\":\"e\",\"values\":[2,2,6]}\n",
            "{\"id\":\"f\",\"values\":[12,8,12,8]}\n",
        ),
    )
    .unwrap();

    let run = |extra: &[&str]| {
        let mut args = vec![
            "cluster",
            "--input",
            corpus.to_str().unwrap(),
            "--k",
            "2",
            "--ell",
            "1",
            "--eps",
            "0.5",
            "--solver",
            "local-search",
            "--seed",
            "7",
        ];
        args.extend_from_slice(extra);
        let out = Command::new(bin).args(&args).output().unwrap();
        assert!(
            out.status.success(),
            "cluster run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };

    // Determinism: identical seed, identical bytes.
    let first = run(&[]);
    let second = run(&[]);
    assert_eq!(first, second, "two identical runs differ");

    // Round-trip: re-parsing the JSON and re-scoring reproduces the cost.
    let parsed: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let centers: Vec<TimeSeries> = parsed["centers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            series(
                c.as_array()
                    .unwrap()
                    .iter()
                    .map(|v| v.as_f64().unwrap())
                    .collect(),
            )
        })
        .collect();
    let assignment: BTreeMap<String, usize> = parsed["assignment"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_u64().unwrap() as usize))
        .collect();
    let inputs: Vec<(String, TimeSeries)> = std::fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|line| {
            let row: serde_json::Value = serde_json::from_str(line).unwrap();
            let values = row["values"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            (row["id"].as_str().unwrap().to_string(), series(values))
        })
        .collect();
    let mut rescored = 0.0;
    for (id, x) in &inputs {
        rescored += discrete_frechet(x, &centers[assignment[id]]).value();
    }
    assert_eq!(
        rescored,
        parsed["cost"].as_f64().unwrap(),
        "re-scored cost differs from the reported cost"
    );

    // Cache round-trip: a second run over a saved cache reports hits and
    // reproduces the clustering.
    let cache = dir.join("reductions.cache");
    let cache_arg = cache.to_str().unwrap().to_string();
    let cold = run(&["--cache", &cache_arg]);
    assert!(cache.exists(), "cache file was not written");
    let warm = run(&["--cache", &cache_arg]);
    let cold: serde_json::Value = serde_json::from_slice(&cold).unwrap();
    let warm: serde_json::Value = serde_json::from_slice(&warm).unwrap();
    let cold_hits = cold["stats"]["cache_hits"].as_u64().unwrap();
    let warm_hits = warm["stats"]["cache_hits"].as_u64().unwrap();
    assert!(
        warm_hits > cold_hits,
        "warm run should report more cache hits ({warm_hits} vs {cold_hits})"
    );
    assert_eq!(warm["centers"], cold["centers"]);
    assert_eq!(warm["assignment"], cold["assignment"]);
    assert_eq!(warm["cost"], cold["cost"]);

    std::fs::remove_dir_all(&dir).unwrap();
    println!("criterion 10 satisfied: CLI output is byte-identical across runs and the cache reports hits");
}
