//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always show in `cargo test` output.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use epicurve::cluster::{leaf_codes, ward_d2, HcTree, Merge};
use epicurve::config::PipelineConfig;
use epicurve::curve::{extract_features, smooth, AlphaGrid, AlphaLevel, SmoothedSeries};
use epicurve::infotheory::{
    conditional_entropy, entropy, joint_entropy, mutual_information, odds_ratio, rescaled_ce,
    ContingencyTable, Direction,
};
use epicurve::ingest::RateSeries;
use epicurve::major_factor::{
    joint_conditional_entropy, noise_threshold, read_scan_csv, scan_order1, scan_order2, Candidate,
    Classification, ScanOptions,
};
use epicurve::pipeline::{Overrides, Pipeline};
use epicurve::synthetic::{example_config, generate, SyntheticSpec};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn odds_reproduction() -> Outcome {
    let t = ContingencyTable::new(vec![
        vec![3_142_000, 1_573_000],
        vec![14_741_000, 3_735_000],
    ])
    .unwrap();
    let o = odds_ratio(&t).unwrap();
    let ok = (o.odds_row1 - 0.5008).abs() <= 0.01
        && (o.odds_row2 - 0.2534).abs() <= 0.01
        && (o.ratio - 1.9765).abs() <= 0.01;
    outcome(
        ok,
        format!(
            "odds {:.4} / {:.4}, ratio {:.4}",
            o.odds_row1, o.odds_row2, o.ratio
        ),
    )
}

/// Centered 7-day moving average: output index `i` averages `x[i..i + 7]`.
fn moving_average_7(x: &[f64]) -> Vec<f64> {
    x.windows(7).map(|w| w.iter().sum::<f64>() / 7.0).collect()
}

fn smoothing_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rates: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..50.0)).collect();
        let series = RateSeries {
            unit_id: "u".into(),
            start_date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
            rates: rates.clone(),
        };
        let s = smooth(&series).unwrap();
        let oracle = moving_average_7(&moving_average_7(&rates));
        if s.values.len() != oracle.len() {
            return outcome(
                false,
                format!("length {} vs {}", s.values.len(), oracle.len()),
            );
        }
        for (a, b) in s.values.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max abs difference {worst:.3e} over 100 series"),
    )
}

fn crossing_oracle() -> Outcome {
    let values: Vec<f64> = (0..=300)
        .map(|t| {
            if t <= 100 {
                t as f64
            } else {
                100.0 - 0.5 * (t - 100) as f64
            }
        })
        .collect();
    let s = SmoothedSeries {
        unit_id: "S".into(),
        start_date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
        values,
    };
    let grid = AlphaGrid::default();
    let f = extract_features(&s, &grid).unwrap().features;
    let level = |p| AlphaLevel::new(p).unwrap();
    let l50 = grid
        .span_levels()
        .iter()
        .position(|&l| l == level(50))
        .unwrap();
    let got = (
        f.peak_day,
        f.crossings.left_at(AlphaLevel::CENTER),
        f.crossings.right_at(AlphaLevel::CENTER),
        f.robust_peak,
        f.curvature,
        f.left[l50],
        f.right[l50],
    );
    let want = (
        100,
        Some(90),
        Some(121),
        Some(105),
        Some(31),
        Some(55),
        Some(96),
    );
    outcome(
        got == want,
        format!("(t_max, t-0.1, t0.1, t0, curvature, left50, right50) = {got:?}"),
    )
}

fn entropy_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut chain, mut sym, mut bounds) = (0.0f64, 0.0f64, true);
    let mut checked = 0;
    while checked < 1000 {
        let r = rng.gen_range(1..=5);
        let c = rng.gen_range(1..=5);
        let counts: Vec<Vec<u64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(0..30)).collect())
            .collect();
        let Ok(t) = ContingencyTable::new(counts) else {
            continue;
        };
        checked += 1;
        let hx = entropy(&t.row_sums()).unwrap();
        let hy = entropy(&t.col_sums()).unwrap();
        let hxy = joint_entropy(&t);
        chain = chain
            .max((hxy - hx - conditional_entropy(&t, Direction::ColumnsGivenRows)).abs())
            .max((hxy - hy - conditional_entropy(&t, Direction::RowsGivenColumns)).abs());
        sym = sym.max((mutual_information(&t) - mutual_information(&t.transpose())).abs());
        for d in [Direction::ColumnsGivenRows, Direction::RowsGivenColumns] {
            if let Ok(v) = rescaled_ce(&t, d) {
                bounds &= (0.0..=1.0).contains(&v);
            }
        }
    }
    outcome(
        chain <= 1e-12 && sym <= 1e-12 && bounds,
        format!(
            "chain rule err {chain:.2e}, MI symmetry err {sym:.2e}, rescaled CE in [0,1]: {bounds}"
        ),
    )
}

fn design(reps: usize, y: impl Fn(u8, u8) -> u8) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for a in 1..=2u8 {
        for b in 1..=2u8 {
            for _ in 0..reps {
                cols.0.push(y(a, b));
                cols.1.push(a);
                cols.2.push(b);
            }
        }
    }
    cols
}

/// Exact permutation p-value of the XOR pair increment: every distinct
/// arrangement of X2's values, each equally likely under permutation.
fn exact_xor_p(y: &[u8], x1: &[u8]) -> f64 {
    let arrangements: Vec<Vec<usize>> = (0..8).combinations(4).collect();
    let hits = arrangements
        .iter()
        .filter(|ones| {
            let x2: Vec<u8> = (0..8)
                .map(|i| if ones.contains(&i) { 1 } else { 2 })
                .collect();
            let drop = joint_conditional_entropy(y, &[x1]).unwrap()
                - joint_conditional_entropy(y, &[x1, &x2]).unwrap();
            drop >= 1.0 - 1e-12
        })
        .count();
    hits as f64 / arrangements.len() as f64
}

fn interaction_detection() -> Outcome {
    let opts = ScanOptions::default();
    let (y, x1, x2) = design(2, |a, b| if a == b { 1 } else { 2 });
    let cands = [
        Candidate {
            name: "x1",
            values: &x1,
        },
        Candidate {
            name: "x2",
            values: &x2,
        },
    ];
    let singles = scan_order1(&y, &cands, opts).unwrap();
    let pair = &scan_order2(&y, &cands, opts).unwrap()[0];
    let by_name = |n: &str| singles.iter().find(|s| s.features[0] == n).unwrap();
    let (s1, s2) = (by_name("x1"), by_name("x2"));
    let xor_class = pair.classification;
    let xor_ok = s1.ce_drop == 0.0
        && s2.ce_drop == 0.0
        && pair.ce == 0.0
        && (pair.sce_drop - 1.0).abs() < 1e-12
        && xor_class == Classification::Order2Interaction;

    let (y, a, b) = design(8, |a, b| 2 * (a - 1) + b);
    let cands = [
        Candidate {
            name: "a",
            values: &a,
        },
        Candidate {
            name: "b",
            values: &b,
        },
    ];
    let add_class = scan_order2(&y, &cands, opts).unwrap()[0].classification;
    let p = exact_xor_p(&design(2, |a, b| if a == b { 1 } else { 2 }).0, &x1);
    outcome(
        xor_ok && add_class == Classification::Order1Pair,
        format!(
            "XOR drops {}/{} bits, pair CE {}, SCE-drop {}, class {xor_class} (null q95 {:.4}; exact permutation p of the 1-bit increment = {p:.4}); additive class {add_class}",
            s1.ce_drop, s2.ce_drop, pair.ce, pair.sce_drop, pair.null.q95
        ),
    )
}

fn noise_calibration() -> Outcome {
    let mut exceed = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let y: Vec<u8> = (0..84).map(|_| rng.gen_range(1..=4)).collect();
        let x: Vec<u8> = (0..84).map(|_| rng.gen_range(1..=4)).collect();
        let observed = joint_conditional_entropy(&y, &[]).unwrap()
            - joint_conditional_entropy(&y, &[&x]).unwrap();
        let null = noise_threshold(&y, &[], &x, 200, trial).unwrap();
        if observed > null.q95 {
            exceed += 1;
        }
    }
    outcome(exceed <= 10, format!("{exceed}/100 trials exceed q95"))
}

fn naive_ward(points: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let centroid = |m: &[usize]| -> Vec<f64> {
        (0..points[0].len())
            .map(|d| m.iter().map(|&i| points[i][d]).sum::<f64>() / m.len() as f64)
            .collect()
    };
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (a, b) = (&clusters[i], &clusters[j]);
                let (ca, cb) = (centroid(a), centroid(b));
                let sq: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y) * (x - y)).sum();
                let (na, nb) = (a.len() as f64, b.len() as f64);
                let d = (2.0 * na * nb / (na + nb) * sq).sqrt();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (d, i, j) = best.unwrap();
        let b = clusters.remove(j);
        let a = clusters[i].clone();
        merges.push((a.clone(), b.clone(), d));
        clusters[i] = a.into_iter().chain(b).sorted().collect();
    }
    merges
}

fn ward_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = rng.gen_range(2..=8);
        let dim = rng.gen_range(1..=5);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let tree = ward_d2(&points, (0..n).map(|i| i.to_string()).collect()).unwrap();
        let oracle = naive_ward(&points);
        for (m, (a, b, h)) in tree.merges.iter().zip(&oracle) {
            let mut la = tree.leaves_under(m.left);
            let mut lb = tree.leaves_under(m.right);
            la.sort();
            lb.sort();
            if (&la, &lb) != (a, b) {
                return outcome(
                    false,
                    format!("dataset {case}: merge {la:?}+{lb:?} vs oracle {a:?}+{b:?}"),
                );
            }
            worst = worst.max((m.height - h).abs());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("50 datasets, identical merges, max height diff {worst:.2e}"),
    )
}

fn random_tree(rng: &mut ChaCha8Rng) -> HcTree {
    let n = rng.gen_range(2..=20);
    let mut active: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    let mut merges = Vec::new();
    while active.len() > 1 {
        let i = rng.gen_range(0..active.len());
        let a = active.swap_remove(i);
        let j = rng.gen_range(0..active.len());
        let b = active.swap_remove(j);
        let (l, r) = if a.1 < b.1 { (a, b) } else { (b, a) };
        merges.push(Merge {
            left: l.0,
            right: r.0,
            height: merges.len() as f64,
            size: 0,
        });
        active.push((n + merges.len() - 1, l.1));
    }
    HcTree {
        leaves: (0..n).map(|i| i.to_string()).collect(),
        merges,
    }
}

fn coding_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..50 {
        let tree = random_tree(&mut rng);
        let n = tree.n_leaves();
        let mut parent = vec![usize::MAX; 2 * n - 1];
        for (k, m) in tree.merges.iter().enumerate() {
            parent[m.left] = n + k;
            parent[m.right] = n + k;
        }
        let ancestors = |mut v: usize| {
            let mut path = vec![v];
            while parent[v] != usize::MAX {
                v = parent[v];
                path.push(v);
            }
            path
        };
        let depth = |v: usize| ancestors(v).len() - 1;
        let codes = leaf_codes(&tree);
        for u in 0..n {
            let au = ancestors(u);
            for v in 0..n {
                let lca = *ancestors(v).iter().find(|x| au.contains(x)).unwrap();
                if codes.similarity[u][v] != depth(lca) {
                    return outcome(false, format!("tree {case}: leaves {u},{v}"));
                }
            }
        }
    }
    outcome(
        true,
        "50 random trees, common prefix = LCA depth for every leaf pair",
    )
}

fn synthetic_geography() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::default();
    let data = generate(&spec).unwrap();
    data.write_to(dir.path()).unwrap();
    let cfg = PipelineConfig::from_toml(&example_config(&spec), dir.path()).unwrap();
    let pipeline = Pipeline::new(cfg, Overrides::default()).unwrap();
    pipeline.run_all().unwrap();
    let out = pipeline.output_dir();

    let scan_path = out.join("scan_region_order1.csv");
    let scans = read_scan_csv(std::fs::File::open(&scan_path).unwrap(), &scan_path).unwrap();
    let fused = scans.iter().find(|r| r.features == "left30to70").unwrap();

    let region: BTreeMap<&str, String> = data
        .metadata
        .iter()
        .map(|(k, m)| (k.as_str(), m.region.to_string()))
        .collect();
    let codes = std::fs::read_to_string(out.join("codes_left.csv")).unwrap();
    let (mut north_left, mut south_left, mut north_right, mut south_right) = (0, 0, 0, 0);
    for line in codes.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        match (f[2].starts_with('0'), region[f[1]].as_str()) {
            (true, "North") => north_left += 1,
            (true, _) => south_left += 1,
            (false, "North") => north_right += 1,
            (false, _) => south_right += 1,
        }
    }
    let misplaced = (north_right + south_left).min(north_left + south_right);
    outcome(
        fused.rescaled_ce < 0.5 && fused.significant && misplaced <= 8,
        format!(
            "left30to70 rescaled CE {:.4} (significant: {}), root split misplacements {misplaced}",
            fused.rescaled_ce, fused.significant
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::default();
    generate(&spec).unwrap().write_to(dir.path()).unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, example_config(&spec)).unwrap();
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_epicurve"))
            .args(["all", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(dir.path().join(out).join("manifest.txt")).unwrap()
    };
    let (a, b) = (run("first"), run("second"));
    let lines = String::from_utf8_lossy(&a).lines().count();
    outcome(
        a == b && lines > 0,
        format!("manifests identical: {} ({lines} artifacts)", a == b),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "odds-ratio reproduction",
            Duration::from_secs(1),
            odds_reproduction,
        ),
        (
            "smoothing equivalence",
            Duration::from_secs(1),
            smoothing_equivalence,
        ),
        (
            "crossing-time oracle",
            Duration::from_secs(1),
            crossing_oracle,
        ),
        (
            "entropy identities",
            Duration::from_secs(5),
            entropy_identities,
        ),
        (
            "interaction detection",
            Duration::from_secs(1),
            interaction_detection,
        ),
        (
            "noise calibration",
            Duration::from_secs(30),
            noise_calibration,
        ),
        (
            "Ward.D2 oracle equivalence",
            Duration::from_secs(10),
            ward_oracle,
        ),
        (
            "coding-scheme oracle",
            Duration::from_secs(5),
            coding_oracle,
        ),
        (
            "end-to-end synthetic geography",
            Duration::from_secs(60),
            synthetic_geography,
        ),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let ok = o.ok && elapsed <= budget;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {} [{:.2}s of {}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
