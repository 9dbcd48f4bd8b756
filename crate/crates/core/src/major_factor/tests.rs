use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cand<'a>(name: &'a str, values: &'a [u8]) -> Candidate<'a> {
    Candidate { name, values }
}

/// Balanced XOR design, each (x1, x2) combination `reps` times.
fn xor_design(reps: usize) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    for a in 1..=2u8 {
        for b in 1..=2u8 {
            for _ in 0..reps {
                x1.push(a);
                x2.push(b);
            }
        }
    }
    let y = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| if a == b { 1 } else { 2 })
        .collect();
    (y, x1, x2)
}

/// Y encodes both of two independent binary features.
fn additive_design(reps: usize) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let (_, x1, x2) = xor_design(reps);
    let y = x1.iter().zip(&x2).map(|(a, b)| (a - 1) * 2 + b).collect();
    (y, x1, x2)
}

fn opts() -> ScanOptions {
    ScanOptions {
        replicates: 200,
        seed: 11,
    }
}

#[test]
fn joint_ce_examples() {
    let y = [1u8, 2, 3, 4, 1, 2];
    assert_eq!(joint_conditional_entropy(&y, &[&y]).unwrap(), 0.0);

    // y independent of x: every combination once
    let x: Vec<u8> = (0..16).map(|i| 1 + i / 4).collect();
    let y: Vec<u8> = (0..16).map(|i| 1 + i % 4).collect();
    let hy = joint_conditional_entropy(&y, &[]).unwrap();
    assert_eq!(hy, 2.0);
    assert!((joint_conditional_entropy(&y, &[&x]).unwrap() - hy).abs() < 1e-12);

    let (y, x1, x2) = xor_design(2);
    assert_eq!(y.len(), 8);
    assert_eq!(joint_conditional_entropy(&y, &[&x1]).unwrap(), 1.0);
    assert_eq!(joint_conditional_entropy(&y, &[&x2]).unwrap(), 1.0);
    assert_eq!(joint_conditional_entropy(&y, &[&x1, &x2]).unwrap(), 0.0);

    assert!(matches!(
        joint_conditional_entropy(&y, &[&x1[..3]]),
        Err(Error::LengthMismatch(3, 8))
    ));
}

#[test]
fn joint_ce_agrees_with_contingency_route() {
    use crate::infotheory::{conditional_entropy, contingency, Direction};
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<u8> = (0..60).map(|_| rng.gen_range(0..=4)).collect();
    let y: Vec<u8> = x
        .iter()
        .map(|&v| {
            if rng.gen_bool(0.5) {
                v
            } else {
                rng.gen_range(1..=4)
            }
        })
        .collect();
    let t = contingency(&x, &y).unwrap();
    let a = conditional_entropy(&t, Direction::ColumnsGivenRows);
    let b = joint_conditional_entropy(&y, &[&x]).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn copy_ranks_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y: Vec<u8> = (0..60).map(|_| rng.gen_range(1..=4)).collect();
    let noise: Vec<u8> = (0..60).map(|_| rng.gen_range(1..=4)).collect();
    let cands = [cand("noise", &noise), cand("copy", &y)];
    let r = scan_order1(&y, &cands, opts()).unwrap();
    assert_eq!(r[0].features, vec!["copy"]);
    assert_eq!(r[0].ce, 0.0);
    assert_eq!(r[0].rescaled_ce, 0.0);
    assert!(r[0].significant);
    assert_eq!(r[0].classification, Classification::Order1);
    for s in &r {
        assert_eq!(s.sce_drop, s.ce_drop);
    }

    let pairs = scan_order2(&y, &cands, opts()).unwrap();
    assert_eq!(pairs.len(), 1);
    assert!(pairs[0].sce_drop.abs() < 1e-12);
    assert_eq!(pairs[0].classification, Classification::Redundant);
}

#[test]
fn xor_is_an_interaction() {
    let (y, x1, x2) = xor_design(8);
    let cands = [cand("x1", &x1), cand("x2", &x2)];
    let singles = scan_order1(&y, &cands, opts()).unwrap();
    for s in &singles {
        assert_eq!(s.ce_drop, 0.0);
        assert!(!s.significant);
    }
    let pairs = scan_order2(&y, &cands, opts()).unwrap();
    let p = &pairs[0];
    assert_eq!(p.ce, 0.0);
    assert_eq!(p.sce_drop, 1.0);
    assert!(p.significant);
    assert_eq!(p.classification, Classification::Order2Interaction);
    assert_eq!(p.label(), "x1_x2");
}

#[test]
fn additive_predictors_are_order1_pair() {
    let (y, x1, x2) = additive_design(8);
    let cands = [cand("a", &x1), cand("b", &x2)];
    let singles = scan_order1(&y, &cands, opts()).unwrap();
    assert!(singles
        .iter()
        .all(|s| s.significant && (s.ce_drop - 1.0).abs() < 1e-12));
    let pairs = scan_order2(&y, &cands, opts()).unwrap();
    assert!((pairs[0].sce_drop - 1.0).abs() < 1e-12);
    assert_eq!(pairs[0].classification, Classification::Order1Pair);
}

#[test]
fn scan_order_limits() {
    let (y, x1, x2) = xor_design(2);
    let cands = [
        cand("a", &x1),
        cand("b", &x2),
        cand("c", &x1),
        cand("d", &x2),
    ];
    assert!(matches!(
        scan(&y, &cands, 4, opts()),
        Err(Error::InvalidArgument(_))
    ));
    assert!(scan(&y, &cands, 0, opts()).is_err());
    let triples = scan(
        &y,
        &cands,
        3,
        ScanOptions {
            replicates: 20,
            seed: 1,
        },
    )
    .unwrap();
    assert_eq!(triples.len(), 4);
    assert!(scan_order2(&y, &cands[..1], opts()).is_err());
    let dup = [cand("a", &x1), cand("a", &x2)];
    assert!(scan_order1(&y, &dup, opts()).is_err());
    let constant = vec![1u8; 8];
    assert!(matches!(
        scan_order1(&constant, &cands, opts()),
        Err(Error::DegenerateTarget(_))
    ));
}

#[test]
fn classify_pair_rules() {
    let null = |q95: f64| NullDropStats {
        replicates: 1,
        mean: 0.0,
        sd: 0.0,
        q95,
        seed: 0,
    };
    let result = |ce: f64, sce: f64, significant: bool| FeatureSetResult {
        features: vec!["x".into()],
        ce,
        rescaled_ce: ce,
        ce_drop: 1.0 - ce,
        sce_drop: sce,
        null: null(0.1),
        significant,
        classification: Classification::Insignificant,
    };
    let si = result(0.7, 0.3, true);
    let sj = result(0.6, 0.4, true);
    // increments: adding i to {j} = 0.6 - 0.2 = 0.4, adding j to {i} = 0.5
    let pair = result(0.2, 0.4, true);
    assert_eq!(
        classify_pair(&pair, &si, &sj, &null(0.1), &null(0.1)),
        Classification::Order2Interaction
    );
    // null of the weaker member (i) too high
    assert_eq!(
        classify_pair(&pair, &si, &sj, &null(0.5), &null(0.0)),
        Classification::Redundant
    );
    // pair not above the weaker single: additive
    let pair = result(0.3, 0.3, true);
    assert_eq!(
        classify_pair(&pair, &si, &sj, &null(0.1), &null(0.1)),
        Classification::Order1Pair
    );
    let weak = result(0.6, 0.4, false);
    assert_eq!(
        classify_pair(&pair, &si, &weak, &null(0.1), &null(0.1)),
        Classification::Insignificant
    );
}

fn data() -> impl Strategy<Value = (Vec<u8>, Vec<Vec<u8>>)> {
    (20usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(1u8..=4, n),
            prop::collection::vec(prop::collection::vec(0u8..=4, n), 3),
        )
    })
}

fn quick() -> ScanOptions {
    ScanOptions {
        replicates: 20,
        seed: 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conditioning_never_increases_entropy((y, xs) in data()) {
        let h = joint_conditional_entropy(&y, &[]).unwrap();
        let h1 = joint_conditional_entropy(&y, &[&xs[0]]).unwrap();
        let h2 = joint_conditional_entropy(&y, &[&xs[0], &xs[1]]).unwrap();
        let h3 = joint_conditional_entropy(&y, &[&xs[0], &xs[1], &xs[2]]).unwrap();
        prop_assert!(h1 <= h + 1e-12);
        prop_assert!(h2 <= h1 + 1e-12);
        prop_assert!(h3 <= h2 + 1e-12);
    }

    #[test]
    fn pair_ce_bounded_by_members((y, xs) in data()) {
        prop_assume!(y.iter().any(|&v| v != y[0]));
        let cands = [cand("a", &xs[0]), cand("b", &xs[1]), cand("c", &xs[2])];
        let singles = scan_order1(&y, &cands, quick()).unwrap();
        let pairs = scan_order2(&y, &cands, quick()).unwrap();
        for p in &pairs {
            let m = p.features.iter()
                .map(|f| singles.iter().find(|s| &s.features[0] == f).unwrap().ce)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(p.ce <= m + 1e-12);
        }
        for w in pairs.windows(2) {
            prop_assert!(w[0].ce <= w[1].ce);
        }
    }

    #[test]
    fn relabeling_a_covariate_changes_nothing((y, xs) in data(), perm in Just([4u8, 3, 0, 2, 1])) {
        prop_assume!(y.iter().any(|&v| v != y[0]));
        let relabeled: Vec<u8> = xs[0].iter().map(|&v| perm[v as usize]).collect();
        let a = [cand("a", &xs[0]), cand("b", &xs[1]), cand("c", &xs[2])];
        let b = [cand("a", &relabeled), cand("b", &xs[1]), cand("c", &xs[2])];
        prop_assert_eq!(scan_order1(&y, &a, quick()).unwrap(), scan_order1(&y, &b, quick()).unwrap());
        prop_assert_eq!(scan_order2(&y, &a, quick()).unwrap(), scan_order2(&y, &b, quick()).unwrap());
    }

    #[test]
    fn candidate_order_is_irrelevant((y, xs) in data()) {
        prop_assume!(y.iter().any(|&v| v != y[0]));
        let a = [cand("a", &xs[0]), cand("b", &xs[1]), cand("c", &xs[2])];
        let b = [cand("c", &xs[2]), cand("a", &xs[0]), cand("b", &xs[1])];
        prop_assert_eq!(scan_order2(&y, &a, quick()).unwrap(), scan_order2(&y, &b, quick()).unwrap());
    }
}
