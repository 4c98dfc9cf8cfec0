use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::gen::{random_hyponormal_star, random_non_forkless_tree, random_tailed_shift};
use shiftlab::hypo::{
    check_hyponormal, check_hyponormal_power, check_power_hyponormal, checked_nodes, hip_k, make_counterexample, psd_matrix,
    psd_oracle, HipVerdict,
};
use shiftlab::rational::{q, qi, to_f64};
use shiftlab::{DirectedForest, ForestClassification, Node, TailProfile, VertexId, WeightSystem, WeightedShift, Q};

fn minimal_fork() -> DirectedForest {
    DirectedForest::from_pairs([("v0", "v0"), ("v1", "v0"), ("a", "v1"), ("b", "v1")]).unwrap()
}

#[test]
fn minimal_fork_counterexample() {
    let ce = make_counterexample(&minimal_fork(), None).unwrap();
    assert_eq!(ce.beta, qi(0));
    let s = &ce.shift;
    let h1 = check_hyponormal(s, 1).unwrap();
    assert!(h1.holds());
    assert_eq!(h1.value("v0"), Some(&qi(1)));
    assert_eq!(h1.value("v1"), Some(&qi(1)));
    assert_eq!(hip_k(s, &Node::core("v0"), 2).unwrap(), q(10, 9));
    let rep = check_power_hyponormal(s, 2).unwrap();
    assert_eq!(rep.reports[1].verdict, HipVerdict::NotHyponormal(Node::core("v0")));
    assert_eq!(rep.all_powers, Some(false));
    assert_eq!(rep.classes, vec![ForestClassification::NotForkless]);

    let float = check_hyponormal_power::<f64>(s, 2, 1e-12).unwrap();
    assert!((float.value("v0").unwrap() - 10.0 / 9.0).abs() < 1e-12);
    assert_eq!(float.verdict, rep.reports[1].verdict);
}

#[test]
fn sibling_arm_counterexample() {
    let t = DirectedForest::from_pairs([("v0", "v0"), ("v1", "v0"), ("c", "v0"), ("a", "v1"), ("b", "v1")]).unwrap();
    let ce = make_counterexample(&t, None).unwrap();
    assert_eq!(ce.beta, q(1, 2));
    assert_eq!(hip_k(&ce.shift, &Node::core("v0"), 2).unwrap(), q(19, 18));
    assert!(check_hyponormal(&ce.shift, 1).unwrap().holds());
}

#[test]
fn explicit_fork_choice() {
    let t = DirectedForest::from_pairs([
        ("r", "r"),
        ("x", "r"),
        ("y", "x"),
        ("z", "x"),
        ("u", "y"),
        ("w", "y"),
    ])
    .unwrap();
    let ce = make_counterexample(&t, Some(&VertexId::from("y"))).unwrap();
    assert_eq!(ce.v0, VertexId::from("x"));
    assert_eq!(ce.v2, VertexId::from("u"));
    assert!(check_hyponormal(&ce.shift, 1).unwrap().holds());
    assert_eq!(hip_k(&ce.shift, &Node::core("x"), 2).unwrap(), ce.expected_hip2());
}

#[test]
fn two_arm_star_all_powers() {
    let f = DirectedForest::from_pairs([("r", "r"), ("a", "r"), ("b", "a"), ("c", "r")]).unwrap();
    let sq = BTreeMap::from([(VertexId::from("a"), q(1, 2)), (VertexId::from("b"), qi(1)), (VertexId::from("c"), q(1, 2))]);
    let tails = BTreeMap::from([
        (VertexId::from("b"), TailProfile::constant(qi(1))),
        (VertexId::from("c"), TailProfile::constant(qi(1))),
    ]);
    let s = WeightedShift::new(f, WeightSystem::new(sq, tails)).unwrap();
    assert!(check_hyponormal(&s, 1).unwrap().holds());
    assert!(check_hyponormal(&s, 2).unwrap().holds());
    let rep = check_power_hyponormal(&s, 6).unwrap();
    assert_eq!(rep.all_powers, Some(true));
}

#[test]
fn tail_positions_are_checked() {
    // a decreasing tail step makes hip_1 exceed 1 at the tail
    let f = DirectedForest::from_pairs([("0", "0"), ("1", "0")]).unwrap();
    let sq = BTreeMap::from([(VertexId::from("1"), qi(1))]);
    let tails = BTreeMap::from([(VertexId::from("1"), TailProfile::new(vec![qi(1), qi(2)], qi(1)))]);
    let s = WeightedShift::new(f, WeightSystem::new(sq, tails)).unwrap();
    let rep = check_hyponormal(&s, 1).unwrap();
    assert_eq!(rep.verdict, HipVerdict::NotHyponormal(Node::tail("1", 1)));
    assert_eq!(rep.values[&Node::tail("1", 1)], qi(2));
}

fn min_eigenvalue(m: &[Vec<Q>]) -> f64 {
    let n = m.len();
    let dense = DMatrix::from_fn(n, n, |i, j| to_f64(&m[i][j]));
    dense.symmetric_eigenvalues().min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hip_agrees_with_psd_oracle(seed in any::<u64>(), k in 1usize..5) {
        let s = random_tailed_shift(&mut ChaCha8Rng::seed_from_u64(seed), 15);
        for v in checked_nodes(&s, k) {
            if s.chi_nodes(&v, k).unwrap().is_empty() {
                continue;
            }
            let h = hip_k(&s, &v, k).unwrap();
            prop_assert_eq!(h <= Q::one(), psd_oracle(&s, &v, k).unwrap(), "node {} k {}", v, k);
            let (_, m) = psd_matrix(&s, &v, k).unwrap();
            let gap = to_f64(&h) - 1.0;
            if gap.abs() > 1e-6 {
                prop_assert_eq!(gap < 0.0, min_eigenvalue(&m) > -1e-12);
            }
        }
    }

    #[test]
    fn float_mode_matches_exact(seed in any::<u64>(), k in 1usize..4) {
        let s = random_tailed_shift(&mut ChaCha8Rng::seed_from_u64(seed), 15);
        let exact = check_hyponormal(&s, k).unwrap();
        let float = check_hyponormal_power::<f64>(&s, k, 1e-9).unwrap();
        for (n, h) in &exact.values {
            prop_assert!((to_f64(h) - float.values[n]).abs() < 1e-9);
        }
        let near_one = exact.values.values().any(|h| (to_f64(h) - 1.0).abs() < 1e-6 && *h != Q::one());
        if !near_one {
            prop_assert_eq!(exact.verdict, float.verdict);
        }
    }

    #[test]
    fn hyponormal_stars_are_power_hyponormal(seed in any::<u64>()) {
        let s = random_hyponormal_star(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let rep = check_power_hyponormal(&s, 6).unwrap();
        prop_assert!(rep.holds_up_to_kmax());
        prop_assert_eq!(rep.all_powers, Some(true));
    }

    #[test]
    fn counterexamples_fail_at_two(seed in any::<u64>()) {
        let t = random_non_forkless_tree(&mut ChaCha8Rng::seed_from_u64(seed), 18);
        let ce = make_counterexample(&t, None).unwrap();
        let rep = check_power_hyponormal(&ce.shift, 2).unwrap();
        prop_assert!(rep.reports[0].holds());
        prop_assert_eq!(&rep.reports[1].verdict, &HipVerdict::NotHyponormal(Node::Core(ce.v0.clone())));
        prop_assert_eq!(hip_k(&ce.shift, &Node::Core(ce.v0.clone()), 2).unwrap(), ce.expected_hip2());
    }
}
