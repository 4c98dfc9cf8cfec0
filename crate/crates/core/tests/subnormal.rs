use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::gen::{random_envelope, random_subnormal_shift, random_subnormal_tree};
use shiftlab::hypo::check_power_hyponormal;
use shiftlab::subnormal::{
    backward_extension_feasible, check_subnormal, construct_backward_extension, join_at_depth, rooted_sum_extend,
};
use shiftlab::{DirectedForest, Error, Node, WeightedShift, Q};

fn family<R: Rng>(rng: &mut R, size: usize, bad: Option<usize>) -> Vec<WeightedShift> {
    (0..size).map(|i| random_subnormal_tree(rng, 6, bad == Some(i))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn measures_reproduce_moments(seed in any::<u64>()) {
        let s = random_subnormal_shift(&mut ChaCha8Rng::seed_from_u64(seed), 12, true);
        let cert = check_subnormal(&s).unwrap();
        prop_assert!(cert.is_subnormal());
        let table = s.moment_table(12);
        for v in s.forest().vertices() {
            let mu = cert.measure(v.as_str()).unwrap();
            for n in 0..=12 {
                prop_assert_eq!(mu.moment(n), table[v][n].clone());
            }
        }
    }

    #[test]
    fn subnormal_implies_power_hyponormal(seed in any::<u64>()) {
        let s = random_subnormal_shift(&mut ChaCha8Rng::seed_from_u64(seed), 10, true);
        let rep = check_power_hyponormal(&s, 5).unwrap();
        prop_assert!(rep.holds_up_to_kmax());
    }

    #[test]
    fn restriction_keeps_measures(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_subnormal_shift(&mut rng, 12, true);
        let cert = check_subnormal(&s).unwrap();
        let vs: Vec<_> = s.forest().vertices().cloned().collect();
        let v = &vs[rng.gen_range(0..vs.len())];
        let sub = s.restrict_to(v).unwrap();
        let sub_cert = check_subnormal(&sub).unwrap();
        prop_assert!(sub_cert.is_subnormal());
        for u in sub.forest().vertices() {
            let node = Node::Core(u.clone());
            if u != v {
                prop_assert_eq!(&sub_cert.measures[&node], &cert.measures[&node]);
            }
        }
    }

    #[test]
    fn extension_round_trip(seed in any::<u64>(), k in 1usize..5) {
        let s = random_subnormal_tree(&mut ChaCha8Rng::seed_from_u64(seed), 8, false);
        let c0 = backward_extension_feasible(&s, k).unwrap().c0().unwrap().clone();
        let (ext, plan) = construct_backward_extension(&s, k, None).unwrap();
        prop_assert_eq!(&plan.scale, &c0.recip());
        prop_assert!(check_subnormal(&ext).unwrap().is_subnormal());
        let root = s.forest().tree_root().unwrap();
        prop_assert_eq!(ext.restrict_to(root).unwrap(), s.clone());
        let top = Node::Core(ext.forest().tree_root().unwrap().clone());
        prop_assert_eq!(ext.moment(&top, 0).unwrap(), Q::one());
        // ‖S'^j e_top‖² = C · m_root(j − k) for j ≥ k
        for j in k..k + 4 {
            prop_assert_eq!(ext.moment(&top, j).unwrap(), &plan.scale * s.moment(&Node::Core(root.clone()), j - k).unwrap());
        }
    }

    #[test]
    fn defective_roots_have_no_extension(seed in any::<u64>()) {
        let s = random_subnormal_tree(&mut ChaCha8Rng::seed_from_u64(seed), 8, true);
        prop_assert!(!backward_extension_feasible(&s, 1).unwrap().is_feasible());
        prop_assert_eq!(construct_backward_extension(&s, 1, None).unwrap_err(), Error::MemberInfeasible { index: 0, steps: 1 });
    }

    #[test]
    fn rooted_sum_identity(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(1..=4);
        let fam = family(&mut rng, size, None);
        let joint = rooted_sum_extend(&fam, k, "w", true).unwrap();
        let total: Q = joint.theta_sq.iter().zip(&joint.c).map(|(a, c)| a * c).sum();
        prop_assert!(total.is_one());
        prop_assert!(check_subnormal(&joint.shift).unwrap().is_subnormal());
        prop_assert!(backward_extension_feasible(&joint.shift, k).unwrap().is_feasible());
        prop_assert!(joint.theta_sq.iter().all(|a| !a.is_zero()));

        let bad = rng.gen_range(0..size);
        let fam = family(&mut rng, size, Some(bad));
        prop_assert_eq!(
            rooted_sum_extend(&fam, k, "w", true).unwrap_err(),
            Error::MemberInfeasible { index: bad, steps: k + 1 }
        );
    }

    #[test]
    fn envelope_independence(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(1..=4);
        let bad = if rng.gen_bool(0.5) { Some(rng.gen_range(0..size)) } else { None };
        let fam = family(&mut rng, size, bad);
        let a = random_envelope(&mut rng, size, k);
        let b = random_envelope(&mut rng, size, k);
        let verdict = |env: &DirectedForest| match join_at_depth(&fam, env, k) {
            Ok(joint) => {
                assert!(check_subnormal(&joint).unwrap().is_subnormal());
                assert!(backward_extension_feasible(&joint, 0).unwrap().is_feasible());
                true
            }
            Err(Error::MemberInfeasible { .. }) => false,
            Err(e) => panic!("unexpected error {e}"),
        };
        let va = verdict(&a);
        prop_assert_eq!(va, verdict(&b));
        prop_assert_eq!(va, bad.is_none());
    }
}
