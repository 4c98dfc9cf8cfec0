//! Random forests and shifts for randomized checks.
//!
//! Every generator takes the caller's RNG, so runs are reproducible from a
//! seed. Weights come from small rationals to keep exact arithmetic cheap.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::forest::{DirectedForest, VertexId};
use crate::moments::{mixture, AtomicMeasure};
use crate::rational::{q, Q};
use crate::shift::{TailProfile, WeightSystem, WeightedShift};

/// `p/d` with `p` in `1..=6` and `d` in `1..=4`.
pub fn small_q<R: Rng + ?Sized>(rng: &mut R) -> Q {
    q(rng.gen_range(1..=6), rng.gen_range(1..=4))
}

/// Labels `v0..v{n-1}` in random order.
fn labels<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<VertexId> {
    let mut names: Vec<VertexId> = (0..n).map(|i| VertexId::new(format!("v{i}"))).collect();
    names.shuffle(rng);
    names
}

/// Vertex `i` gets a parent among `0..i`, or is a root with probability
/// `root_prob`; vertex 0 is always a root.
fn grow<R: Rng + ?Sized>(rng: &mut R, n: usize, root_prob: f64) -> Vec<usize> {
    (0..n)
        .map(|i| if i == 0 || rng.gen_bool(root_prob) { i } else { rng.gen_range(0..i) })
        .collect()
}

fn build(names: &[VertexId], parent: &[usize]) -> DirectedForest {
    let map = parent
        .iter()
        .enumerate()
        .map(|(i, &p)| (names[i].clone(), names[p].clone()))
        .collect();
    DirectedForest::from_parent_map(map).expect("generated forests are valid")
}

/// A forest with `1..=max_vertices` vertices.
pub fn random_forest<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize) -> DirectedForest {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let names = labels(rng, n);
    let parent = grow(rng, n, 0.15);
    build(&names, &parent)
}

/// A rooted tree with exactly `n` vertices.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DirectedForest {
    let names = labels(rng, n.max(1));
    let parent = grow(rng, n.max(1), 0.0);
    build(&names, &parent)
}

fn random_tail<R: Rng + ?Sized>(rng: &mut R) -> TailProfile {
    let len = rng.gen_range(0..=2);
    let prefix = (0..len).map(|_| small_q(rng)).collect();
    TailProfile::new(prefix, small_q(rng))
}

/// A proper leafless shift on a forest with at most `max_core` core
/// vertices. Half the time the weights split random child sums in random
/// proportions, which keeps many `hip` values near 1.
pub fn random_tailed_shift<R: Rng + ?Sized>(rng: &mut R, max_core: usize) -> WeightedShift {
    let n = rng.gen_range(1..=max_core.max(1));
    let names = labels(rng, n);
    let parent = grow(rng, n, 0.05);
    let forest = build(&names, &parent);
    let structured = rng.gen_bool(0.5);
    let mut sq = BTreeMap::new();
    let mut tails = BTreeMap::new();
    for v in forest.vertices() {
        let ch = forest.children(v).unwrap();
        if ch.is_empty() {
            let tail = if structured {
                let c = q(rng.gen_range(1..=3), rng.gen_range(1..=2));
                if rng.gen_bool(0.5) {
                    TailProfile::constant(c)
                } else {
                    TailProfile::new(vec![small_q(rng)], c)
                }
            } else {
                random_tail(rng)
            };
            tails.insert(v.clone(), tail);
            continue;
        }
        if structured {
            let target = q(rng.gen_range(1..=3), rng.gen_range(1..=2));
            let parts: Vec<i64> = ch.iter().map(|_| rng.gen_range(1..=3)).collect();
            let total: i64 = parts.iter().sum();
            for (u, p) in ch.iter().zip(parts) {
                sq.insert(u.clone(), &target * q(p, total));
            }
        } else {
            for u in ch {
                sq.insert(u.clone(), small_q(rng));
            }
        }
    }
    WeightedShift::new(forest, WeightSystem::new(sq, tails)).expect("generated shifts are valid")
}

/// Nondecreasing random sequence of length `n`.
fn nondecreasing<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Q> {
    let mut v: Vec<Q> = (0..n).map(|_| small_q(rng)).collect();
    v.sort();
    v
}

/// A hyponormal shift on an n-arm star, `1 ≤ n ≤ max_arms`.
///
/// Along each arm the squared weights after the first edge are
/// nondecreasing into the tail; the first edge of arm `j` is `r_j` times
/// the next one with `Σ r_j ≤ 1`.
pub fn random_hyponormal_star<R: Rng + ?Sized>(rng: &mut R, max_arms: usize) -> WeightedShift {
    let arms = rng.gen_range(1..=max_arms.max(1));
    let mut parent = BTreeMap::from([(VertexId::from("o"), VertexId::from("o"))]);
    let mut sq = BTreeMap::new();
    let mut tails = BTreeMap::new();
    for j in 0..arms {
        let len = rng.gen_range(1..=3);
        let prefix_len = rng.gen_range(0..=2);
        // weights of arm edges 2..=len, then tail prefix, then constant
        let rest = nondecreasing(rng, len - 1 + prefix_len + 1);
        let r = q(rng.gen_range(1..=2), 2 * arms as i64);
        let mut above = VertexId::from("o");
        for i in 0..len {
            let v = VertexId::new(format!("a{j}_{i}"));
            parent.insert(v.clone(), above);
            let w = if i == 0 { &r * &rest[0] } else { rest[i - 1].clone() };
            sq.insert(v.clone(), w);
            above = v;
        }
        let tail = TailProfile::new(rest[len - 1..rest.len() - 1].to_vec(), rest.last().unwrap().clone());
        tails.insert(above, tail.normalized());
    }
    let forest = DirectedForest::from_parent_map(parent).expect("star");
    WeightedShift::new(forest, WeightSystem::new(sq, tails)).expect("generated star is valid")
}

/// A tree with `4..=max_core` vertices containing a non-root vertex with at
/// least two children.
pub fn random_non_forkless_tree<R: Rng + ?Sized>(rng: &mut R, max_core: usize) -> DirectedForest {
    let n = rng.gen_range(4..=max_core.max(4));
    let names = labels(rng, n);
    let mut parent = vec![0, 0, 1, 1];
    for i in 4..n {
        parent.push(rng.gen_range(0..i));
    }
    build(&names, &parent)
}

/// A subnormal proper leafless shift on a forest with at most `max_core`
/// vertices. Measures are chosen bottom-up: childless vertices carry
/// constant tails, and the child weights at `v` are `p_u / C_u` with
/// proportions `p_u` summing to 1 (to at most 1 at roots when
/// `root_defect` is set), where `C_u = ∫ t^{-1} dμ_u`.
pub fn random_subnormal_shift<R: Rng + ?Sized>(rng: &mut R, max_core: usize, root_defect: bool) -> WeightedShift {
    let n = rng.gen_range(1..=max_core.max(1));
    let names = labels(rng, n);
    let parent = grow(rng, n, 0.05);
    let forest = build(&names, &parent);
    let mut sq: BTreeMap<VertexId, Q> = BTreeMap::new();
    let mut tails = BTreeMap::new();
    let mut mu: BTreeMap<VertexId, AtomicMeasure> = BTreeMap::new();
    let constants = [q(1, 2), q(1, 1), q(2, 1), q(3, 1), q(4, 3)];
    let mut order: Vec<(usize, VertexId)> = forest
        .vertices()
        .map(|v| (forest.depth(v).unwrap(), v.clone()))
        .collect();
    order.sort_by_key(|a| std::cmp::Reverse(a.0));
    for (_, v) in order {
        let root = forest.is_root(&v).unwrap();
        let target = if root && root_defect {
            [q(1, 1), q(1, 2), q(3, 4)].choose(rng).unwrap().clone()
        } else {
            Q::one()
        };
        let ch = forest.children(&v).unwrap();
        if ch.is_empty() {
            let c = constants.choose(rng).unwrap().clone();
            // only a root may start its tail below the constant
            let first = &c * &target;
            let tail = TailProfile::new(vec![first.clone()], c.clone()).normalized();
            let mut m = AtomicMeasure::dirac(c.clone()).scaled(&(first / &c));
            m = m.plus(&AtomicMeasure::new([(Q::zero(), Q::one() - &target)]).unwrap());
            tails.insert(v.clone(), tail);
            mu.insert(v, m);
            continue;
        }
        let parts: Vec<i64> = ch.iter().map(|_| rng.gen_range(1..=3)).collect();
        let total: i64 = parts.iter().sum();
        let mut pieces = Vec::new();
        for (u, p) in ch.iter().zip(parts) {
            let cu = mu[u].neg_moment(1).finite().expect("children have no atom at 0").clone();
            let w = &target * q(p, total) / cu;
            pieces.push((w.clone(), mu[u].clone()));
            sq.insert(u.clone(), w);
        }
        let rho = mixture(&pieces).unwrap();
        let m = rho
            .divided_by_power(1)
            .unwrap()
            .plus(&AtomicMeasure::new([(Q::zero(), Q::one() - &target)]).unwrap());
        mu.insert(v, m);
    }
    WeightedShift::new(forest, WeightSystem::new(sq, tails)).expect("generated shift is valid")
}

/// A subnormal shift on a single rooted tree whose root measure has no
/// atom at 0 (so it has backward extensions of every length), or, with
/// `defective`, a root measure with an atom at 0.
pub fn random_subnormal_tree<R: Rng + ?Sized>(rng: &mut R, max_core: usize, defective: bool) -> WeightedShift {
    loop {
        let s = random_subnormal_shift(rng, max_core, defective);
        if !s.forest().is_tree() {
            continue;
        }
        let cert = crate::subnormal::check_subnormal(&s).expect("generated shift is valid");
        let root = s.forest().tree_root().unwrap();
        if cert.measure(root.as_str()).unwrap().has_atom_at_zero() != defective {
            continue;
        }
        return s;
    }
}

/// A rooted tree whose childless vertices all sit at depth `k`, with
/// `frontier` of them. Level sizes are random and nonincreasing upwards.
pub fn random_envelope<R: Rng + ?Sized>(rng: &mut R, frontier: usize, k: usize) -> DirectedForest {
    assert!(frontier >= 1 && k >= 1);
    let name = |d: usize, i: usize| VertexId::new(format!("e{d}_{i}"));
    let mut sizes = vec![frontier; k + 1];
    sizes[0] = 1;
    for d in (1..k).rev() {
        sizes[d] = rng.gen_range(1..=sizes[d + 1]);
    }
    let mut parent = BTreeMap::from([(name(0, 0), name(0, 0))]);
    for d in 1..=k {
        // split sizes[d] children into sizes[d - 1] nonempty consecutive groups
        let mut cuts: Vec<usize> = (1..sizes[d]).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(sizes[d - 1] - 1).collect();
        cuts.sort();
        let mut group = 0;
        for i in 0..sizes[d] {
            if group < cuts.len() && i == cuts[group] {
                group += 1;
            }
            parent.insert(name(d, i), name(d - 1, group));
        }
    }
    DirectedForest::from_parent_map(parent).expect("envelope")
}

/// Gaussian-rational weights with rational moduli; about one in ten is 0.
pub fn random_gaussian_weights<R: Rng + ?Sized>(rng: &mut R, forest: &DirectedForest) -> BTreeMap<VertexId, Complex<Q>> {
    const TRIPLES: [(i64, i64, i64); 6] = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25), (0, 1, 1), (1, 0, 1)];
    let mut out = BTreeMap::new();
    for v in forest.vertices() {
        if forest.is_root(v).unwrap() {
            continue;
        }
        if rng.gen_bool(0.1) {
            out.insert(v.clone(), Complex::zero());
            continue;
        }
        let (mut a, mut b, c) = *TRIPLES.choose(rng).unwrap();
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut a, &mut b);
        }
        let sa = if rng.gen_bool(0.5) { -1 } else { 1 };
        let sb = if rng.gen_bool(0.5) { -1 } else { 1 };
        let r = small_q(rng);
        out.insert(v.clone(), Complex::new(&r * q(sa * a, c), &r * q(sb * b, c)));
    }
    out
}

/// Complex weights with random modulus in `[0.1, 3)` and random phase.
pub fn random_complex_weights<R: Rng + ?Sized>(rng: &mut R, forest: &DirectedForest) -> BTreeMap<VertexId, Complex<f64>> {
    forest
        .vertices()
        .filter(|v| !forest.is_root(v).unwrap())
        .map(|v| {
            let z = if rng.gen_bool(0.1) {
                Complex::zero()
            } else {
                Complex::from_polar(rng.gen_range(0.1..3.0), rng.gen_range(0.0..TAU))
            };
            (v.clone(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypo::check_hyponormal;
    use crate::subnormal::check_subnormal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_meet_their_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let s = random_tailed_shift(&mut rng, 12);
            assert!(s.is_proper() && s.is_leafless());
            let star = random_hyponormal_star(&mut rng, 6);
            assert!(check_hyponormal(&star, 1).unwrap().holds());
            let t = random_non_forkless_tree(&mut rng, 20);
            assert!(crate::hypo::default_fork(&t).is_some());
            let sub = random_subnormal_shift(&mut rng, 10, true);
            assert!(check_subnormal(&sub).unwrap().is_subnormal());
            let env = random_envelope(&mut rng, 3, 2);
            assert_eq!(crate::subnormal::envelope_frontier(&env, 2).unwrap().len(), 3);
        }
    }
}
