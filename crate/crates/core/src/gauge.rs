//! Phase gauge: a shift with complex weights is unitarily equivalent to the
//! shift with weights `|λ|`, via a diagonal unitary `U e_v = β_v e_v` with
//! `β_v conj(β_{p(v)}) λ_v = |λ_v|`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Num, Zero};

use crate::error::{Error, Result};
use crate::forest::{DirectedForest, VertexId};
use crate::rational::{format_q, sqrt_exact, Q};

/// Real field for the complex weights: `f64`, or `Q` for Gaussian
/// rationals whose moduli are rational.
pub trait GaugeReal: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    fn sqrt_checked(x: &Self) -> Result<Self>;
}

impl GaugeReal for f64 {
    fn sqrt_checked(x: &Self) -> Result<Self> {
        Ok(x.sqrt())
    }
}

impl GaugeReal for Q {
    fn sqrt_checked(x: &Self) -> Result<Self> {
        sqrt_exact(x).ok_or_else(|| Error::NonRationalModulus(format_q(x)))
    }
}

pub fn modulus<T: GaugeReal>(z: &Complex<T>) -> Result<T> {
    T::sqrt_checked(&z.norm_sqr())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSystem<T> {
    pub beta: BTreeMap<VertexId, Complex<T>>,
}

impl<T: GaugeReal> PhaseSystem<T> {
    /// `β_v conj(β_{p(v)}) λ_v` for every vertex.
    pub fn conjugated(&self, forest: &DirectedForest, lambda: &BTreeMap<VertexId, Complex<T>>) -> BTreeMap<VertexId, Complex<T>> {
        forest
            .vertices()
            .map(|v| {
                let p = forest.parent(v).unwrap();
                let l = lambda.get(v).cloned().unwrap_or_else(Complex::zero);
                (v.clone(), self.beta[v].clone() * self.beta[p].conj() * l)
            })
            .collect()
    }
}

fn checked_weights<T: GaugeReal>(
    forest: &DirectedForest,
    lambda: &BTreeMap<VertexId, Complex<T>>,
) -> Result<BTreeMap<VertexId, Complex<T>>> {
    for v in lambda.keys() {
        if !forest.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
    }
    let mut out = BTreeMap::new();
    for v in forest.vertices() {
        let l = match lambda.get(v) {
            Some(l) => l.clone(),
            None if forest.is_root(v)? => Complex::zero(),
            None => return Err(Error::MissingWeight(v.clone())),
        };
        if forest.is_root(v)? && !l.is_zero() {
            return Err(Error::NonZeroRootWeight(v.clone()));
        }
        out.insert(v.clone(), l);
    }
    Ok(out)
}

/// Phases with `β = 1` at the smallest vertex of each tree, spread along
/// tree edges in both directions. Across a zero weight the phase is copied.
pub fn phase_gauge<T: GaugeReal>(forest: &DirectedForest, lambda: &BTreeMap<VertexId, Complex<T>>) -> Result<PhaseSystem<T>> {
    let lambda = checked_weights(forest, lambda)?;
    // |λ|/λ, or 1 for a zero weight
    let mut ratio: BTreeMap<&VertexId, Complex<T>> = BTreeMap::new();
    for (v, l) in &lambda {
        let r = if l.is_zero() {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(modulus(l)?, T::zero()) / l.clone()
        };
        ratio.insert(v, r);
    }
    let mut beta: BTreeMap<VertexId, Complex<T>> = BTreeMap::new();
    for start in forest.vertices() {
        if beta.contains_key(start) {
            continue;
        }
        beta.insert(start.clone(), Complex::new(T::one(), T::zero()));
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            let bv = beta[&v].clone();
            let p = forest.parent(&v)?;
            if p != &v && !beta.contains_key(p) {
                // β_p = β_v λ_v / |λ_v|
                beta.insert(p.clone(), bv.clone() / ratio[&v].clone());
                queue.push_back(p.clone());
            }
            for c in forest.children(&v)? {
                if !beta.contains_key(c) {
                    beta.insert(c.clone(), bv.clone() * ratio[c].clone());
                    queue.push_back(c.clone());
                }
            }
        }
    }
    Ok(PhaseSystem { beta })
}

/// `|λ_v|²` for every vertex, the squared weights of the gauged shift.
pub fn modulus_sq<T: GaugeReal>(lambda: &BTreeMap<VertexId, Complex<T>>) -> BTreeMap<VertexId, T> {
    lambda.iter().map(|(v, l)| (v.clone(), l.norm_sqr())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn c(re: Q, im: Q) -> Complex<Q> {
        Complex::new(re, im)
    }

    fn chain4() -> DirectedForest {
        DirectedForest::from_pairs([("a", "a"), ("b", "a"), ("c", "b"), ("d", "c")]).unwrap()
    }

    fn assert_gauged(f: &DirectedForest, lambda: &BTreeMap<VertexId, Complex<Q>>) -> PhaseSystem<Q> {
        let g = phase_gauge(f, lambda).unwrap();
        for (v, z) in g.conjugated(f, lambda) {
            let l = lambda.get(&v).cloned().unwrap_or_else(Complex::zero);
            assert_eq!(z, c(modulus(&l).unwrap(), qi(0)), "vertex {v}");
        }
        for b in g.beta.values() {
            assert_eq!(b.norm_sqr(), qi(1));
        }
        g
    }

    #[test]
    fn negative_chain_alternates() {
        let f = chain4();
        let lambda: BTreeMap<_, _> = ["b", "c", "d"].iter().map(|v| (VertexId::from(*v), c(qi(-2), qi(0)))).collect();
        let g = assert_gauged(&f, &lambda);
        let signs: Vec<Q> = ["a", "b", "c", "d"].iter().map(|v| g.beta[&VertexId::from(*v)].re.clone()).collect();
        assert_eq!(signs, vec![qi(1), qi(-1), qi(1), qi(-1)]);
    }

    #[test]
    fn imaginary_edge() {
        let f = chain4();
        let mut lambda: BTreeMap<_, _> = ["b", "c", "d"].iter().map(|v| (VertexId::from(*v), c(qi(1), qi(0)))).collect();
        lambda.insert(VertexId::from("c"), c(qi(0), qi(1)));
        let g = assert_gauged(&f, &lambda);
        let b = &g.beta[&VertexId::from("b")];
        assert_eq!(g.beta[&VertexId::from("c")], c(qi(0), qi(-1)) * b);
    }

    #[test]
    fn pythagorean_and_zero_weights() {
        let f = DirectedForest::from_pairs([("r", "r"), ("x", "r"), ("y", "x"), ("z", "r"), ("s", "s"), ("t", "s")]).unwrap();
        let lambda = BTreeMap::from([
            (VertexId::from("x"), c(q(3, 5), q(4, 5))),
            (VertexId::from("y"), c(qi(0), qi(0))),
            (VertexId::from("z"), c(qi(-5), qi(12))),
            (VertexId::from("t"), c(q(-8, 3), q(-2, 1))),
        ]);
        let g = assert_gauged(&f, &lambda);
        assert_eq!(g.beta[&VertexId::from("r")], c(qi(1), qi(0)));
        assert_eq!(g.beta[&VertexId::from("s")], c(qi(1), qi(0)));
        assert_eq!(g.beta[&VertexId::from("y")], g.beta[&VertexId::from("x")]);
    }

    #[test]
    fn errors() {
        let f = chain4();
        let lambda = BTreeMap::from([
            (VertexId::from("b"), c(qi(1), qi(1))),
            (VertexId::from("c"), c(qi(1), qi(0))),
            (VertexId::from("d"), c(qi(1), qi(0))),
        ]);
        assert!(matches!(phase_gauge(&f, &lambda), Err(Error::NonRationalModulus(_))));
        let lambda = BTreeMap::from([(VertexId::from("b"), c(qi(1), qi(0)))]);
        assert_eq!(phase_gauge(&f, &lambda).unwrap_err(), Error::MissingWeight(VertexId::from("c")));
        let fl: BTreeMap<VertexId, Complex<f64>> = ["b", "c", "d"]
            .iter()
            .map(|v| (VertexId::from(*v), Complex::new(1.0, 1.0)))
            .collect();
        let g = phase_gauge(&f, &fl).unwrap();
        for (v, z) in g.conjugated(&f, &fl) {
            if v.as_str() != "a" {
                assert!((z - Complex::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
            }
        }
    }
}
