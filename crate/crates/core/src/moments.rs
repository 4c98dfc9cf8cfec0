//! Finite atomic measures on `[0, ∞)` and their moment sequences.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::Rat;
use crate::linalg::{determinant, psd_certificate, quadratic_form, Matrix};
use crate::rational::{format_q, pow_u, Extended, Q};

/// `Σ w_i δ_{t_i}` with distinct sorted atoms `t_i ≥ 0` and masses `w_i > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<(Q, Q)>,
}

#[derive(Serialize, Deserialize)]
struct RawAtom {
    t: Rat,
    w: Rat,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<RawAtom>,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(raw.atoms.into_iter().map(|a| (a.t.0, a.w.0)))
    }
}

impl From<AtomicMeasure> for RawMeasure {
    fn from(m: AtomicMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms.into_iter().map(|(t, w)| RawAtom { t: Rat(t), w: Rat(w) }).collect(),
        }
    }
}

impl AtomicMeasure {
    /// Merges repeated atoms and drops zero masses. Negative atoms or
    /// masses are rejected.
    pub fn new(atoms: impl IntoIterator<Item = (Q, Q)>) -> Result<Self> {
        let mut merged: BTreeMap<Q, Q> = BTreeMap::new();
        for (t, w) in atoms {
            if t.is_negative() {
                return Err(Error::InvalidMeasure(format!("atom {} is negative", format_q(&t))));
            }
            if w.is_negative() {
                return Err(Error::InvalidMeasure(format!("mass {} is negative", format_q(&w))));
            }
            *merged.entry(t).or_insert_with(Q::zero) += w;
        }
        Ok(AtomicMeasure {
            atoms: merged.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        })
    }

    pub fn zero() -> Self {
        AtomicMeasure::default()
    }

    pub fn dirac(t: Q) -> Self {
        Self::new([(t, Q::one())]).expect("nonnegative atom")
    }

    pub fn atoms(&self) -> &[(Q, Q)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Q {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn mass_at_zero(&self) -> Q {
        match self.atoms.first() {
            Some((t, w)) if t.is_zero() => w.clone(),
            _ => Q::zero(),
        }
    }

    pub fn has_atom_at_zero(&self) -> bool {
        !self.mass_at_zero().is_zero()
    }

    pub fn max_atom(&self) -> Option<&Q> {
        self.atoms.last().map(|(t, _)| t)
    }

    /// `∫ t^n dμ` with `0^0 = 1`.
    pub fn moment(&self, n: usize) -> Q {
        self.atoms.iter().map(|(t, w)| w * pow_u(t, n)).sum()
    }

    pub fn moments_of(&self, n_max: usize) -> MomentSeq {
        MomentSeq {
            a: (0..=n_max).map(|n| self.moment(n)).collect(),
        }
    }

    /// `∫ t^{-k} dμ`, infinite when there is mass at 0.
    pub fn neg_moment(&self, k: usize) -> Extended {
        if self.has_atom_at_zero() {
            return Extended::Infinite;
        }
        Extended::Finite(self.atoms.iter().map(|(t, w)| w / pow_u(t, k)).sum())
    }

    pub fn scaled(&self, c: &Q) -> Self {
        Self::new(self.atoms.iter().map(|(t, w)| (t.clone(), w * c))).expect("scaling keeps signs")
    }

    /// The measure `t^k dμ`; it represents `(a_{n+k})_n`.
    pub fn times_power(&self, k: usize) -> Self {
        Self::new(self.atoms.iter().map(|(t, w)| (t.clone(), w * pow_u(t, k)))).expect("nonnegative")
    }

    /// The measure `t^{-k} dμ`; `None` when there is mass at 0 and `k ≥ 1`.
    pub fn divided_by_power(&self, k: usize) -> Option<Self> {
        if k > 0 && self.has_atom_at_zero() {
            return None;
        }
        Some(Self::new(self.atoms.iter().map(|(t, w)| (t.clone(), w / pow_u(t, k)))).expect("nonnegative"))
    }

    pub fn plus(&self, other: &AtomicMeasure) -> Self {
        Self::new(self.atoms.iter().chain(other.atoms.iter()).cloned()).expect("both valid")
    }
}

/// `Σ c_j μ_j`; zero coefficients drop their component.
pub fn mixture(parts: &[(Q, AtomicMeasure)]) -> Result<AtomicMeasure> {
    let mut atoms = Vec::new();
    for (c, m) in parts {
        if c.is_negative() {
            return Err(Error::InvalidMeasure(format!("coefficient {} is negative", format_q(c))));
        }
        atoms.extend(m.atoms.iter().map(|(t, w)| (t.clone(), c * w)));
    }
    AtomicMeasure::new(atoms)
}

/// A finite prefix `a_0..a_N` of a candidate moment sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSeq {
    a: Vec<Q>,
}

impl MomentSeq {
    /// Entries must be nonnegative, and once some `a_k` with `k ≥ 1` is 0
    /// every later entry must be 0 as well.
    pub fn new(a: Vec<Q>) -> Result<Self> {
        if let Some(bad) = a.iter().find(|x| x.is_negative()) {
            return Err(Error::InvalidMoments(format!("negative entry {}", format_q(bad))));
        }
        if let Some(k) = a.iter().skip(1).position(Zero::is_zero) {
            if a.iter().skip(k + 1).any(|x| !x.is_zero()) {
                return Err(Error::InvalidMoments(format!(
                    "a_{} = 0 but a later entry is positive",
                    k + 1
                )));
            }
        }
        Ok(MomentSeq { a })
    }

    pub fn values(&self) -> &[Q] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HankelKind {
    /// `(a_{i+j})`
    Plain,
    /// `(a_{i+j+1})`
    Shifted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HankelVerdict {
    /// Both Hankel matrices are PSD at the largest size the prefix allows;
    /// the payload is the last index `N` of the prefix. Necessary only.
    ConsistentUpTo(usize),
    /// A Hankel matrix that is not PSD, with a vector `x` such that
    /// `x^T H x = value < 0` and the determinant of `H`.
    Inconsistent {
        kind: HankelKind,
        size: usize,
        x: Vec<Q>,
        value: Q,
        det: Q,
    },
}

fn hankel(a: &[Q], size: usize, offset: usize) -> Matrix {
    (0..size)
        .map(|i| (0..size).map(|j| a[i + j + offset].clone()).collect())
        .collect()
}

/// Necessary Stieltjes conditions on a finite prefix.
pub fn hankel_check(seq: &MomentSeq) -> HankelVerdict {
    let a = &seq.a;
    if a.is_empty() {
        return HankelVerdict::ConsistentUpTo(0);
    }
    let n = a.len() - 1;
    let plain = n / 2 + 1;
    let shifted = if n >= 1 { (n - 1) / 2 + 1 } else { 0 };
    for (kind, size, offset) in [(HankelKind::Plain, plain, 0), (HankelKind::Shifted, shifted, 1)] {
        if size == 0 {
            continue;
        }
        let h = hankel(a, size, offset);
        if let Some(x) = psd_certificate(&h) {
            let value = quadratic_form(&h, &x);
            let det = determinant(&h);
            return HankelVerdict::Inconsistent { kind, size, x, value, det };
        }
    }
    HankelVerdict::ConsistentUpTo(n)
}

/// Growth certificate `a_{2n} ≤ r^{2n} a_0` on the available prefix, where
/// `r` bounds the squared norm of the operator producing the sequence.
pub fn determinacy_guard(seq: &MomentSeq, r: &Q) -> bool {
    let a = &seq.a;
    let Some(a0) = a.first() else {
        return true;
    };
    (0..a.len())
        .step_by(2)
        .all(|m| a[m] <= pow_u(r, m) * a0)
}

/// Outcome of extending a moment sequence `k` steps backwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MomentExtension {
    Feasible {
        /// `a_{-k}, ..., a_{-1}`; `a_{-k} = 1`.
        prefix: Vec<Q>,
        /// Representing measure of `(a_{n-k})_n`.
        measure: AtomicMeasure,
    },
    Infeasible {
        neg_moment: Extended,
    },
}

impl MomentExtension {
    pub fn is_feasible(&self) -> bool {
        matches!(self, MomentExtension::Feasible { .. })
    }
}

/// Backward extension of the moment sequence of a probability measure.
pub fn backward_extend_moments(m: &AtomicMeasure, k: usize) -> Result<MomentExtension> {
    let mass = m.total_mass();
    if !mass.is_one() {
        return Err(Error::NotProbability(format_q(&mass)));
    }
    Ok(backward_extend_measure(m, k))
}

/// Same construction for a finite measure of any mass; the extended
/// sequence still starts at `a_{-k} = 1` and continues with the moments of `m`.
pub fn backward_extend_measure(m: &AtomicMeasure, k: usize) -> MomentExtension {
    if k == 0 {
        return MomentExtension::Feasible {
            prefix: Vec::new(),
            measure: m.clone(),
        };
    }
    let neg = m.neg_moment(k);
    let defect = match neg.finite() {
        Some(v) if *v <= Q::one() => Q::one() - v,
        _ => return MomentExtension::Infeasible { neg_moment: neg },
    };
    let body = m.divided_by_power(k).expect("no atom at zero");
    let measure = body.plus(&AtomicMeasure::new([(Q::zero(), defect)]).expect("defect is nonnegative"));
    let prefix = (1..=k).rev().map(|j| measure.moment(k - j)).collect();
    MomentExtension::Feasible { prefix, measure }
}
