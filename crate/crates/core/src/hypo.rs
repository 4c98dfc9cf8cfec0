//! Hyponormality of powers of weighted shifts.
//!
//! `S^k` is hyponormal iff the k-th power of the forest is leafless and
//! `hip_k(v) = Σ_{u ∈ chi_k(v)} |λ_u^{(k)}|² / ‖S^k e_u‖² ≤ 1` at every
//! vertex. Along a tail `hip_k` is a ratio of two windows of `k` tail
//! weights, so it equals 1 once both windows sit in the constant region.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forest::{DirectedForest, ForestClassification, VertexId};
use crate::linalg::{psd_certificate, Matrix};
use crate::rational::{q, Q};
use crate::scalar::Scalar;
use crate::shift::{Node, TailProfile, WeightSystem, WeightedShift};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum HipVerdict {
    Hyponormal,
    NotHyponormal(Node),
    LeafObstruction(Node),
}

impl HipVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, HipVerdict::Hyponormal)
    }

    pub fn witness(&self) -> Option<&Node> {
        match self {
            HipVerdict::Hyponormal => None,
            HipVerdict::NotHyponormal(v) | HipVerdict::LeafObstruction(v) => Some(v),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HipVerdict::Hyponormal => "hyponormal",
            HipVerdict::NotHyponormal(_) => "not_hyponormal",
            HipVerdict::LeafObstruction(_) => "leaf_obstruction",
        }
    }
}

/// `hip_k` at every core vertex and at the tail positions before
/// stabilisation, with the resulting verdict for `S^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HipReport<S = Q> {
    pub k: usize,
    pub values: BTreeMap<Node, S>,
    pub verdict: HipVerdict,
}

impl<S: Scalar> HipReport<S> {
    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }

    pub fn value(&self, v: &str) -> Option<&S> {
        self.values.get(&Node::core(v))
    }

    pub fn to_json(&self) -> Value {
        let hip: serde_json::Map<String, Value> = self
            .values
            .iter()
            .map(|(n, v)| (n.to_string(), Value::String(v.render())))
            .collect();
        json!({
            "k": self.k,
            "verdict": self.verdict.name(),
            "witness": self.verdict.witness().map(|n| n.to_string()),
            "hip": hip,
        })
    }
}

/// Nodes at which `hip_k` is evaluated: the core plus the first
/// `prefix_len + 2k` positions of every tail.
pub fn checked_nodes(s: &WeightedShift, k: usize) -> Vec<Node> {
    let mut nodes: Vec<Node> = s.forest().vertices().cloned().map(Node::Core).collect();
    for (leaf, tail) in &s.weights().tails {
        for d in 1..=tail.prefix_sq.len() + 2 * k {
            nodes.push(Node::tail(leaf.clone(), d));
        }
    }
    nodes
}

/// First core vertex that is a leaf of the k-th power forest.
pub fn power_leaf(s: &WeightedShift, k: usize) -> Result<Option<Node>> {
    for v in s.forest().vertices() {
        let node = Node::Core(v.clone());
        if s.forest().depth(v)? >= k && s.chi_nodes(&node, k)?.is_empty() {
            return Ok(Some(node));
        }
    }
    Ok(None)
}

struct HipContext<'a, S> {
    s: &'a WeightedShift,
    k: usize,
    table: BTreeMap<VertexId, Vec<S>>,
}

impl<'a, S: Scalar> HipContext<'a, S> {
    fn new(s: &'a WeightedShift, k: usize) -> Self {
        HipContext {
            s,
            k,
            table: s.moment_table_in(k),
        }
    }

    fn moment(&self, u: &Node) -> S {
        match u {
            Node::Core(v) => self.table[v][self.k].clone(),
            Node::Tail { leaf, depth } => self.s.weights().tails[leaf].moment_in(*depth, self.k),
        }
    }

    fn edge_product(&self, u: &Node) -> Result<S> {
        let mut acc = S::one();
        let mut cur = u.clone();
        for _ in 0..self.k {
            acc = acc * S::from_q(self.s.node_sq(&cur)?);
            cur = self.s.node_parent(&cur)?;
        }
        Ok(acc)
    }

    /// `None` when some k-th child has a vanishing k-th moment.
    fn hip(&self, v: &Node) -> Result<Option<S>> {
        let mut sum = S::zero();
        for u in self.s.chi_nodes(v, self.k)? {
            let m = self.moment(&u);
            if m.is_zero() {
                return Ok(None);
            }
            sum = sum + self.edge_product(&u)? / m;
        }
        Ok(Some(sum))
    }
}

/// Exact `hip_k(v)` for a proper leafless shift.
pub fn hip_k(s: &WeightedShift, v: &Node, k: usize) -> Result<Q> {
    assert!(k >= 1, "hip_k needs k >= 1");
    s.require_proper()?;
    s.require_leafless()?;
    s.check_node(v)?;
    let ctx = HipContext::<Q>::new(s, k);
    Ok(ctx.hip(v)?.expect("leafless shifts have positive moments"))
}

/// Decides hyponormality of `S^k`. Values above `1 + tol` fail; exact
/// scalars ignore `tol`.
pub fn check_hyponormal_power<S: Scalar>(s: &WeightedShift, k: usize, tol: f64) -> Result<HipReport<S>> {
    assert!(k >= 1, "hyponormality of S^k needs k >= 1");
    s.require_proper()?;
    let ctx = HipContext::<S>::new(s, k);
    let mut values = BTreeMap::new();
    let mut first_bad = None;
    for v in checked_nodes(s, k) {
        if let Some(h) = ctx.hip(&v)? {
            if first_bad.is_none() && !h.le_tol(&S::one(), tol) {
                first_bad = Some(v.clone());
            }
            values.insert(v, h);
        }
    }
    let verdict = match (power_leaf(s, k)?, first_bad) {
        (Some(leaf), _) => HipVerdict::LeafObstruction(leaf),
        (None, Some(v)) => HipVerdict::NotHyponormal(v),
        (None, None) => HipVerdict::Hyponormal,
    };
    Ok(HipReport { k, values, verdict })
}

/// Exact hyponormality of `S^k`.
pub fn check_hyponormal(s: &WeightedShift, k: usize) -> Result<HipReport> {
    check_hyponormal_power::<Q>(s, k, 0.0)
}

/// Reports for `k = 1..=k_max` plus, where available, a verdict valid for
/// every power.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerReport<S = Q> {
    pub reports: Vec<HipReport<S>>,
    /// Classification of each tree of the forest, in root order.
    pub classes: Vec<ForestClassification>,
    /// `Some(false)` once some power fails; `Some(true)` when the forest is
    /// forkless and `S` is hyponormal; otherwise `None`.
    pub all_powers: Option<bool>,
}

impl<S: Scalar> PowerReport<S> {
    pub fn is_forkless(&self) -> bool {
        self.classes.iter().all(|c| *c != ForestClassification::NotForkless)
    }

    /// Whether every checked power is hyponormal.
    pub fn holds_up_to_kmax(&self) -> bool {
        self.reports.iter().all(HipReport::holds)
    }

    pub fn first_failure(&self) -> Option<&HipReport<S>> {
        self.reports.iter().find(|r| !r.holds())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "reports": self.reports.iter().map(HipReport::to_json).collect::<Vec<_>>(),
            "forkless": self.is_forkless(),
            "all_powers": self.all_powers,
        })
    }
}

/// Classifies every tree of the shift's forest.
pub fn forest_classes(s: &WeightedShift) -> Result<Vec<ForestClassification>> {
    let tailed = s.tailed();
    s.forest()
        .components()
        .iter()
        .map(|tree| {
            let t: BTreeSet<VertexId> = tailed.iter().filter(|v| tree.contains(v)).cloned().collect();
            tree.classify_forkless(&t)
        })
        .collect()
}

pub fn check_power_hyponormal_in<S: Scalar>(s: &WeightedShift, k_max: usize, tol: f64) -> Result<PowerReport<S>> {
    let reports = (1..=k_max)
        .map(|k| check_hyponormal_power::<S>(s, k, tol))
        .collect::<Result<Vec<_>>>()?;
    let classes = forest_classes(s)?;
    let forkless = classes.iter().all(|c| *c != ForestClassification::NotForkless);
    let all_powers = if reports.iter().any(|r| !r.holds()) {
        Some(false)
    } else if forkless {
        // hyponormal shifts on forkless forests are power hyponormal
        let first = match reports.first() {
            Some(r) => r.holds(),
            None => check_hyponormal_power::<S>(s, 1, tol)?.holds(),
        };
        Some(first)
    } else {
        None
    };
    Ok(PowerReport {
        reports,
        classes,
        all_powers,
    })
}

/// Exact power hyponormality check up to `k_max`.
pub fn check_power_hyponormal(s: &WeightedShift, k_max: usize) -> Result<PowerReport> {
    check_power_hyponormal_in::<Q>(s, k_max, 0.0)
}

/// The form `‖S^k f‖² − ‖S^{*k} f‖²` restricted to `f` supported on
/// `chi_k(v)`, written in the rescaled coordinates `g_u = f_u λ̄_u^{(k)}`:
/// `diag(m_u(k) / |λ_u^{(k)}|²) − J`.
pub fn psd_matrix(s: &WeightedShift, v: &Node, k: usize) -> Result<(Vec<Node>, Matrix)> {
    s.require_proper()?;
    s.require_leafless()?;
    let ctx = HipContext::<Q>::new(s, k);
    let nodes = s.chi_nodes(v, k)?;
    let n = nodes.len();
    let mut m = vec![vec![-Q::one(); n]; n];
    for (i, u) in nodes.iter().enumerate() {
        m[i][i] = ctx.moment(u) / ctx.edge_product(u)? - Q::one();
    }
    Ok((nodes, m))
}

/// Positive semidefiniteness of the local form at `v`, decided by exact
/// symmetric elimination. Agrees with `hip_k(v) ≤ 1`.
pub fn psd_oracle(s: &WeightedShift, v: &Node, k: usize) -> Result<bool> {
    let (_, m) = psd_matrix(s, v, k)?;
    Ok(psd_certificate(&m).is_none())
}

/// A hyponormal shift whose square is not hyponormal, on a tree that is
/// not forkless.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub shift: WeightedShift,
    pub v0: VertexId,
    pub v1: VertexId,
    pub v2: VertexId,
    pub beta: Q,
}

impl Counterexample {
    /// `(10 − β) / 9`, the value of `hip_2(v0)`.
    pub fn expected_hip2(&self) -> Q {
        (Q::from_integer(10.into()) - &self.beta) / Q::from_integer(9.into())
    }
}

/// The fork used when none is given: the smallest non-root vertex with at
/// least two children.
pub fn default_fork(tree: &DirectedForest) -> Option<VertexId> {
    tree.vertices()
        .find(|v| !tree.is_root(v).unwrap() && tree.degree(v).unwrap() >= 2)
        .cloned()
}

/// Weights on `tree` (every childless vertex gets a tail) making `S`
/// hyponormal while `hip_2(p(v1)) = (10 − β)/9 > 1`.
///
/// With `v0 = p(v1)`, `v2` the smallest child of `v1`, `C1` the siblings of
/// `v1` and `C2` the siblings of `v2`: `|λ_{v1}|² = 4/3 (1 − β)` and `C1`
/// shares `β`, where `β = 0` if `C1` is empty and `1/2` otherwise;
/// `|λ_{v2}|² = 2/3` and `C2` shares `2/3`; below `v2` child sums are 2,
/// elsewhere 1.
pub fn make_counterexample(tree: &DirectedForest, v1: Option<&VertexId>) -> Result<Counterexample> {
    if !tree.is_tree() {
        return Err(Error::NotATree {
            components: tree.component_count(),
        });
    }
    let v1 = match v1 {
        Some(v) => {
            let v = tree.lookup(v.as_str())?.clone();
            if tree.degree(&v)? < 2 {
                return Err(Error::NotAFork(v));
            }
            if tree.is_root(&v)? {
                return Err(Error::RootFork(v));
            }
            v
        }
        None => default_fork(tree).ok_or(Error::ForklessInput)?,
    };
    let v0 = tree.parent(&v1)?.clone();
    let kids = tree.children(&v1)?;
    let v2 = kids.iter().min().expect("fork").clone();
    let c2: Vec<&VertexId> = kids.iter().filter(|u| **u != v2).collect();
    let c1: Vec<&VertexId> = tree.children(&v0)?.iter().filter(|u| **u != v1).collect();
    let beta = if c1.is_empty() { Q::zero() } else { q(1, 2) };
    let below_v2 = tree.descendants(&v2)?;

    let mut sq = BTreeMap::new();
    let mut tails = BTreeMap::new();
    let share = |total: Q, n: usize| total / Q::from_integer((n as i64).into());
    for v in tree.vertices() {
        if tree.is_root(v)? {
            sq.insert(v.clone(), Q::zero());
        }
        let ch = tree.children(v)?;
        let child_sum = if below_v2.contains(v) { Q::from_integer(2.into()) } else { Q::one() };
        if ch.is_empty() {
            tails.insert(v.clone(), TailProfile::constant(child_sum));
        } else if *v == v0 {
            sq.insert(v1.clone(), q(4, 3) * (Q::one() - &beta));
            for u in &c1 {
                sq.insert((*u).clone(), share(beta.clone(), c1.len()));
            }
        } else if *v == v1 {
            sq.insert(v2.clone(), q(2, 3));
            for u in &c2 {
                sq.insert((*u).clone(), share(q(2, 3), c2.len()));
            }
        } else {
            for u in ch {
                sq.insert(u.clone(), share(child_sum.clone(), ch.len()));
            }
        }
    }
    let shift = WeightedShift::new(tree.clone(), WeightSystem::new(sq, tails))?;
    Ok(Counterexample {
        shift,
        v0,
        v1,
        v2,
        beta,
    })
}

/// Whether every `hip` value in the report is at most 1 (ignores leaves).
pub fn all_values_le_one(report: &HipReport) -> bool {
    report.values.values().all(|h| !(h - Q::one()).is_positive())
}
