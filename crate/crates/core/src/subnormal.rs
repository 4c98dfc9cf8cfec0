//! Subnormality certificates and extension constructions.
//!
//! A proper leafless shift is subnormal iff every vertex carries a Stieltjes
//! moment sequence `m_v(n) = ‖S^n e_v‖²`. With `ρ_v = Σ_{u ∈ chi(v)} |λ_u|² μ_u`
//! the sequence at `v` is Stieltjes iff `∫ t^{-1} dρ_v ≤ 1`, and then
//! `μ_v = t^{-1} ρ_v + (1 − ∫ t^{-1} dρ_v) δ_0`. Measures are finitely atomic
//! because tails are eventually constant.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forest::{DirectedForest, VertexId};
use crate::hypo::{check_power_hyponormal, hip_k, HipVerdict};
use crate::moments::{backward_extend_measure, mixture, AtomicMeasure, MomentExtension};
use crate::rational::{format_q, pow_u, Extended, Q};
use crate::shift::{Node, TailProfile, WeightedShift};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeMeasure {
    /// Representing measure of `(m_v(n))_n`, including the atom at 0.
    pub measure: AtomicMeasure,
    /// Mass at 0.
    pub defect: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubnormalVerdict {
    Subnormal,
    /// `excess = ∫ t^{-1} dρ − 1`, or `None` when `ρ` has mass at 0.
    NotSubnormal { witness: Node, excess: Option<Q> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubnormalCert {
    /// Measures at every core vertex and at tail positions inside the
    /// prefix; deeper tail positions carry `δ_c`.
    pub measures: BTreeMap<Node, NodeMeasure>,
    pub verdict: SubnormalVerdict,
}

impl SubnormalCert {
    pub fn is_subnormal(&self) -> bool {
        self.verdict == SubnormalVerdict::Subnormal
    }

    pub fn measure(&self, v: &str) -> Option<&AtomicMeasure> {
        self.measures.get(&Node::core(v)).map(|m| &m.measure)
    }

    pub fn to_json(&self) -> Value {
        let measures: serde_json::Map<String, Value> = self
            .measures
            .iter()
            .map(|(n, m)| {
                let atoms = serde_json::to_value(&m.measure).expect("measure serializes");
                (
                    n.to_string(),
                    json!({"atoms": atoms["atoms"], "defect": format_q(&m.defect)}),
                )
            })
            .collect();
        let (verdict, witness, excess) = match &self.verdict {
            SubnormalVerdict::Subnormal => ("subnormal", None, None),
            SubnormalVerdict::NotSubnormal { witness, excess } => (
                "not_subnormal",
                Some(witness.to_string()),
                Some(excess.as_ref().map_or_else(|| "inf".to_string(), format_q)),
            ),
        };
        json!({"verdict": verdict, "witness": witness, "excess": excess, "measures": measures})
    }
}

/// One step up: the measure at a vertex from `ρ`, or the excess.
fn lift(rho: &AtomicMeasure) -> std::result::Result<NodeMeasure, Option<Q>> {
    match rho.neg_moment(1) {
        Extended::Infinite => Err(None),
        Extended::Finite(neg) if neg > Q::one() => Err(Some(neg - Q::one())),
        Extended::Finite(neg) => {
            let defect = Q::one() - neg;
            let body = rho.divided_by_power(1).expect("no atom at zero");
            let measure = body.plus(&AtomicMeasure::new([(Q::zero(), defect.clone())]).expect("defect ≥ 0"));
            Ok(NodeMeasure { measure, defect })
        }
    }
}

/// Measures along a tail, from the constant region up to depth 1.
fn tail_measures(leaf: &VertexId, tail: &TailProfile, out: &mut BTreeMap<Node, NodeMeasure>) -> std::result::Result<AtomicMeasure, (Node, Option<Q>)> {
    let len = tail.prefix_sq.len().max(1);
    let mut mu = AtomicMeasure::dirac(tail.constant_sq.clone());
    out.insert(
        Node::tail(leaf.clone(), len),
        NodeMeasure {
            measure: mu.clone(),
            defect: Q::zero(),
        },
    );
    for d in (1..len).rev() {
        let rho = mu.scaled(tail.edge_sq(d + 1));
        let node = Node::tail(leaf.clone(), d);
        let nm = lift(&rho).map_err(|e| (node.clone(), e))?;
        mu = nm.measure.clone();
        out.insert(node, nm);
    }
    Ok(mu)
}

/// Bottom-up subnormality certificate. Stops at the first vertex whose
/// moment sequence is not Stieltjes.
pub fn check_subnormal(s: &WeightedShift) -> Result<SubnormalCert> {
    s.require_proper()?;
    s.require_leafless()?;
    let mut measures: BTreeMap<Node, NodeMeasure> = BTreeMap::new();
    let forest = s.forest();
    for v in post_order(forest) {
        let mut parts: Vec<(Q, AtomicMeasure)> = Vec::new();
        for c in forest.children(&v)? {
            parts.push((s.sq(c)?.clone(), measures[&Node::Core(c.clone())].measure.clone()));
        }
        if let Some(tail) = s.tail(&v) {
            match tail_measures(&v, tail, &mut measures) {
                Ok(mu) => parts.push((tail.edge_sq(1).clone(), mu)),
                Err((witness, excess)) => {
                    return Ok(SubnormalCert {
                        measures,
                        verdict: SubnormalVerdict::NotSubnormal { witness, excess },
                    })
                }
            }
        }
        let rho = mixture(&parts)?;
        match lift(&rho) {
            Ok(nm) => {
                measures.insert(Node::Core(v), nm);
            }
            Err(excess) => {
                return Ok(SubnormalCert {
                    measures,
                    verdict: SubnormalVerdict::NotSubnormal {
                        witness: Node::Core(v),
                        excess,
                    },
                })
            }
        }
    }
    Ok(SubnormalCert {
        measures,
        verdict: SubnormalVerdict::Subnormal,
    })
}

/// Children before parents; siblings in id order.
fn post_order(forest: &DirectedForest) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(forest.len());
    let mut stack: Vec<(VertexId, bool)> = forest.roots().into_iter().rev().map(|r| (r, false)).collect();
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            out.push(v);
            continue;
        }
        stack.push((v.clone(), true));
        for c in forest.children(&v).expect("vertex").iter().rev() {
            stack.push((c.clone(), false));
        }
    }
    out
}

fn root_measure(s: &WeightedShift) -> Result<(VertexId, AtomicMeasure)> {
    let root = s
        .forest()
        .tree_root()
        .map_err(|_| Error::NotATree {
            components: s.forest().component_count(),
        })?
        .clone();
    let cert = check_subnormal(s)?;
    match &cert.verdict {
        SubnormalVerdict::Subnormal => Ok((root.clone(), cert.measures[&Node::Core(root)].measure.clone())),
        SubnormalVerdict::NotSubnormal { witness, .. } => {
            Err(Error::NotSubnormalInput(format!("moment sequence at {witness} is not Stieltjes")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackwardFeasibility {
    /// `C_0 = ∫ t^{-k} dμ_ω`.
    Feasible { c0: Q },
    Infeasible { neg_moment: Extended },
}

impl BackwardFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, BackwardFeasibility::Feasible { .. })
    }

    pub fn c0(&self) -> Option<&Q> {
        match self {
            BackwardFeasibility::Feasible { c0 } => Some(c0),
            BackwardFeasibility::Infeasible { .. } => None,
        }
    }
}

/// Whether a subnormal shift on a rooted tree has a subnormal `k`-step
/// backward extension: iff `∫ t^{-k} dμ_ω < ∞`.
pub fn backward_extension_feasible(s: &WeightedShift, k: usize) -> Result<BackwardFeasibility> {
    let (_, mu) = root_measure(s)?;
    Ok(feasibility_of(&mu, k))
}

fn feasibility_of(mu: &AtomicMeasure, k: usize) -> BackwardFeasibility {
    match mu.neg_moment(k) {
        Extended::Finite(c0) => BackwardFeasibility::Feasible { c0 },
        neg => BackwardFeasibility::Infeasible { neg_moment: neg },
    }
}

/// Weights chosen for a backward extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionPlan {
    pub k: usize,
    /// `edge_sq[l] = a_{-l} / a_{-l-1}`; entry 0 sits on the old root.
    pub edge_sq: Vec<Q>,
    pub scale: Q,
}

impl ExtensionPlan {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "edge_sq": self.edge_sq.iter().map(format_q).collect::<Vec<_>>(),
            "C": format_q(&self.scale),
        })
    }
}

/// Subnormal `k`-step backward extension with `a_n = C m_ω(n)` for
/// `n ≥ 0`; `C` defaults to `1 / C_0`.
pub fn construct_backward_extension(s: &WeightedShift, k: usize, scale: Option<Q>) -> Result<(WeightedShift, ExtensionPlan)> {
    let (root, mu) = root_measure(s)?;
    let c0 = match feasibility_of(&mu, k) {
        BackwardFeasibility::Feasible { c0 } => c0,
        BackwardFeasibility::Infeasible { .. } => return Err(Error::MemberInfeasible { index: 0, steps: k }),
    };
    let max = c0.recip();
    let scale = scale.unwrap_or_else(|| max.clone());
    if !scale.is_positive() || scale > max {
        return Err(Error::ScaleOutOfRange {
            scale: format_q(&scale),
            max: format_q(&max),
        });
    }
    let prefix = match backward_extend_measure(&mu.scaled(&scale), k) {
        MomentExtension::Feasible { prefix, .. } => prefix,
        MomentExtension::Infeasible { .. } => unreachable!("C C_0 ≤ 1"),
    };
    // a[i] = a_{i-k} for i = 0..=k
    let mut a = prefix;
    a.push(scale.clone());
    let edge_sq: Vec<Q> = (0..k).map(|l| &a[k - l] / &a[k - l - 1]).collect();
    let ext = s.backward_extension(&edge_sq)?;
    let plan = ExtensionPlan { k, edge_sq, scale };

    let top = Node::Core(DirectedForest::backward_chain(&root, k).last().cloned().unwrap_or(root));
    if !check_subnormal(&ext)?.is_subnormal() {
        return Err(Error::Postcondition("backward extension is not subnormal".into()));
    }
    let table = ext.restrict_to(top.as_core().unwrap())?.moment_table(k);
    for (j, aj) in a.iter().enumerate() {
        if ext.moment_with(&table, &top, j)? != *aj {
            return Err(Error::Postcondition(format!("moment {j} of the new root")));
        }
    }
    Ok((ext, plan))
}

/// Joint extension of a family below a common new root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedSumExtension {
    pub shift: WeightedShift,
    /// Squared weights on the edges from the new root, in family order.
    pub theta_sq: Vec<Q>,
    /// `C_j = ∫ t^{-1} dμ_j`.
    pub c: Vec<Q>,
    /// `D_j = ∫ t^{-(k+1)} dμ_j`.
    pub d: Vec<Q>,
}

fn member_root_measures(members: &[WeightedShift], steps: usize) -> Result<Vec<AtomicMeasure>> {
    if members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    members
        .iter()
        .enumerate()
        .map(|(index, m)| {
            if !m.forest().is_tree() {
                return Err(Error::NotRootedTree { index });
            }
            let (_, mu) = root_measure(m)?;
            if steps > 0 && mu.has_atom_at_zero() {
                return Err(Error::MemberInfeasible { index, steps });
            }
            Ok(mu)
        })
        .collect()
}

fn theta_weights(mus: &[AtomicMeasure], k: usize) -> (Vec<Q>, Vec<Q>, Vec<Q>) {
    let c: Vec<Q> = mus.iter().map(|m| m.neg_moment(1).finite().unwrap().clone()).collect();
    let d: Vec<Q> = mus.iter().map(|m| m.neg_moment(k + 1).finite().unwrap().clone()).collect();
    let mut a = vec![Q::zero(); mus.len()];
    let mut used = Q::zero();
    for i in 1..mus.len() {
        let bound = [Q::one(), c[i].recip(), d[i].recip()].into_iter().min().unwrap();
        a[i] = bound / pow_u(&Q::from_integer(2.into()), i);
        used += &a[i] * &c[i];
    }
    a[0] = (Q::one() - used) / &c[0];
    (a, c, d)
}

/// Joins subnormal shifts on rooted trees under a new root `root` so that
/// the joint shift is subnormal with a `k`-step backward extension.
/// Each member needs a `(k+1)`-step extension.
pub fn rooted_sum_extend(members: &[WeightedShift], k: usize, root: &str, auto_prefix: bool) -> Result<RootedSumExtension> {
    let mus = member_root_measures(members, k + 1)?;
    let (a, c, d) = theta_weights(&mus, k);
    let shift = WeightedShift::rooted_sum(members, root, &a, auto_prefix)?;

    let total: Q = a.iter().zip(&c).map(|(x, y)| x * y).sum();
    if !total.is_one() {
        return Err(Error::Postcondition("Σ a_j C_j ≠ 1".into()));
    }
    if !check_subnormal(&shift)?.is_subnormal() {
        return Err(Error::Postcondition("joint shift is not subnormal".into()));
    }
    if !backward_extension_feasible(&shift, k)?.is_feasible() {
        return Err(Error::Postcondition(format!("joint shift has no {k}-step extension")));
    }
    let member_norm = members.iter().map(WeightedShift::shift_norm_sq).max().unwrap();
    if shift.shift_norm_sq() != member_norm {
        return Err(Error::Postcondition("joint norm exceeds the family bound".into()));
    }
    Ok(RootedSumExtension {
        shift,
        theta_sq: a,
        c,
        d,
    })
}

/// Checks that every childless envelope vertex sits at depth `k` and
/// returns them in id order.
pub fn envelope_frontier(envelope: &DirectedForest, k: usize) -> Result<Vec<VertexId>> {
    let root = envelope
        .tree_root()
        .map_err(|_| Error::FrontierMismatch("envelope is not a rooted tree".into()))?;
    let mut frontier = Vec::new();
    for v in envelope.childless() {
        let depth = envelope.depth(&v)?;
        if depth != k {
            return Err(Error::FrontierMismatch(format!("childless vertex {v} at depth {depth}, expected {k}")));
        }
        frontier.push(v);
    }
    if frontier.is_empty() || frontier == [root.clone()] && k > 0 {
        return Err(Error::FrontierMismatch("empty frontier".into()));
    }
    frontier.sort();
    Ok(frontier)
}

/// Joint subnormal extension of a family along an envelope tree whose
/// frontier at depth `k` receives the members in order.
///
/// Member `j` is renamed so its root becomes the j-th frontier vertex and
/// its other vertices get that vertex as prefix (`f:v`). Then, from depth
/// `k − 1` up to the root, each envelope vertex at depth `d` joins its
/// children with [`rooted_sum_extend`] keeping a `d`-step extension.
pub fn join_at_depth(members: &[WeightedShift], envelope: &DirectedForest, k: usize) -> Result<WeightedShift> {
    if k == 0 {
        return Err(Error::FrontierMismatch("depth must be at least 1".into()));
    }
    let frontier = envelope_frontier(envelope, k)?;
    if frontier.len() != members.len() {
        return Err(Error::FrontierMismatch(format!(
            "{} frontier vertices for {} members",
            frontier.len(),
            members.len()
        )));
    }
    member_root_measures(members, k)?;

    let mut built: BTreeMap<VertexId, WeightedShift> = BTreeMap::new();
    for (f, m) in frontier.iter().zip(members) {
        let root = m.forest().tree_root()?.clone();
        let renamed = m.relabel(|v| if *v == root { f.clone() } else { v.prefixed(&format!("{f}:")) })?;
        built.insert(f.clone(), renamed);
    }
    for d in (0..k).rev() {
        let level: Vec<VertexId> = envelope
            .vertices()
            .filter(|v| envelope.depth(v).unwrap() == d)
            .cloned()
            .collect();
        for u in level {
            let parts: Vec<WeightedShift> = envelope.children(&u)?.iter().map(|c| built.remove(c).expect("built below")).collect();
            let joint = rooted_sum_extend(&parts, d, u.as_str(), false)?;
            built.insert(u, joint.shift);
        }
    }
    let root = envelope.tree_root()?;
    Ok(built.remove(root).expect("root built"))
}

/// Joint shift built from members with power hyponormal 1-step
/// extensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerHypoJoint {
    pub shift: WeightedShift,
    /// `a_j²` in family order.
    pub a_sq: Vec<Q>,
    /// `ã_j = a_j² · sq_j`, the squared weights below the new root.
    pub root_sq: Vec<Q>,
}

/// Member `j` comes with `sq_j`, the squared weight above its root in a
/// 1-step extension that is power hyponormal up to `k_max`. The joint root
/// gets edges `ã_j = a_j² sq_j` with `a_j² = 2^{-(j+2)} / max(1, sq_j)`, so
/// `hip_k(ω) = Σ a_j² hip_k(ω_j) < 1`.
pub fn powerhypo_rooted_sum_extend(members: &[(WeightedShift, Q)], k_max: usize, root: &str) -> Result<PowerHypoJoint> {
    if members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut extensions = Vec::new();
    for (index, (m, sq)) in members.iter().enumerate() {
        if !m.forest().is_tree() {
            return Err(Error::NotRootedTree { index });
        }
        if !sq.is_positive() {
            return Err(Error::NegativeWeight(format_q(sq)));
        }
        let ext = m.backward_extension(std::slice::from_ref(sq))?;
        let report = check_power_hyponormal(&ext, k_max)?;
        if let Some(bad) = report.first_failure() {
            return Err(Error::MemberNotExtendable { index, k: bad.k });
        }
        extensions.push(ext);
    }
    let a_sq: Vec<Q> = members
        .iter()
        .enumerate()
        .map(|(j, (_, sq))| pow_u(&Q::new(1.into(), 2.into()), j + 2) / sq.clone().max(Q::one()))
        .collect();
    let root_sq: Vec<Q> = a_sq.iter().zip(members).map(|(a, (_, sq))| a * sq).collect();
    let plain: Vec<WeightedShift> = members.iter().map(|(m, _)| m.clone()).collect();
    let shift = WeightedShift::rooted_sum(&plain, root, &root_sq, true)?;

    let report = check_power_hyponormal(&shift, k_max)?;
    if let Some(bad) = report.first_failure() {
        return Err(Error::Postcondition(format!("joint shift fails at power {}", bad.k)));
    }
    let omega = Node::core(root);
    for k in 1..=k_max {
        if matches!(report.reports[k - 1].verdict, HipVerdict::LeafObstruction(_)) {
            continue;
        }
        let mut expected = Q::zero();
        for (a, ext) in a_sq.iter().zip(&extensions) {
            let top = Node::Core(ext.forest().tree_root()?.clone());
            expected += a * hip_k(ext, &top, k)?;
        }
        if hip_k(&shift, &omega, k)? != expected {
            return Err(Error::Postcondition(format!("hip_{k} at the joint root")));
        }
    }
    Ok(PowerHypoJoint { shift, a_sq, root_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::ForestClassification;
    use crate::hypo::{check_hyponormal, make_counterexample};
    use crate::rational::{q, qi};
    use crate::shift::{make_isometric, WeightSystem};

    fn vid(s: &str) -> VertexId {
        VertexId::from(s)
    }

    /// `0 -> 1` with `|λ_1|² = w` and a constant tail `c` on 1.
    fn chain(w: Q, c: Q) -> WeightedShift {
        let f = DirectedForest::from_pairs([("0", "0"), ("1", "0")]).unwrap();
        let sq = BTreeMap::from([(vid("1"), w)]);
        let tails = BTreeMap::from([(vid("1"), TailProfile::constant(c))]);
        WeightedShift::new(f, WeightSystem::new(sq, tails)).unwrap()
    }

    fn binary() -> DirectedForest {
        DirectedForest::from_pairs([("r", "r"), ("a", "r"), ("b", "r"), ("c", "a"), ("d", "a")]).unwrap()
    }

    #[test]
    fn isometric_is_subnormal() {
        let s = make_isometric(&binary()).unwrap();
        let cert = check_subnormal(&s).unwrap();
        assert!(cert.is_subnormal());
        for v in ["r", "a", "b", "c", "d"] {
            assert_eq!(cert.measure(v), Some(&AtomicMeasure::dirac(qi(1))));
        }
    }

    #[test]
    fn chain_verdicts() {
        let cert = check_subnormal(&chain(qi(2), qi(1))).unwrap();
        assert_eq!(
            cert.verdict,
            SubnormalVerdict::NotSubnormal {
                witness: Node::core("0"),
                excess: Some(qi(1))
            }
        );
        let s = chain(qi(1), qi(2));
        let cert = check_subnormal(&s).unwrap();
        assert!(cert.is_subnormal());
        let mu = cert.measure("0").unwrap();
        assert_eq!(mu, &AtomicMeasure::new([(qi(0), q(1, 2)), (qi(2), q(1, 2))]).unwrap());
        for n in 1..8 {
            assert_eq!(mu.moment(n), pow_u(&qi(2), n - 1));
        }
        assert_eq!(s.vertex_measure(&Node::core("0")).unwrap().measure().as_ref(), Some(mu));
    }

    #[test]
    fn tail_prefix_failure_is_reported() {
        let f = DirectedForest::from_pairs([("0", "0"), ("1", "0")]).unwrap();
        let sq = BTreeMap::from([(vid("1"), qi(1))]);
        let tails = BTreeMap::from([(vid("1"), TailProfile::new(vec![qi(1), qi(3)], qi(1)))]);
        let s = WeightedShift::new(f, WeightSystem::new(sq, tails)).unwrap();
        let cert = check_subnormal(&s).unwrap();
        assert_eq!(
            cert.verdict,
            SubnormalVerdict::NotSubnormal {
                witness: Node::tail("1", 1),
                excess: Some(qi(2))
            }
        );
    }

    #[test]
    fn feasibility() {
        let iso = make_isometric(&binary()).unwrap();
        for k in 0..4 {
            assert_eq!(backward_extension_feasible(&iso, k).unwrap().c0(), Some(&qi(1)));
        }
        assert!(!backward_extension_feasible(&chain(qi(1), qi(2)), 1).unwrap().is_feasible());
        assert_eq!(backward_extension_feasible(&chain(qi(2), qi(2)), 3).unwrap().c0(), Some(&q(1, 8)));
        assert!(matches!(
            backward_extension_feasible(&chain(qi(2), qi(1)), 1),
            Err(Error::NotSubnormalInput(_))
        ));
    }

    #[test]
    fn backward_extension_examples() {
        let iso = make_isometric(&binary()).unwrap();
        let (ext, plan) = construct_backward_extension(&iso, 2, Some(qi(1))).unwrap();
        assert_eq!(plan.edge_sq, vec![qi(1), qi(1)]);
        assert_eq!(ext.sq(&vid("r")).unwrap(), &qi(1));
        assert_eq!(ext.sq(&vid("r^2")).unwrap(), &qi(0));
        let table = ext.moment_table(6);
        assert!(table.values().all(|row| row.iter().all(|m| m.is_one())));

        let s = chain(qi(2), qi(2));
        let (ext, plan) = construct_backward_extension(&s, 1, None).unwrap();
        assert_eq!(plan.scale, qi(2));
        assert_eq!(plan.edge_sq, vec![qi(2)]);
        assert!(check_subnormal(&ext).unwrap().is_subnormal());

        assert!(matches!(
            construct_backward_extension(&s, 1, Some(qi(4))),
            Err(Error::ScaleOutOfRange { .. })
        ));
        assert!(matches!(
            construct_backward_extension(&s, 1, Some(qi(0))),
            Err(Error::ScaleOutOfRange { .. })
        ));
        let (ext, plan) = construct_backward_extension(&s, 2, Some(qi(1))).unwrap();
        assert_eq!(plan.to_json()["C"], "1");
        let top = Node::core("0^2");
        // a_{-2} = 1, a_{-1} = 2 / 4, a_0 = C = 1
        assert_eq!(ext.moment(&top, 1).unwrap(), q(1, 2));
        assert_eq!(ext.moment(&top, 2).unwrap(), qi(1));
        let top_mu = check_subnormal(&ext).unwrap().measure("0^2").unwrap().clone();
        assert_eq!(top_mu, AtomicMeasure::new([(qi(0), q(3, 4)), (qi(2), q(1, 4))]).unwrap());
    }

    #[test]
    fn rooted_sum_examples() {
        let iso = make_isometric(&binary()).unwrap();
        let joint = rooted_sum_extend(&[iso.clone(), iso.clone()], 0, "w", true).unwrap();
        assert_eq!(joint.theta_sq, vec![q(1, 2), q(1, 2)]);
        let c = check_subnormal(&joint.shift).unwrap();
        assert_eq!(c.measure("w"), Some(&AtomicMeasure::dirac(qi(1))));

        let fam = vec![iso.clone(); 3];
        let joint = rooted_sum_extend(&fam, 3, "w", true).unwrap();
        let sum: Q = joint.theta_sq.iter().sum();
        assert_eq!(backward_extension_feasible(&joint.shift, 3).unwrap().c0(), Some(&sum));

        let bad = chain(qi(1), qi(2));
        assert_eq!(
            rooted_sum_extend(&[iso.clone(), bad], 0, "w", true).unwrap_err(),
            Error::MemberInfeasible { index: 1, steps: 1 }
        );
        assert_eq!(rooted_sum_extend(&[], 0, "w", true).unwrap_err(), Error::EmptyFamily);
    }

    #[test]
    fn join_examples() {
        let iso = make_isometric(&DirectedForest::singleton("x")).unwrap();
        let fam = vec![iso.clone(), iso.clone()];
        let binary2 = DirectedForest::from_pairs([("w", "w"), ("a", "w"), ("b", "w"), ("a1", "a"), ("b1", "b")]).unwrap();
        let fork2 = DirectedForest::from_pairs([("w", "w"), ("a", "w"), ("a1", "a"), ("a2", "a")]).unwrap();
        for env in [&binary2, &fork2] {
            let joint = join_at_depth(&fam, env, 2).unwrap();
            assert!(check_subnormal(&joint).unwrap().is_subnormal());
            for v in env.vertices() {
                let sum: Q = joint.forest().children(v).unwrap().iter().map(|c| joint.sq(c).unwrap().clone()).sum();
                assert!(sum <= qi(1));
            }
        }
        let bad = chain(qi(1), qi(2));
        for env in [&binary2, &fork2] {
            assert!(matches!(
                join_at_depth(&[iso.clone(), bad.clone()], env, 2),
                Err(Error::MemberInfeasible { index: 1, .. })
            ));
        }
        assert!(matches!(join_at_depth(&fam, &binary2, 1), Err(Error::FrontierMismatch(_))));
        assert!(matches!(join_at_depth(std::slice::from_ref(&iso), &binary2, 2), Err(Error::FrontierMismatch(_))));
    }

    #[test]
    fn powerhypo_examples() {
        let iso = make_isometric(&DirectedForest::singleton("x")).unwrap();
        let joint = powerhypo_rooted_sum_extend(&[(iso.clone(), qi(1)), (iso.clone(), qi(1))], 4, "w").unwrap();
        assert_eq!(joint.root_sq, vec![q(1, 4), q(1, 8)]);
        assert_eq!(hip_k(&joint.shift, &Node::core("w"), 3).unwrap(), q(3, 8));

        let single = powerhypo_rooted_sum_extend(&[(iso.clone(), q(1, 3))], 3, "w").unwrap();
        assert_eq!(single.root_sq, vec![q(1, 12)]);
        assert!(check_hyponormal(&single.shift, 2).unwrap().holds());

        let t = DirectedForest::from_pairs([("v0", "v0"), ("v1", "v0"), ("a", "v1"), ("b", "v1")]).unwrap();
        let ce = make_counterexample(&t, None).unwrap().shift;
        assert_eq!(
            powerhypo_rooted_sum_extend(&[(iso, qi(1)), (ce, qi(1))], 3, "w").unwrap_err(),
            Error::MemberNotExtendable { index: 1, k: 2 }
        );
    }

    #[test]
    fn classes_of_joint() {
        let iso = make_isometric(&DirectedForest::singleton("x")).unwrap();
        let joint = powerhypo_rooted_sum_extend(&[(iso.clone(), qi(1)), (iso, qi(1))], 2, "w").unwrap();
        let rep = check_power_hyponormal(&joint.shift, 2).unwrap();
        assert_eq!(rep.classes, vec![ForestClassification::NArmStar(2)]);
    }
}
