//! Weighted shifts on tailed forests.
//!
//! A shift is a finite forest with squared weights `|λ_v|²` plus, on some
//! childless vertices, an infinite unary tail whose squared weights are a
//! finite prefix followed by a constant. Tail vertices are virtual and are
//! addressed as [`Node::Tail`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{DirectedForest, RawForest, VertexId};
use crate::json::{q_map, q_string, q_vec};
use crate::moments::AtomicMeasure;
use crate::rational::{format_q, pow_u, Q};
use crate::scalar::{Scalar, Weight};

/// A vertex of the finite core, or the vertex `depth ≥ 1` steps down the
/// tail hanging from `leaf`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Core(VertexId),
    Tail { leaf: VertexId, depth: usize },
}

impl Node {
    pub fn core(id: impl Into<VertexId>) -> Self {
        Node::Core(id.into())
    }

    pub fn tail(leaf: impl Into<VertexId>, depth: usize) -> Self {
        Node::Tail {
            leaf: leaf.into(),
            depth,
        }
    }

    pub fn as_core(&self) -> Option<&VertexId> {
        match self {
            Node::Core(v) => Some(v),
            Node::Tail { .. } => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Core(v) => write!(f, "{v}"),
            Node::Tail { leaf, depth } => write!(f, "{leaf}#{depth}"),
        }
    }
}

impl Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Squared weights of an infinite unary continuation: `prefix_sq` for the
/// first edges, then `constant_sq` forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailProfile {
    #[serde(with = "q_vec", default)]
    pub prefix_sq: Vec<Q>,
    #[serde(with = "q_string")]
    pub constant_sq: Q,
}

impl TailProfile {
    pub fn new(prefix_sq: Vec<Q>, constant_sq: Q) -> Self {
        TailProfile { prefix_sq, constant_sq }
    }

    pub fn constant(constant_sq: Q) -> Self {
        TailProfile {
            prefix_sq: Vec::new(),
            constant_sq,
        }
    }

    fn validate(&self, leaf: &VertexId) -> Result<()> {
        let bad = |what: &str, v: &Q| Error::InvalidTail {
            leaf: leaf.clone(),
            reason: format!("{what} {} is not positive", format_q(v)),
        };
        if let Some(v) = self.prefix_sq.iter().find(|v| !v.is_positive()) {
            return Err(bad("prefix entry", v));
        }
        if !self.constant_sq.is_positive() {
            return Err(bad("constant", &self.constant_sq));
        }
        Ok(())
    }

    /// Squared weight of the tail vertex at depth `d ≥ 1`.
    pub fn edge_sq(&self, d: usize) -> &Q {
        debug_assert!(d >= 1);
        self.prefix_sq.get(d - 1).unwrap_or(&self.constant_sq)
    }

    /// `∏_{j=from+1}^{to} edge_sq(j)`.
    pub fn product(&self, from: usize, to: usize) -> Q {
        let mut acc = Q::one();
        let stop = to.min(self.prefix_sq.len());
        for j in from + 1..=stop {
            acc *= &self.prefix_sq[j - 1];
        }
        let flat = to.saturating_sub(from.max(self.prefix_sq.len()));
        acc * pow_u(&self.constant_sq, flat)
    }

    /// `‖S^n e‖²` at depth `d` of the tail (`d = 0` is the leaf itself).
    pub fn moment_from(&self, d: usize, n: usize) -> Q {
        self.product(d, d + n)
    }

    /// [`TailProfile::moment_from`] evaluated in any scalar type.
    pub fn moment_in<S: Scalar>(&self, d: usize, n: usize) -> S {
        (d + 1..=d + n).fold(S::one(), |acc, j| acc * S::from_q(self.edge_sq(j)))
    }

    pub fn max_sq(&self) -> &Q {
        self.prefix_sq
            .iter()
            .chain(std::iter::once(&self.constant_sq))
            .max()
            .expect("nonempty")
    }

    /// Drops trailing prefix entries equal to the constant.
    pub fn normalized(mut self) -> Self {
        while self.prefix_sq.last() == Some(&self.constant_sq) {
            self.prefix_sq.pop();
        }
        self
    }
}

/// Squared weights `|λ_v|²` of the core plus the tails.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSystem {
    #[serde(with = "q_map")]
    pub sq: BTreeMap<VertexId, Q>,
    #[serde(default)]
    pub tails: BTreeMap<VertexId, TailProfile>,
}

impl WeightSystem {
    pub fn new(sq: BTreeMap<VertexId, Q>, tails: BTreeMap<VertexId, TailProfile>) -> Self {
        WeightSystem { sq, tails }
    }
}

#[derive(Serialize, Deserialize)]
struct RawShift {
    forest: RawForest,
    weights: WeightSystem,
}

/// A weighted shift on a tailed forest. Roots carry weight 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawShift", into = "RawShift")]
pub struct WeightedShift {
    forest: DirectedForest,
    weights: WeightSystem,
}

impl TryFrom<RawShift> for WeightedShift {
    type Error = Error;

    fn try_from(raw: RawShift) -> Result<Self> {
        let forest = DirectedForest::try_from(raw.forest)?;
        WeightedShift::new_allow_leaves(forest, raw.weights)
    }
}

impl From<WeightedShift> for RawShift {
    fn from(s: WeightedShift) -> Self {
        RawShift {
            forest: s.forest.into(),
            weights: s.weights,
        }
    }
}

/// Representing-measure candidate at a node, built by accumulating weight
/// products along every path into a tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMeasure {
    pub node: Node,
    /// Atoms at the tail constants reachable from the node.
    pub body: AtomicMeasure,
    /// `1 - body.total_mass()`, the mass left for the atom at 0.
    pub defect: Q,
    /// Whether `∫ t^n d(body) = ‖S^n e‖²` for every `n ≥ 1`.
    pub matches_moments: bool,
}

impl VertexMeasure {
    pub fn feasible(&self) -> bool {
        self.matches_moments && !self.defect.is_negative()
    }

    /// The representing measure, when it exists.
    pub fn measure(&self) -> Option<AtomicMeasure> {
        self.feasible().then(|| {
            self.body
                .plus(&AtomicMeasure::new([(Q::zero(), self.defect.clone())]).expect("defect ≥ 0"))
        })
    }
}

impl WeightedShift {
    /// Validates weights and tails and requires every non-root core vertex
    /// to have a child or a tail.
    pub fn new(forest: DirectedForest, weights: WeightSystem) -> Result<Self> {
        let s = Self::new_allow_leaves(forest, weights)?;
        s.require_leafless()?;
        Ok(s)
    }

    /// Like [`WeightedShift::new`] but leaves are permitted.
    pub fn new_allow_leaves(forest: DirectedForest, mut weights: WeightSystem) -> Result<Self> {
        for v in weights.sq.keys() {
            if !forest.contains(v) {
                return Err(Error::UnknownVertex(v.to_string()));
            }
        }
        for v in forest.vertices() {
            let root = forest.is_root(v)?;
            match weights.sq.get(v) {
                None if root => {
                    weights.sq.insert(v.clone(), Q::zero());
                }
                None => return Err(Error::MissingWeight(v.clone())),
                Some(w) if root && !w.is_zero() => return Err(Error::NonZeroRootWeight(v.clone())),
                Some(w) if w.is_negative() => return Err(Error::NegativeWeight(v.to_string())),
                Some(_) => {}
            }
        }
        for (leaf, tail) in &weights.tails {
            if !forest.contains(leaf) {
                return Err(Error::UnknownVertex(leaf.to_string()));
            }
            if !forest.children(leaf)?.is_empty() {
                return Err(Error::TailOnNonLeaf(leaf.clone()));
            }
            tail.validate(leaf)?;
        }
        Ok(WeightedShift { forest, weights })
    }

    pub fn forest(&self) -> &DirectedForest {
        &self.forest
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn sq(&self, v: &VertexId) -> Result<&Q> {
        self.weights
            .sq
            .get(v)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn tail(&self, v: &VertexId) -> Option<&TailProfile> {
        self.weights.tails.get(v)
    }

    pub fn tailed(&self) -> BTreeSet<VertexId> {
        self.weights.tails.keys().cloned().collect()
    }

    /// Non-root core vertices with zero weight.
    pub fn zero_edges(&self) -> Vec<VertexId> {
        self.forest
            .vertices()
            .filter(|v| !self.forest.is_root(v).unwrap() && self.weights.sq[*v].is_zero())
            .cloned()
            .collect()
    }

    pub fn is_proper(&self) -> bool {
        self.zero_edges().is_empty()
    }

    pub fn require_proper(&self) -> Result<()> {
        match self.zero_edges().first() {
            Some(v) => Err(Error::NotProper(v.to_string())),
            None => Ok(()),
        }
    }

    /// Non-root core vertices with neither children nor a tail.
    pub fn leaves(&self) -> Vec<VertexId> {
        self.forest
            .leaves()
            .into_iter()
            .filter(|v| !self.weights.tails.contains_key(v))
            .collect()
    }

    pub fn is_leafless(&self) -> bool {
        self.leaves().is_empty()
    }

    pub fn require_leafless(&self) -> Result<()> {
        match self.leaves().first() {
            Some(v) => Err(Error::HasLeaf(v.to_string())),
            None => Ok(()),
        }
    }

    pub fn check_node(&self, node: &Node) -> Result<()> {
        let ok = match node {
            Node::Core(v) => self.forest.contains(v),
            Node::Tail { leaf, depth } => *depth >= 1 && self.weights.tails.contains_key(leaf),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownVertex(node.to_string()))
        }
    }

    /// Parses `"v"` or `"leaf#depth"`.
    pub fn parse_node(&self, text: &str) -> Result<Node> {
        if let Some((leaf, depth)) = text.rsplit_once('#') {
            if let Ok(depth) = depth.parse::<usize>() {
                let node = Node::tail(leaf, depth);
                if self.check_node(&node).is_ok() {
                    return Ok(node);
                }
            }
        }
        let node = Node::core(text);
        self.check_node(&node)?;
        Ok(node)
    }

    pub fn is_root_node(&self, node: &Node) -> bool {
        match node {
            Node::Core(v) => self.forest.is_root(v).unwrap_or(false),
            Node::Tail { .. } => false,
        }
    }

    pub fn node_sq(&self, node: &Node) -> Result<&Q> {
        self.check_node(node)?;
        Ok(match node {
            Node::Core(v) => &self.weights.sq[v],
            Node::Tail { leaf, depth } => self.weights.tails[leaf].edge_sq(*depth),
        })
    }

    pub fn node_parent(&self, node: &Node) -> Result<Node> {
        self.check_node(node)?;
        Ok(match node {
            Node::Core(v) => Node::Core(self.forest.parent(v)?.clone()),
            Node::Tail { leaf, depth: 1 } => Node::Core(leaf.clone()),
            Node::Tail { leaf, depth } => Node::tail(leaf.clone(), depth - 1),
        })
    }

    /// `p^n(node)`.
    pub fn node_ancestor(&self, node: &Node, n: usize) -> Result<Node> {
        let mut cur = node.clone();
        for _ in 0..n {
            let next = self.node_parent(&cur)?;
            if next == cur {
                break;
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn node_children(&self, node: &Node) -> Result<Vec<Node>> {
        self.check_node(node)?;
        Ok(match node {
            Node::Core(v) => {
                let mut out: Vec<Node> = self.forest.children(v)?.iter().cloned().map(Node::Core).collect();
                if self.weights.tails.contains_key(v) {
                    out.push(Node::tail(v.clone(), 1));
                }
                out
            }
            Node::Tail { leaf, depth } => vec![Node::tail(leaf.clone(), depth + 1)],
        })
    }

    /// k-th children of a node.
    pub fn chi_nodes(&self, node: &Node, k: usize) -> Result<Vec<Node>> {
        let mut level = vec![node.clone()];
        self.check_node(node)?;
        for _ in 0..k {
            let mut next = Vec::new();
            for u in &level {
                next.extend(self.node_children(u)?);
            }
            level = next;
        }
        level.sort();
        Ok(level)
    }

    /// `|λ_u^{(k)}|² = ∏_{j<k} |λ_{p^j(u)}|²`; zero when the path reaches a root.
    pub fn edge_product(&self, node: &Node, k: usize) -> Result<Q> {
        let mut acc = Q::one();
        let mut cur = node.clone();
        for _ in 0..k {
            acc *= self.node_sq(&cur)?;
            if acc.is_zero() {
                break;
            }
            cur = self.node_parent(&cur)?;
        }
        Ok(acc)
    }

    /// Core vertices, deepest first, so children precede parents.
    fn bottom_up(&self) -> Vec<VertexId> {
        let mut depth: BTreeMap<&VertexId, usize> = BTreeMap::new();
        let mut queue: VecDeque<&VertexId> = VecDeque::new();
        for r in self.forest.roots() {
            let r = self.forest.lookup(r.as_str()).unwrap();
            depth.insert(r, 0);
            queue.push_back(r);
        }
        let mut order = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v.clone());
            for c in self.forest.children(v).unwrap() {
                depth.insert(c, depth[v] + 1);
                queue.push_back(c);
            }
        }
        order.reverse();
        order
    }

    /// `m_v(n) = ‖S^n e_v‖²` for every core vertex and `n ≤ n_max`.
    pub fn moment_table(&self, n_max: usize) -> BTreeMap<VertexId, Vec<Q>> {
        self.moment_table_in(n_max)
    }

    /// [`WeightedShift::moment_table`] evaluated in any scalar type.
    pub fn moment_table_in<S: Scalar>(&self, n_max: usize) -> BTreeMap<VertexId, Vec<S>> {
        let mut table: BTreeMap<VertexId, Vec<S>> = BTreeMap::new();
        for v in self.bottom_up() {
            let mut row = vec![S::one()];
            for n in 1..=n_max {
                let mut m = S::zero();
                for c in self.forest.children(&v).unwrap() {
                    let w = &self.weights.sq[c];
                    if !w.is_zero() {
                        m = m + S::from_q(w) * table[c][n - 1].clone();
                    }
                }
                if let Some(t) = self.weights.tails.get(&v) {
                    m = m + t.moment_in::<S>(0, n);
                }
                row.push(m);
            }
            table.insert(v, row);
        }
        table
    }

    /// `m_node(n)` using a precomputed core table.
    pub fn moment_with(&self, table: &BTreeMap<VertexId, Vec<Q>>, node: &Node, n: usize) -> Result<Q> {
        self.check_node(node)?;
        Ok(match node {
            Node::Core(v) => table[v][n].clone(),
            Node::Tail { leaf, depth } => self.weights.tails[leaf].moment_from(*depth, n),
        })
    }

    /// `‖S^n e_node‖²`.
    pub fn moment(&self, node: &Node, n: usize) -> Result<Q> {
        self.check_node(node)?;
        match node {
            Node::Core(v) => {
                let sub = self.restrict_to(v)?;
                Ok(sub.moment_table(n)[v][n].clone())
            }
            Node::Tail { leaf, depth } => Ok(self.weights.tails[leaf].moment_from(*depth, n)),
        }
    }

    /// `‖S‖²`, the largest child weight sum over all vertices.
    pub fn shift_norm_sq(&self) -> Q {
        let mut best = Q::zero();
        for v in self.forest.vertices() {
            let mut sum: Q = self.forest.children(v).unwrap().iter().map(|c| &self.weights.sq[c]).sum();
            if let Some(t) = self.weights.tails.get(v) {
                sum += t.edge_sq(1);
                best = best.max(t.max_sq().clone());
            }
            best = best.max(sum);
        }
        best
    }

    /// `(S f)(u) = λ_u f(p(u))`.
    pub fn apply<W: Weight>(&self, f: &BTreeMap<Node, W>) -> Result<BTreeMap<Node, W>> {
        let mut out: BTreeMap<Node, W> = BTreeMap::new();
        for (x, fx) in f {
            for u in self.node_children(x)? {
                let lam = W::from_sq(self.node_sq(&u)?)?;
                let entry = out.entry(u).or_insert_with(W::zero);
                *entry = entry.clone() + lam * fx.clone();
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// `(S* f)(v) = Σ_{u ∈ chi(v)} conj(λ_u) f(u)`.
    pub fn apply_adjoint<W: Weight>(&self, f: &BTreeMap<Node, W>) -> Result<BTreeMap<Node, W>> {
        let mut out: BTreeMap<Node, W> = BTreeMap::new();
        for (u, fu) in f {
            self.check_node(u)?;
            if self.is_root_node(u) {
                continue;
            }
            let lam = W::from_sq(self.node_sq(u)?)?;
            let entry = out.entry(self.node_parent(u)?).or_insert_with(W::zero);
            *entry = entry.clone() + lam.conj() * fu.clone();
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Name of the materialised vertex for depth `d` of the tail at `leaf`.
    pub fn tail_vertex_name(leaf: &VertexId, d: usize) -> VertexId {
        VertexId::new(format!("{leaf}#{d}"))
    }

    /// Where a node of this shift lives in [`WeightedShift::power_weights`].
    pub fn power_node(node: &Node, k: usize) -> Node {
        match node {
            Node::Tail { leaf, depth } if k > 1 => {
                if *depth <= k {
                    Node::Core(Self::tail_vertex_name(leaf, *depth))
                } else {
                    let r = (depth - 1) % k + 1;
                    Node::tail(Self::tail_vertex_name(leaf, r), (depth - r) / k)
                }
            }
            other => other.clone(),
        }
    }

    /// The shift `S^k` as a weighted shift on the k-th power of the forest.
    ///
    /// For `k ≥ 2` the first `k` vertices of each tail are materialised as
    /// core vertices named `leaf#d`; the rest of the tail splits into `k`
    /// interleaved tails hanging from them.
    pub fn power_weights(&self, k: usize) -> Result<WeightedShift> {
        assert!(k >= 1, "power needs k >= 1");
        if k == 1 {
            return Ok(self.clone());
        }
        let mut parent = self.forest.parent_map().clone();
        let mut sq = self.weights.sq.clone();
        for (leaf, tail) in &self.weights.tails {
            let mut above = leaf.clone();
            for d in 1..=k {
                let name = Self::tail_vertex_name(leaf, d);
                if parent.contains_key(&name) {
                    return Err(Error::VertexCollision(name));
                }
                parent.insert(name.clone(), above);
                sq.insert(name.clone(), tail.edge_sq(d).clone());
                above = name;
            }
        }
        let big = DirectedForest::from_checked(parent);
        let power = big.power(k);
        let mut new_sq = BTreeMap::new();
        for v in power.vertices() {
            let w = if power.is_root(v)? {
                Q::zero()
            } else {
                let mut acc = Q::one();
                let mut cur = v;
                for _ in 0..k {
                    acc *= &sq[cur];
                    cur = big.parent(cur)?;
                }
                acc
            };
            new_sq.insert(v.clone(), w);
        }
        let mut tails = BTreeMap::new();
        for (leaf, tail) in &self.weights.tails {
            let len = tail.prefix_sq.len();
            let constant = pow_u(&tail.constant_sq, k);
            for r in 1..=k {
                let mut prefix = Vec::new();
                let mut i = 1;
                while r + k * i - (k - 1) <= len {
                    prefix.push(tail.product(r + k * i - k, r + k * i));
                    i += 1;
                }
                tails.insert(
                    Self::tail_vertex_name(leaf, r),
                    TailProfile::new(prefix, constant.clone()).normalized(),
                );
            }
        }
        Self::new_allow_leaves(power, WeightSystem::new(new_sq, tails))
    }

    /// Cuts every zero-weight edge so the shift becomes proper; the
    /// operator is unchanged.
    pub fn make_proper(&self) -> WeightedShift {
        let parent = self
            .forest
            .parent_map()
            .iter()
            .map(|(c, p)| {
                let p = if self.weights.sq[c].is_zero() { c } else { p };
                (c.clone(), p.clone())
            })
            .collect();
        WeightedShift {
            forest: DirectedForest::from_checked(parent),
            weights: self.weights.clone(),
        }
    }

    /// The shift restricted to `Des(v)`, with `v` as its root.
    pub fn restrict_to(&self, v: &VertexId) -> Result<WeightedShift> {
        let forest = self.forest.des_subtree(v)?;
        let mut sq: BTreeMap<VertexId, Q> = forest
            .vertices()
            .map(|u| (u.clone(), self.weights.sq[u].clone()))
            .collect();
        sq.insert(v.clone(), Q::zero());
        let tails = self
            .weights
            .tails
            .iter()
            .filter(|(l, _)| forest.contains(l))
            .map(|(l, t)| (l.clone(), t.clone()))
            .collect();
        Ok(WeightedShift {
            forest,
            weights: WeightSystem::new(sq, tails),
        })
    }

    /// Renames core vertices (tails follow their leaves).
    pub fn relabel(&self, mut f: impl FnMut(&VertexId) -> VertexId) -> Result<WeightedShift> {
        let names: BTreeMap<VertexId, VertexId> =
            self.forest.vertices().map(|v| (v.clone(), f(v))).collect();
        let forest = self.forest.relabel(|v| names[v].clone())?;
        let sq = self.weights.sq.iter().map(|(v, w)| (names[v].clone(), w.clone())).collect();
        let tails = self
            .weights
            .tails
            .iter()
            .map(|(v, t)| (names[v].clone(), t.clone()))
            .collect();
        Ok(WeightedShift {
            forest,
            weights: WeightSystem::new(sq, tails),
        })
    }

    /// Shift on the rooted sum of the members' trees with `root_sq[j]` on
    /// the edge from the new root to the root of member `j`.
    pub fn rooted_sum(
        members: &[WeightedShift],
        root: impl Into<VertexId>,
        root_sq: &[Q],
        auto_prefix: bool,
    ) -> Result<WeightedShift> {
        let root = root.into();
        if members.len() != root_sq.len() {
            return Err(Error::Postcondition("one root weight per member".into()));
        }
        let trees: Vec<DirectedForest> = members.iter().map(|m| m.forest.clone()).collect();
        let forest = DirectedForest::rooted_sum(&trees, root.clone(), auto_prefix)?;
        let mut sq = BTreeMap::from([(root, Q::zero())]);
        let mut tails = BTreeMap::new();
        for (j, (m, theta)) in members.iter().zip(root_sq).enumerate() {
            let name = |v: &VertexId| {
                if auto_prefix {
                    v.prefixed(&format!("{j}:"))
                } else {
                    v.clone()
                }
            };
            let mroot = m.forest.tree_root()?;
            for (v, w) in &m.weights.sq {
                sq.insert(name(v), if v == mroot { theta.clone() } else { w.clone() });
            }
            for (v, t) in &m.weights.tails {
                tails.insert(name(v), t.clone());
            }
        }
        Self::new_allow_leaves(forest, WeightSystem::new(sq, tails))
    }

    /// Shift on the `k`-step backward extension of the tree, where
    /// `edge_sq[l]` is the squared weight of the l-th chain vertex counted
    /// from the old root (`edge_sq[0]` sits on the old root).
    pub fn backward_extension(&self, edge_sq: &[Q]) -> Result<WeightedShift> {
        let k = edge_sq.len();
        let root = self
            .forest
            .tree_root()
            .map_err(|_| Error::NotRootedTree { index: 0 })?
            .clone();
        let forest = self.forest.backward_extend(k)?;
        let chain = DirectedForest::backward_chain(&root, k);
        let mut sq = self.weights.sq.clone();
        let mut below = root;
        for (w, new) in edge_sq.iter().zip(&chain) {
            sq.insert(below, w.clone());
            below = new.clone();
        }
        sq.insert(below, Q::zero());
        Self::new_allow_leaves(forest, WeightSystem::new(sq, self.weights.tails.clone()))
    }

    /// Candidate representing measure of `(‖S^n e_node‖²)_n`.
    ///
    /// Every tail reached from the node contributes an atom at its constant
    /// whose mass is the product of squared weights along the path, divided
    /// by the constant raised to the path length. The candidate is compared
    /// with the true moments up to the index after which both are sums of
    /// the same geometric sequences.
    pub fn vertex_measure(&self, node: &Node) -> Result<VertexMeasure> {
        self.require_proper()?;
        self.require_leafless()?;
        self.check_node(node)?;
        // (path product, steps taken, tail, tail depth reached)
        let mut entries: Vec<(Q, usize, &TailProfile, usize)> = Vec::new();
        let mut horizon = 1;
        match node {
            Node::Tail { leaf, depth } => entries.push((Q::one(), 0, &self.weights.tails[leaf], *depth)),
            Node::Core(v) => {
                let mut stack = vec![(v, Q::one(), 0usize)];
                while let Some((u, prod, steps)) = stack.pop() {
                    horizon = horizon.max(steps);
                    if let Some(t) = self.weights.tails.get(u) {
                        entries.push((prod.clone(), steps, t, 0));
                    }
                    for c in self.forest.children(u)? {
                        stack.push((c, &prod * &self.weights.sq[c], steps + 1));
                    }
                }
            }
        }
        let mut masses: BTreeMap<Q, Q> = BTreeMap::new();
        for (prod, steps, tail, d) in entries {
            let rest = tail.prefix_sq.len().saturating_sub(d);
            let reach = steps + rest;
            horizon = horizon.max(reach);
            let c = &tail.constant_sq;
            let mass = prod * tail.product(d, d + rest) / pow_u(c, reach);
            *masses.entry(c.clone()).or_insert_with(Q::zero) += mass;
        }
        let body = AtomicMeasure::new(masses)?;
        let defect = Q::one() - body.total_mass();
        let mut matches_moments = true;
        if let Node::Core(v) = node {
            let table = self.restrict_to(v)?.moment_table(horizon);
            matches_moments = (1..=horizon).all(|n| table[v][n] == body.moment(n));
        }
        Ok(VertexMeasure {
            node: node.clone(),
            body,
            defect,
            matches_moments,
        })
    }
}

/// Isometric weights on a forest: every core leaf gets a tail with
/// constant 1 and each vertex splits weight 1 equally among its children.
pub fn make_isometric(forest: &DirectedForest) -> Result<WeightedShift> {
    let mut sq = BTreeMap::new();
    let mut tails = BTreeMap::new();
    for v in forest.vertices() {
        if forest.is_root(v)? {
            sq.insert(v.clone(), Q::zero());
        }
        let ch = forest.children(v)?;
        if ch.is_empty() {
            tails.insert(v.clone(), TailProfile::constant(Q::one()));
        }
        for c in ch {
            sq.insert(c.clone(), Q::new(1.into(), (ch.len() as i64).into()));
        }
    }
    WeightedShift::new(forest.clone(), WeightSystem::new(sq, tails))
}
