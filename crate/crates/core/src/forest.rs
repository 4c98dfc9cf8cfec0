//! Finite directed forests given by a parent map.
//!
//! Roots are the fixed points of the parent map. Every operation returns a
//! fresh forest; a validated `DirectedForest` never changes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex name. Ordering is plain string ordering and fixes every
/// iteration and serialization order in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn prefixed(&self, prefix: &str) -> Self {
        VertexId(format!("{prefix}{}", self.0))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl From<&VertexId> for VertexId {
    fn from(v: &VertexId) -> Self {
        v.clone()
    }
}

/// Shape of a single tree with respect to forks.
///
/// Arms ending in an infinite tail count towards `NArmStar`; the single
/// vertex is `NArmStar(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arms")]
pub enum ForestClassification {
    NArmStar(usize),
    LinearSegment,
    NotForkless,
}

/// Wire form: `{"vertices":[...], "parent":{child:parent}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawForest {
    pub vertices: Vec<VertexId>,
    pub parent: BTreeMap<VertexId, VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawForest", into = "RawForest")]
pub struct DirectedForest {
    parent: BTreeMap<VertexId, VertexId>,
    children: BTreeMap<VertexId, Vec<VertexId>>,
}

impl TryFrom<RawForest> for DirectedForest {
    type Error = Error;

    fn try_from(raw: RawForest) -> Result<Self> {
        DirectedForest::validate(raw.vertices, raw.parent)
    }
}

impl From<DirectedForest> for RawForest {
    fn from(f: DirectedForest) -> Self {
        RawForest {
            vertices: f.parent.keys().cloned().collect(),
            parent: f.parent,
        }
    }
}

impl DirectedForest {
    /// Checks a vertex list and parent map and builds the forest.
    ///
    /// Cycle detection chases parent pointers, marking each vertex with the
    /// walk that first reached it; meeting a vertex of the current walk that
    /// is not a fixed point closes a nontrivial cycle.
    pub fn validate(
        vertices: impl IntoIterator<Item = VertexId>,
        parent: BTreeMap<VertexId, VertexId>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for v in vertices {
            if !set.insert(v.clone()) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        if set.is_empty() {
            return Err(Error::EmptyForest);
        }
        for (child, par) in &parent {
            if !set.contains(child) {
                return Err(Error::UnknownVertex(child.to_string()));
            }
            if !set.contains(par) {
                return Err(Error::DanglingParent {
                    child: child.clone(),
                    parent: par.clone(),
                });
            }
        }
        if let Some(v) = set.iter().find(|v| !parent.contains_key(*v)) {
            return Err(Error::MissingParent(v.clone()));
        }
        if let Some(cycle) = find_cycle(&parent) {
            return Err(Error::Cycle(cycle));
        }
        Ok(Self::from_checked(parent))
    }

    /// Builds a forest from a parent map whose keys are the vertex set.
    pub fn from_parent_map(parent: BTreeMap<VertexId, VertexId>) -> Result<Self> {
        let vertices: Vec<_> = parent.keys().cloned().collect();
        Self::validate(vertices, parent)
    }

    /// Convenience constructor from `(child, parent)` string pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let parent = pairs
            .into_iter()
            .map(|(c, p)| (VertexId::from(c), VertexId::from(p)))
            .collect();
        Self::from_parent_map(parent)
    }

    pub(crate) fn from_checked(parent: BTreeMap<VertexId, VertexId>) -> Self {
        let mut children: BTreeMap<VertexId, Vec<VertexId>> =
            parent.keys().map(|v| (v.clone(), Vec::new())).collect();
        for (c, p) in &parent {
            if c != p {
                children.get_mut(p).expect("closed parent map").push(c.clone());
            }
        }
        DirectedForest { parent, children }
    }

    /// A single-vertex tree.
    pub fn singleton(id: impl Into<VertexId>) -> Self {
        let id = id.into();
        Self::from_checked(BTreeMap::from([(id.clone(), id)]))
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.parent.keys()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.parent.contains_key(v)
    }

    pub fn parent_map(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.parent
    }

    pub fn lookup(&self, v: &str) -> Result<&VertexId> {
        self.parent
            .get_key_value(&VertexId::from(v))
            .map(|(k, _)| k)
            .ok_or_else(|| Error::UnknownVertex(v.to_owned()))
    }

    fn check(&self, v: &VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.to_string()))
        }
    }

    pub fn parent(&self, v: &VertexId) -> Result<&VertexId> {
        self.parent
            .get(v)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    /// `p^n(v)`.
    pub fn ancestor(&self, v: &VertexId, n: usize) -> Result<&VertexId> {
        let mut cur = self.parent.get_key_value(v).map(|(k, _)| k).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
        for _ in 0..n {
            let next = &self.parent[cur];
            if next == cur {
                break;
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn is_root(&self, v: &VertexId) -> Result<bool> {
        Ok(self.parent(v)? == v)
    }

    pub fn roots(&self) -> Vec<VertexId> {
        self.parent
            .iter()
            .filter(|(c, p)| c == p)
            .map(|(c, _)| c.clone())
            .collect()
    }

    /// Direct children, sorted.
    pub fn children(&self, v: &VertexId) -> Result<&[VertexId]> {
        self.children
            .get(v)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn degree(&self, v: &VertexId) -> Result<usize> {
        Ok(self.children(v)?.len())
    }

    pub fn max_degree(&self) -> usize {
        self.children.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Non-root vertices without children.
    pub fn leaves(&self) -> Vec<VertexId> {
        self.children
            .iter()
            .filter(|(v, ch)| ch.is_empty() && self.parent[*v] != **v)
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// Vertices without children, roots included.
    pub fn childless(&self) -> Vec<VertexId> {
        self.children
            .iter()
            .filter(|(_, ch)| ch.is_empty())
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// k-th children, computed level by level from the direct children.
    pub fn chi(&self, v: &VertexId, k: usize) -> Result<Vec<VertexId>> {
        self.check(v)?;
        let mut level = vec![v.clone()];
        for _ in 0..k {
            let mut next = Vec::new();
            for u in &level {
                next.extend(self.children[u].iter().cloned());
            }
            level = next;
            if level.is_empty() {
                break;
            }
        }
        level.sort();
        Ok(level)
    }

    /// Distance from `v` to the root of its component.
    pub fn depth(&self, v: &VertexId) -> Result<usize> {
        self.check(v)?;
        let mut d = 0;
        let mut cur = v;
        while self.parent[cur] != *cur {
            cur = &self.parent[cur];
            d += 1;
        }
        Ok(d)
    }

    pub fn root_of(&self, v: &VertexId) -> Result<&VertexId> {
        self.check(v)?;
        let mut cur = self.parent.get_key_value(v).unwrap().0;
        while self.parent[cur] != *cur {
            cur = &self.parent[cur];
        }
        Ok(cur)
    }

    /// `Des(v)`, including `v`.
    pub fn descendants(&self, v: &VertexId) -> Result<BTreeSet<VertexId>> {
        self.check(v)?;
        let mut out = BTreeSet::new();
        let mut queue = VecDeque::from([v.clone()]);
        while let Some(u) = queue.pop_front() {
            queue.extend(self.children[&u].iter().cloned());
            out.insert(u);
        }
        Ok(out)
    }

    /// Height of the subtree below `v` (0 for a childless vertex).
    pub fn height(&self, v: &VertexId) -> Result<usize> {
        self.check(v)?;
        let mut h = 0;
        let mut level = vec![v];
        loop {
            let next: Vec<&VertexId> = level.iter().flat_map(|u| self.children[*u].iter()).collect();
            if next.is_empty() {
                return Ok(h);
            }
            h += 1;
            level = next;
        }
    }

    /// Subforest on `w`: parents leaving `w` are redirected to the vertex
    /// itself, which then becomes a root.
    pub fn restrict(&self, w: &BTreeSet<VertexId>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptyForest);
        }
        let mut parent = BTreeMap::new();
        for v in w {
            let p = self.parent(v)?;
            let p = if w.contains(p) { p.clone() } else { v.clone() };
            parent.insert(v.clone(), p);
        }
        Ok(Self::from_checked(parent))
    }

    /// The tree on `Des(v)` rooted at `v`.
    pub fn des_subtree(&self, v: &VertexId) -> Result<Self> {
        self.restrict(&self.descendants(v)?)
    }

    /// Connected components, ordered by their root.
    pub fn components(&self) -> Vec<DirectedForest> {
        let mut groups: BTreeMap<VertexId, BTreeMap<VertexId, VertexId>> = BTreeMap::new();
        for (c, p) in &self.parent {
            let r = self.root_of(c).expect("vertex of self").clone();
            groups.entry(r).or_default().insert(c.clone(), p.clone());
        }
        groups.into_values().map(Self::from_checked).collect()
    }

    pub fn component_count(&self) -> usize {
        self.roots().len()
    }

    pub fn is_tree(&self) -> bool {
        self.component_count() == 1
    }

    /// The root of a single tree.
    pub fn tree_root(&self) -> Result<&VertexId> {
        let mut roots = self.parent.iter().filter(|(c, p)| c == p);
        match (roots.next(), roots.next()) {
            (Some((r, _)), None) => Ok(r),
            _ => Err(Error::NotATree {
                components: self.component_count(),
            }),
        }
    }

    /// Renames every vertex through `f`; `f` must be injective.
    pub fn relabel(&self, mut f: impl FnMut(&VertexId) -> VertexId) -> Result<Self> {
        let names: BTreeMap<&VertexId, VertexId> = self.parent.keys().map(|v| (v, f(v))).collect();
        let mut parent = BTreeMap::new();
        for (c, p) in &self.parent {
            if parent.insert(names[c].clone(), names[p].clone()).is_some() {
                return Err(Error::VertexCollision(names[c].clone()));
            }
        }
        Ok(Self::from_checked(parent))
    }

    /// Disjoint union. With `auto_prefix` the j-th input is renamed with
    /// prefix `"j:"`; otherwise ids must already be disjoint.
    pub fn direct_sum(forests: &[DirectedForest], auto_prefix: bool) -> Result<Self> {
        if forests.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut parent = BTreeMap::new();
        for (j, f) in forests.iter().enumerate() {
            let prefix = format!("{j}:");
            for (c, p) in &f.parent {
                let (c, p) = if auto_prefix {
                    (c.prefixed(&prefix), p.prefixed(&prefix))
                } else {
                    (c.clone(), p.clone())
                };
                if parent.contains_key(&c) {
                    return Err(Error::VertexCollision(c));
                }
                parent.insert(c, p);
            }
        }
        Ok(Self::from_checked(parent))
    }

    /// Joins a family of rooted trees below a new root `root`. The empty
    /// family gives the single vertex `root`.
    pub fn rooted_sum(
        trees: &[DirectedForest],
        root: impl Into<VertexId>,
        auto_prefix: bool,
    ) -> Result<Self> {
        let root = root.into();
        if trees.is_empty() {
            return Ok(Self::singleton(root));
        }
        for (index, t) in trees.iter().enumerate() {
            if !t.is_tree() {
                return Err(Error::NotRootedTree { index });
            }
        }
        let sum = Self::direct_sum(trees, auto_prefix)?;
        if sum.contains(&root) {
            return Err(Error::VertexCollision(root));
        }
        let mut parent = sum.parent;
        for (c, p) in parent.iter_mut() {
            if c == p {
                *p = root.clone();
            }
        }
        parent.insert(root.clone(), root);
        Ok(Self::from_checked(parent))
    }

    /// Names of the chain added by a `k`-step backward extension, listed
    /// from the parent of the old root upwards.
    pub fn backward_chain(root: &VertexId, k: usize) -> Vec<VertexId> {
        (1..=k).map(|j| VertexId(format!("{root}^{j}"))).collect()
    }

    /// Prepends a chain of `k` new vertices above the root of a tree.
    pub fn backward_extend(&self, k: usize) -> Result<Self> {
        let root = self
            .tree_root()
            .map_err(|_| Error::NotRootedTree { index: 0 })?
            .clone();
        let chain = Self::backward_chain(&root, k);
        let mut parent = self.parent.clone();
        let mut below = root;
        for w in &chain {
            if parent.contains_key(w) {
                return Err(Error::VertexCollision(w.clone()));
            }
            parent.insert(below.clone(), w.clone());
            below = w.clone();
        }
        parent.insert(below.clone(), below);
        Ok(Self::from_checked(parent))
    }

    /// k-th power: `v` is sent to `p^k(v)` unless `p^{k-1}(v)` is a root,
    /// in which case `v` becomes a root.
    pub fn power(&self, k: usize) -> Self {
        assert!(k >= 1, "forest power needs k >= 1");
        let mut parent = BTreeMap::new();
        for v in self.parent.keys() {
            let a = self.ancestor(v, k - 1).expect("vertex of self");
            let p = if self.parent[a] == *a {
                v.clone()
            } else {
                self.parent[a].clone()
            };
            parent.insert(v.clone(), p);
        }
        Self::from_checked(parent)
    }

    /// Canonical string of the rooted tree below `v`; equal strings mean
    /// isomorphic subtrees.
    pub fn canonical_subtree(&self, v: &VertexId) -> Result<String> {
        self.check(v)?;
        let mut order = Vec::new();
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            queue.extend(self.children[u].iter());
        }
        let mut forms: BTreeMap<&VertexId, String> = BTreeMap::new();
        for u in order.into_iter().rev() {
            let mut parts: Vec<String> = self.children[u]
                .iter()
                .map(|c| forms.remove(c).expect("children first"))
                .collect();
            parts.sort();
            forms.insert(u, format!("({})", parts.concat()));
        }
        Ok(forms.remove(v).expect("computed"))
    }

    /// Canonical string of the whole forest, independent of vertex names.
    pub fn canonical_form(&self) -> String {
        let mut parts: Vec<String> = self
            .roots()
            .iter()
            .map(|r| self.canonical_subtree(r).expect("root of self"))
            .collect();
        parts.sort();
        parts.join(",")
    }

    pub fn is_isomorphic(&self, other: &DirectedForest) -> bool {
        self.len() == other.len() && self.canonical_form() == other.canonical_form()
    }

    /// Classifies a single tree; `tailed` lists the vertices carrying an
    /// infinite unary tail, each of which counts as one extra child.
    pub fn classify_forkless(&self, tailed: &BTreeSet<VertexId>) -> Result<ForestClassification> {
        let root = self.tree_root()?.clone();
        for t in tailed {
            if !self.children(t)?.is_empty() {
                return Err(Error::TailOnNonLeaf(t.clone()));
            }
        }
        let degree = |v: &VertexId| self.children[v].len() + usize::from(tailed.contains(v));
        let mut has_end = false;
        for v in self.parent.keys().filter(|v| **v != root) {
            match degree(v) {
                0 => has_end = true,
                1 => {}
                _ => return Ok(ForestClassification::NotForkless),
            }
        }
        let root_degree = degree(&root);
        Ok(if !has_end {
            ForestClassification::NArmStar(root_degree)
        } else if root_degree == 1 {
            ForestClassification::LinearSegment
        } else {
            ForestClassification::NotForkless
        })
    }
}

fn find_cycle(parent: &BTreeMap<VertexId, VertexId>) -> Option<Vec<VertexId>> {
    // 0 = unvisited, otherwise the id of the walk that reached the vertex
    let mut mark: BTreeMap<&VertexId, usize> = parent.keys().map(|v| (v, 0)).collect();
    for (walk, start) in parent.keys().enumerate() {
        let walk = walk + 1;
        let mut cur = start;
        loop {
            match mark[cur] {
                0 => {
                    mark.insert(cur, walk);
                    let next = &parent[cur];
                    if next == cur {
                        break;
                    }
                    cur = next;
                }
                m if m == walk => {
                    let mut cycle = vec![cur.clone()];
                    let mut u = &parent[cur];
                    while u != cur {
                        cycle.push(u.clone());
                        u = &parent[u];
                    }
                    let min = cycle
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    cycle.rotate_left(min);
                    return Some(cycle);
                }
                _ => break,
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[&str]) -> Vec<VertexId> {
        list.iter().map(|s| VertexId::from(*s)).collect()
    }

    fn f1() -> DirectedForest {
        DirectedForest::from_pairs([("0", "0"), ("1", "0"), ("2", "1"), ("3", "1")]).unwrap()
    }

    fn chain(n: usize) -> DirectedForest {
        let parent = (0..n)
            .map(|i| (VertexId(i.to_string()), VertexId(i.saturating_sub(1).to_string())))
            .collect();
        DirectedForest::from_parent_map(parent).unwrap()
    }

    #[test]
    fn validation() {
        let two = DirectedForest::from_pairs([("a", "a"), ("b", "a")]).unwrap();
        assert_eq!(two.roots(), ids(&["a"]));
        let err = DirectedForest::from_pairs([("a", "b"), ("b", "a")]).unwrap_err();
        assert_eq!(err, Error::Cycle(ids(&["a", "b"])));
        let err = DirectedForest::from_pairs([("a", "a"), ("b", "c")]).unwrap_err();
        assert!(matches!(err, Error::DanglingParent { .. }));
        let err = DirectedForest::validate(ids(&["a", "b"]), BTreeMap::from([(VertexId::from("a"), VertexId::from("a"))]))
            .unwrap_err();
        assert_eq!(err, Error::MissingParent("b".into()));
        assert_eq!(DirectedForest::validate(Vec::new(), BTreeMap::new()).unwrap_err(), Error::EmptyForest);
        let err = DirectedForest::from_pairs([("r", "r"), ("x", "z"), ("y", "x"), ("z", "y")]).unwrap_err();
        assert_eq!(err, Error::Cycle(ids(&["x", "z", "y"])));
        assert_eq!(f1().len(), 4);
    }

    #[test]
    fn roots_and_children() {
        let f = f1();
        assert_eq!(f.roots(), ids(&["0"]));
        let deg = DirectedForest::from_pairs([("a", "a"), ("b", "b"), ("c", "c")]).unwrap();
        assert_eq!(deg.roots(), ids(&["a", "b", "c"]));
        assert_eq!(f.chi(&"1".into(), 1).unwrap(), ids(&["2", "3"]));
        assert_eq!(f.chi(&"0".into(), 2).unwrap(), ids(&["2", "3"]));
        assert_eq!(f.chi(&"2".into(), 0).unwrap(), ids(&["2"]));
        assert_eq!(f.chi(&"0".into(), 3).unwrap(), Vec::<VertexId>::new());
        assert!(matches!(f.chi(&"9".into(), 1), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn descendants_and_subtrees() {
        let f = f1();
        assert_eq!(f.descendants(&"1".into()).unwrap(), ids(&["1", "2", "3"]).into_iter().collect());
        assert_eq!(f.des_subtree(&"0".into()).unwrap(), f);
        let leaf = f.des_subtree(&"2".into()).unwrap();
        assert_eq!(leaf, DirectedForest::singleton("2"));
        let sub = f.des_subtree(&"1".into()).unwrap();
        assert_eq!(sub.roots(), ids(&["1"]));
    }

    #[test]
    fn components_of_power() {
        let f = f1();
        assert_eq!(f.components(), vec![f.clone()]);
        let sum = DirectedForest::direct_sum(&[f.clone(), chain(2)], true).unwrap();
        assert_eq!(sum.components().len(), 2);
        let p = f.power(2);
        let comps = p.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].vertices().cloned().collect::<Vec<_>>(), ids(&["0", "2", "3"]));
        assert_eq!(comps[1].vertices().cloned().collect::<Vec<_>>(), ids(&["1"]));
    }

    #[test]
    fn sums() {
        let a = DirectedForest::from_pairs([("a", "a"), ("b", "a")]).unwrap();
        let s = DirectedForest::direct_sum(&[a.clone(), a.clone()], true).unwrap();
        assert_eq!((s.len(), s.roots().len()), (4, 2));
        assert_eq!(DirectedForest::direct_sum(&[a.clone(), a.clone()], false).unwrap_err(), Error::VertexCollision("a".into()));
        assert_eq!(DirectedForest::direct_sum(&[], false).unwrap_err(), Error::EmptyFamily);
        assert_eq!(DirectedForest::direct_sum(&[f1()], false).unwrap(), f1());

        let one = DirectedForest::rooted_sum(&[], "w", false).unwrap();
        assert_eq!(one, DirectedForest::singleton("w"));
        let dot = DirectedForest::singleton("x");
        let claw = DirectedForest::rooted_sum(&[dot.clone(), dot], "w", true).unwrap();
        assert_eq!(claw.children(&"w".into()).unwrap(), ids(&["0:x", "1:x"]).as_slice());
        let err = DirectedForest::rooted_sum(&[s], "w", false).unwrap_err();
        assert_eq!(err, Error::NotRootedTree { index: 0 });
        let three = DirectedForest::rooted_sum(&[f1(), chain(3), DirectedForest::singleton("z")], "w", true).unwrap();
        assert_eq!(three.roots(), ids(&["w"]));
        assert_eq!(three.degree(&"w".into()).unwrap(), 3);
    }

    #[test]
    fn backward_extension() {
        let t = DirectedForest::singleton("r").backward_extend(2).unwrap();
        assert!(t.is_isomorphic(&chain(3)));
        let f = f1();
        assert_eq!(f.backward_extend(0).unwrap(), f);
        let e = f.backward_extend(3).unwrap();
        assert_eq!(e.len(), 7);
        let top = e.tree_root().unwrap().clone();
        assert_eq!(top, VertexId::from("0^3"));
        for j in 1..=3 {
            assert_eq!(e.chi(&top, j).unwrap().len(), 1);
        }
        assert_eq!(e.chi(&top, 3).unwrap(), ids(&["0"]));
    }

    #[test]
    fn powers() {
        let f = f1();
        assert_eq!(f.power(1), f);
        let p = f.power(2);
        assert_eq!(p.roots(), ids(&["0", "1"]));
        assert_eq!(p.parent(&"2".into()).unwrap(), &VertexId::from("0"));
        assert_eq!(p.parent(&"3".into()).unwrap(), &VertexId::from("0"));
        assert_eq!(chain(6).power(2).component_count(), 2);
    }

    #[test]
    fn classification() {
        let star = DirectedForest::from_pairs([("r", "r"), ("a", "r"), ("b", "r"), ("c", "r")]).unwrap();
        let tails: BTreeSet<VertexId> = ids(&["a", "b", "c"]).into_iter().collect();
        assert_eq!(star.classify_forkless(&tails).unwrap(), ForestClassification::NArmStar(3));
        assert_eq!(star.classify_forkless(&BTreeSet::new()).unwrap(), ForestClassification::NotForkless);
        assert_eq!(f1().classify_forkless(&BTreeSet::new()).unwrap(), ForestClassification::NotForkless);
        let single = DirectedForest::singleton("x");
        assert_eq!(single.classify_forkless(&BTreeSet::new()).unwrap(), ForestClassification::NArmStar(0));
        assert_eq!(chain(4).classify_forkless(&BTreeSet::new()).unwrap(), ForestClassification::LinearSegment);
        let two = DirectedForest::direct_sum(&[single.clone(), single], true).unwrap();
        assert_eq!(two.classify_forkless(&BTreeSet::new()).unwrap_err(), Error::NotATree { components: 2 });
    }

    #[test]
    fn canonical_forms() {
        let a = DirectedForest::from_pairs([("r", "r"), ("x", "r"), ("y", "x"), ("z", "r")]).unwrap();
        let b = DirectedForest::from_pairs([("q", "q"), ("m", "q"), ("n", "q"), ("o", "n")]).unwrap();
        assert!(a.is_isomorphic(&b));
        assert!(!a.is_isomorphic(&f1()));
    }

    #[test]
    fn json_round_trip() {
        let f = f1();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"vertices":["0","1","2","3"],"parent":{"0":"0","1":"0","2":"1","3":"1"}}"#);
        let back: DirectedForest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"vertices":["a","b"],"parent":{"a":"b","b":"a"}}"#;
        assert!(serde_json::from_str::<DirectedForest>(bad).is_err());
    }
}
