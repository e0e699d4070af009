//! Dimension partition trees.
//!
//! A tree over `D = {1, …, d}` has root `D`, every vertex with at least two
//! indices split into two or more disjoint sons covering it, and exactly the
//! singletons `{j}` as leaves. Mode indices are 1-based in every public
//! signature and message.
//!
//! Trees are stored as an arena in canonical breadth-first order: sons are
//! sorted by their smallest index, so two trees are equal iff their vertex
//! sets and son maps coincide, and node ids can be used as stable positions
//! by every downstream structure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Index of a vertex inside its [`DimensionTree`]; the root is always `0`.
pub type NodeId = usize;

/// A non-empty, strictly increasing set of 1-based mode indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(Vec<usize>);

impl Vertex {
    /// Sorts the indices; rejects empty input, zeros and duplicates.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidVertex("empty index set".into()));
        }
        v.sort_unstable();
        if v[0] == 0 {
            return Err(Error::InvalidVertex("mode indices are 1-based".into()));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidVertex(format!("duplicate index in {v:?}")));
        }
        Ok(Vertex(v))
    }

    pub fn singleton(j: usize) -> Self {
        assert!(j >= 1, "mode indices are 1-based");
        Vertex(vec![j])
    }

    /// `{1, …, d}`.
    pub fn full(d: usize) -> Self {
        assert!(d >= 1);
        Vertex((1..=d).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// 0-based mode positions.
    pub fn modes0(&self) -> Vec<usize> {
        self.0.iter().map(|j| j - 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lowest(&self) -> usize {
        self.0[0]
    }

    pub fn highest(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn is_subset(&self, other: &Vertex) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }

    pub fn is_disjoint(&self, other: &Vertex) -> bool {
        self.0.iter().all(|&j| !other.contains(j))
    }

    /// Complement within `{1, …, d}`; `None` when it is empty.
    pub fn complement(&self, d: usize) -> Option<Vertex> {
        let c: Vec<usize> = (1..=d).filter(|&j| !self.contains(j)).collect();
        (!c.is_empty()).then_some(Vertex(c))
    }

    /// `self \ other`; `None` when empty.
    pub fn minus(&self, other: &Vertex) -> Option<Vertex> {
        let c: Vec<usize> = self.0.iter().copied().filter(|&j| !other.contains(j)).collect();
        (!c.is_empty()).then_some(Vertex(c))
    }

    /// Space-separated key used in the JSON formats, e.g. `"1 2"`.
    pub fn key(&self) -> String {
        self.0.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        let idx = s
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidVertex(format!("bad vertex key {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Vertex::new(idx)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Nested description of a tree, the intermediate form of the parser and
/// the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeSpec {
    Leaf(usize),
    Node(Vec<TreeSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    RootToLeaves,
    LeavesToRoot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    vertex: Vertex,
    parent: Option<NodeId>,
    sons: Vec<NodeId>,
    level: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionTree {
    d: usize,
    nodes: Vec<Node>,
    index: BTreeMap<Vertex, NodeId>,
    leaf_of_mode: Vec<NodeId>,
}

impl DimensionTree {
    /// Parses the parenthesized notation and checks the leaves are exactly `1..=d`.
    pub fn build(d: usize, notation: &str) -> Result<Self> {
        let spec = parse_notation(notation)?;
        Self::from_spec(d, &spec)
    }

    /// Parses the parenthesized notation, taking `d` from the largest leaf index.
    pub fn parse(notation: &str) -> Result<Self> {
        let spec = parse_notation(notation)?;
        let d = max_leaf(&spec);
        Self::from_spec(d, &spec)
    }

    pub fn from_spec(d: usize, spec: &TreeSpec) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModeCount(d));
        }
        let root = Vertex::full(d);
        let found = validate_spec(spec, d)?;
        if found != root {
            return Err(Error::IncompleteUnion {
                expected: root.to_string(),
                found: found.to_string(),
            });
        }
        if matches!(spec, TreeSpec::Leaf(_)) {
            return Err(Error::InvalidModeCount(d));
        }

        // Breadth-first layout with sons sorted by smallest index.
        let mut nodes: Vec<Node> = Vec::new();
        let mut queue: std::collections::VecDeque<(&TreeSpec, Option<NodeId>, usize)> =
            std::collections::VecDeque::new();
        queue.push_back((spec, None, 0));
        while let Some((s, parent, level)) = queue.pop_front() {
            let id = nodes.len();
            nodes.push(Node {
                vertex: spec_vertex(s),
                parent,
                sons: Vec::new(),
                level,
            });
            if let Some(p) = parent {
                nodes[p].sons.push(id);
            }
            if let TreeSpec::Node(children) = s {
                let mut sorted: Vec<&TreeSpec> = children.iter().collect();
                sorted.sort_by_key(|c| spec_vertex(c).lowest());
                for c in sorted {
                    queue.push_back((c, Some(id), level + 1));
                }
            }
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.vertex.clone(), i))
            .collect::<BTreeMap<_, _>>();
        let leaf_of_mode = (1..=d).map(|j| index[&Vertex::singleton(j)]).collect();
        Ok(DimensionTree {
            d,
            nodes,
            index,
            leaf_of_mode,
        })
    }

    /// Depth 1: every leaf hangs off the root.
    pub fn tucker(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModeCount(d));
        }
        Self::from_spec(d, &TreeSpec::Node((1..=d).map(TreeSpec::Leaf).collect()))
    }

    /// Tensor-train chain: `{j, …, d}` splits into `{j}` and `{j+1, …, d}`.
    pub fn linear(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModeCount(d));
        }
        fn chain(lo: usize, d: usize) -> TreeSpec {
            if lo == d {
                TreeSpec::Leaf(d)
            } else {
                TreeSpec::Node(vec![TreeSpec::Leaf(lo), chain(lo + 1, d)])
            }
        }
        Self::from_spec(d, &chain(1, d))
    }

    /// Binary tree splitting each vertex in halves, the first half taking
    /// the extra index when the size is odd.
    pub fn balanced(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModeCount(d));
        }
        fn split(lo: usize, hi: usize) -> TreeSpec {
            if lo == hi {
                return TreeSpec::Leaf(lo);
            }
            let n = hi - lo + 1;
            let first = n.div_ceil(2);
            TreeSpec::Node(vec![split(lo, lo + first - 1), split(lo + first, hi)])
        }
        Self::from_spec(d, &split(1, d))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn vertex(&self, id: NodeId) -> &Vertex {
        &self.nodes[id].vertex
    }

    pub fn sons(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].sons
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn level(&self, id: NodeId) -> usize {
        self.nodes[id].level
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].sons.is_empty()
    }

    pub fn is_root(&self, id: NodeId) -> bool {
        id == 0
    }

    /// Position of `id` among its parent's sons.
    pub fn son_position(&self, id: NodeId) -> Option<usize> {
        let p = self.parent(id)?;
        self.sons(p).iter().position(|&s| s == id)
    }

    /// Leaf node of 1-based mode `j`.
    pub fn leaf(&self, j: usize) -> NodeId {
        self.leaf_of_mode[j - 1]
    }

    pub fn node_of(&self, v: &Vertex) -> Option<NodeId> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index.contains_key(v)
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// Non-root interior vertices.
    pub fn inner_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&i| i != 0 && !self.is_leaf(i))
    }

    /// Non-root vertices.
    pub fn non_root_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        1..self.nodes.len()
    }

    pub fn traversal(&self, order: Order) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.ids().collect();
        if order == Order::LeavesToRoot {
            ids.reverse();
        }
        ids
    }

    pub fn vertices(&self, order: Order) -> Vec<&Vertex> {
        self.traversal(order).into_iter().map(|i| self.vertex(i)).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|n| n.sons.is_empty() || n.sons.len() == 2)
    }

    /// Canonical parenthesized form, e.g. `((1)((2)(3)))`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, id: NodeId, out: &mut String) {
        out.push('(');
        if self.is_leaf(id) {
            out.push_str(&self.vertex(id).lowest().to_string());
        } else {
            for &s in self.sons(id) {
                self.render_into(s, out);
            }
        }
        out.push(')');
    }
}

impl fmt::Display for DimensionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for DimensionTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DimensionTree::parse(s)
    }
}

fn spec_vertex(s: &TreeSpec) -> Vertex {
    let mut idx = Vec::new();
    collect_leaves(s, &mut idx);
    idx.sort_unstable();
    Vertex(idx)
}

fn collect_leaves(s: &TreeSpec, out: &mut Vec<usize>) {
    match s {
        TreeSpec::Leaf(j) => out.push(*j),
        TreeSpec::Node(c) => c.iter().for_each(|c| collect_leaves(c, out)),
    }
}

fn max_leaf(s: &TreeSpec) -> usize {
    match s {
        TreeSpec::Leaf(j) => *j,
        TreeSpec::Node(c) => c.iter().map(max_leaf).max().unwrap_or(0),
    }
}

/// Returns the vertex a subtree covers, checking the partition rules.
fn validate_spec(s: &TreeSpec, d: usize) -> Result<Vertex> {
    match s {
        TreeSpec::Leaf(j) => {
            if *j == 0 || *j > d {
                return Err(Error::IndexOutOfRange { index: *j, d });
            }
            Ok(Vertex(vec![*j]))
        }
        TreeSpec::Node(children) => {
            let sons = children
                .iter()
                .map(|c| validate_spec(c, d))
                .collect::<Result<Vec<_>>>()?;
            let mut all: Vec<usize> = sons.iter().flat_map(|v| v.0.iter().copied()).collect();
            all.sort_unstable();
            if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
                let mut shown = all.clone();
                shown.dedup();
                return Err(Error::OverlappingSons {
                    vertex: Vertex(shown).to_string(),
                    index: w[0],
                });
            }
            let here = Vertex(all);
            if sons.len() < 2 {
                return Err(Error::SingleSon {
                    vertex: here.to_string(),
                });
            }
            Ok(here)
        }
    }
}

/// Grammar: `node := "(" int ")" | "(" node node* ")"`, whitespace ignored.
pub fn parse_notation(s: &str) -> Result<TreeSpec> {
    let chars: Vec<(usize, char)> = s.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut pos = 0;
    let spec = parse_node(&chars, &mut pos, s.len())?;
    if pos != chars.len() {
        return Err(Error::Parse {
            offset: chars[pos].0,
            message: "trailing input after the root".into(),
        });
    }
    Ok(spec)
}

fn parse_node(chars: &[(usize, char)], pos: &mut usize, end: usize) -> Result<TreeSpec> {
    let offset = |p: usize| chars.get(p).map(|c| c.0).unwrap_or(end);
    match chars.get(*pos) {
        Some((_, '(')) => *pos += 1,
        _ => {
            return Err(Error::Parse {
                offset: offset(*pos),
                message: "expected '('".into(),
            })
        }
    }
    match chars.get(*pos) {
        Some((_, c)) if c.is_ascii_digit() => {
            // Digits run together once whitespace is stripped, so re-scan the
            // raw text to split "(1 2)" into two indices.
            let start = offset(*pos);
            while matches!(chars.get(*pos), Some((_, c)) if c.is_ascii_digit()) {
                *pos += 1;
            }
            let stop = offset(*pos);
            match chars.get(*pos) {
                Some((_, ')')) => *pos += 1,
                _ => {
                    return Err(Error::Parse {
                        offset: offset(*pos),
                        message: "expected ')' after leaf index".into(),
                    })
                }
            }
            let raw = &chars_to_string(chars, start, stop);
            let nums: Vec<&str> = raw.split_whitespace().collect();
            if nums.len() != 1 {
                return Err(Error::NonSingletonLeaf {
                    leaf: format!("({raw})"),
                });
            }
            let j = nums[0].parse::<usize>().map_err(|_| Error::Parse {
                offset: start,
                message: format!("bad index {raw:?}"),
            })?;
            Ok(TreeSpec::Leaf(j))
        }
        Some((_, '(')) => {
            let mut sons = Vec::new();
            while matches!(chars.get(*pos), Some((_, '('))) {
                sons.push(parse_node(chars, pos, end)?);
            }
            match chars.get(*pos) {
                Some((_, ')')) => *pos += 1,
                _ => {
                    return Err(Error::Parse {
                        offset: offset(*pos),
                        message: "expected ')' or '('".into(),
                    })
                }
            }
            Ok(TreeSpec::Node(sons))
        }
        _ => Err(Error::Parse {
            offset: offset(*pos),
            message: "expected a leaf index or '('".into(),
        }),
    }
}

// Reconstructs the original text between two byte offsets, keeping
// whitespace so separate indices stay separate.
fn chars_to_string(chars: &[(usize, char)], start: usize, stop: usize) -> String {
    let mut out = String::new();
    let mut last: Option<usize> = None;
    for &(off, c) in chars {
        if off < start || off >= stop {
            continue;
        }
        if let Some(l) = last {
            if off > l + 1 {
                out.push(' ');
            }
        }
        out.push(c);
        last = Some(off);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(ix: &[usize]) -> Vertex {
        Vertex::new(ix.iter().copied()).unwrap()
    }

    #[test]
    fn tucker_example_has_depth_one() {
        let t = DimensionTree::build(6, "((1)(2)(3)(4)(5)(6))").unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.len(), 7);
        assert_eq!(t, DimensionTree::tucker(6).unwrap());
        for j in 1..=6 {
            assert_eq!(t.parent(t.leaf(j)), Some(0));
        }
    }

    #[test]
    fn nonbinary_depth_two_example() {
        let t = DimensionTree::build(6, "(((1)(2)(3))((4)(5))(6))").unwrap();
        assert_eq!(t.depth(), 2);
        let mut got: Vec<Vertex> = t.vertices(Order::RootToLeaves).into_iter().cloned().collect();
        got.sort();
        let mut want = vec![
            v(&[1, 2, 3, 4, 5, 6]),
            v(&[1, 2, 3]),
            v(&[4, 5]),
            v(&[1]),
            v(&[2]),
            v(&[3]),
            v(&[4]),
            v(&[5]),
            v(&[6]),
        ];
        want.sort();
        assert_eq!(got, want);
        let sons: Vec<&Vertex> = t.sons(0).iter().map(|&s| t.vertex(s)).collect();
        assert_eq!(sons, vec![&v(&[1, 2, 3]), &v(&[4, 5]), &v(&[6])]);
    }

    #[test]
    fn duplicated_index_is_overlap() {
        let err = DimensionTree::build(3, "(((1)(1))((2)(3)))").unwrap_err();
        assert!(matches!(err, Error::OverlappingSons { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            DimensionTree::build(3, "((1)((2))(3))").unwrap_err(),
            Error::SingleSon { .. }
        ));
        assert!(matches!(
            DimensionTree::build(3, "((1)(2))").unwrap_err(),
            Error::IncompleteUnion { .. }
        ));
        assert!(matches!(
            DimensionTree::build(3, "((1)(2)(4))").unwrap_err(),
            Error::IndexOutOfRange { index: 4, d: 3 }
        ));
        assert!(matches!(
            DimensionTree::build(3, "((0)(1)(2))").unwrap_err(),
            Error::IndexOutOfRange { index: 0, .. }
        ));
        assert!(matches!(
            DimensionTree::build(3, "((1 2)(3))").unwrap_err(),
            Error::NonSingletonLeaf { .. }
        ));
        assert!(matches!(DimensionTree::build(3, "((1)(2)(3)").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(DimensionTree::build(3, "()").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(
            DimensionTree::build(3, "((1)(2)(3))x").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(DimensionTree::build(1, "(1)").unwrap_err(), Error::InvalidModeCount(1)));
    }

    #[test]
    fn whitespace_is_ignored_and_sons_are_canonicalized() {
        let a = DimensionTree::build(4, " ( ((3) (4)) ((2)(1)) ) ").unwrap();
        assert_eq!(a.render(), "(((1)(2))((3)(4)))");
        assert_eq!(a, DimensionTree::balanced(4).unwrap());
    }

    #[test]
    fn generators() {
        assert!(matches!(DimensionTree::tucker(1), Err(Error::InvalidModeCount(1))));
        assert!(matches!(DimensionTree::linear(0), Err(Error::InvalidModeCount(0))));
        assert!(matches!(DimensionTree::balanced(1), Err(Error::InvalidModeCount(1))));

        let lin = DimensionTree::linear(3).unwrap();
        let mut got: Vec<Vertex> = lin.vertices(Order::RootToLeaves).into_iter().cloned().collect();
        got.sort();
        let mut want = vec![v(&[1, 2, 3]), v(&[1]), v(&[2, 3]), v(&[2]), v(&[3])];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(lin.depth(), 2);
        assert_eq!(DimensionTree::linear(5).unwrap().depth(), 4);

        let bal = DimensionTree::balanced(4).unwrap();
        let sons: Vec<&Vertex> = bal.sons(0).iter().map(|&s| bal.vertex(s)).collect();
        assert_eq!(sons, vec![&v(&[1, 2]), &v(&[3, 4])]);
        assert_eq!(bal.depth(), 2);

        let bal5 = DimensionTree::balanced(5).unwrap();
        assert_eq!(bal5.render(), "((((1)(2))(3))((4)(5)))");
    }

    #[test]
    fn traversals() {
        let t = DimensionTree::tucker(3).unwrap();
        let order = t.vertices(Order::RootToLeaves);
        assert_eq!(order, vec![&v(&[1, 2, 3]), &v(&[1]), &v(&[2]), &v(&[3])]);

        let lin = DimensionTree::linear(3).unwrap();
        let mut down = lin.traversal(Order::RootToLeaves);
        down.reverse();
        assert_eq!(down, lin.traversal(Order::LeavesToRoot));
        for w in lin.traversal(Order::RootToLeaves).windows(2) {
            assert!(lin.level(w[0]) <= lin.level(w[1]));
        }
    }

    #[test]
    fn vertex_keys_round_trip() {
        let a = v(&[3, 1, 2]);
        assert_eq!(a.key(), "1 2 3");
        assert_eq!(Vertex::parse_key("1 2 3").unwrap(), a);
        assert_eq!(a.to_string(), "{1,2,3}");
        assert!(Vertex::new([1, 1]).is_err());
        assert!(Vertex::new([]).is_err());
        assert_eq!(a.complement(4), Some(v(&[4])));
        assert_eq!(a.complement(3), None);
    }
}
