//! Finite binary ("simple") trees with edge height ranges, used by the
//! clonal growth dynamics.
//!
//! A comb is turned into a simple tree by recursively splitting the window
//! at its highest atom. Nodes are addressed by Ulam–Harris bit labels: the
//! root is the empty label, and a node's children append `0` (left of the
//! split) or `1` (right). Each node describes one vertical edge, spanning
//! heights `[omega, alpha)` with `alpha` the rootward end.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::comb::CombTree;
use crate::error::{invalid, Error, Result};
use crate::mutation::MarkedTree;

/// Ulam–Harris address of a node: the bit path from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NodeLabel(Vec<u8>);

impl NodeLabel {
    pub fn root() -> Self {
        NodeLabel(Vec::new())
    }

    pub fn child(&self, bit: u8) -> Self {
        debug_assert!(bit <= 1);
        let mut v = self.0.clone();
        v.push(bit);
        NodeLabel(v)
    }

    /// Concatenation: the address of `other` inside a subtree rooted here.
    pub fn join(&self, other: &NodeLabel) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NodeLabel(v)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// The label one step rootward; `None` at the root.
    pub fn parent(&self) -> Option<NodeLabel> {
        let (_, init) = self.0.split_last()?;
        Some(NodeLabel(init.to_vec()))
    }

    /// Whether `self` lies in the subtree rooted at `prefix`.
    pub fn starts_with(&self, prefix: &NodeLabel) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl From<NodeLabel> for String {
    fn from(l: NodeLabel) -> String {
        l.0.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

impl TryFrom<String> for NodeLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => v.push(0),
                '1' => v.push(1),
                _ => return Err(invalid(format!("bad node label {s:?}"))),
            }
        }
        Ok(NodeLabel(v))
    }
}

/// Terminal status of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Carries two children that meet at height `omega`.
    Internal,
    /// Pruned edge end (e.g. cut by a mutation); can later be grown.
    Bud,
    /// Reaches the boundary (height 0).
    Boundary,
}

/// One vertical edge of a simple tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleNode {
    /// Rootward end of the edge.
    pub alpha: f64,
    /// Leafward end: split height (internal), cut height (bud), or 0.
    pub omega: f64,
    pub kind: NodeKind,
    /// Boundary-cluster width for boundary leaves of full trees; 0 elsewhere.
    pub leaf_mass: f64,
}

impl SimpleNode {
    pub fn length(&self) -> f64 {
        self.alpha - self.omega
    }
}

/// A finite rooted binary tree of labelled edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleTree {
    pub nodes: BTreeMap<NodeLabel, SimpleNode>,
}

impl SimpleTree {
    pub fn root(&self) -> &SimpleNode {
        self.nodes.get(&NodeLabel::root()).expect("rooted tree")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of all edge lengths.
    pub fn total_length(&self) -> f64 {
        self.nodes.values().map(SimpleNode::length).sum()
    }

    /// Number of bud leaves.
    pub fn bud_count(&self) -> usize {
        self.nodes
            .values()
            .filter(|n| n.kind == NodeKind::Bud)
            .count()
    }

    /// Largest leaf height (buds sit at their cut height, boundary at 0).
    pub fn max_leaf_height(&self) -> f64 {
        self.nodes
            .values()
            .filter(|n| n.kind != NodeKind::Internal)
            .map(|n| n.omega)
            .fold(0.0, f64::max)
    }

    pub fn buds(&self) -> impl Iterator<Item = (&NodeLabel, &SimpleNode)> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.kind == NodeKind::Bud)
    }

    /// Structural invariants: a root exists, internal nodes have exactly the
    /// children `0` and `1` meeting at their `omega`, leaves have none, and
    /// edges have nonnegative length.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(invalid("simple tree must have a root"));
        }
        for (label, node) in &self.nodes {
            if node.length() < -1e-12 {
                return Err(invalid(format!("edge {label} has negative length")));
            }
            if !label.is_root() {
                let mut parent = label.clone();
                parent.0.pop();
                if !self.nodes.contains_key(&parent) {
                    return Err(invalid(format!("orphan node {label}")));
                }
            }
            let c0 = self.nodes.get(&label.child(0));
            let c1 = self.nodes.get(&label.child(1));
            match node.kind {
                NodeKind::Internal => {
                    let (c0, c1) = match (c0, c1) {
                        (Some(a), Some(b)) => (a, b),
                        _ => return Err(invalid(format!("internal node {label} lacks children"))),
                    };
                    for c in [c0, c1] {
                        if (c.alpha - node.omega).abs() > 1e-9 {
                            return Err(invalid(format!(
                                "children of {label} do not meet its split height"
                            )));
                        }
                    }
                }
                NodeKind::Bud | NodeKind::Boundary => {
                    if c0.is_some() || c1.is_some() {
                        return Err(invalid(format!("leaf node {label} has children")));
                    }
                    if node.kind == NodeKind::Boundary && node.omega != 0.0 {
                        return Err(invalid(format!("boundary leaf {label} not at height 0")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Replace the bud at `at` by extending its edge down to the root edge of
    /// `sub` and adopting `sub`'s descendants with relabelled addresses.
    /// `sub`'s root edge must start where the bud sits (`alpha = bud omega`).
    pub fn graft(&mut self, at: &NodeLabel, sub: &SimpleTree) -> Result<()> {
        let bud = *self
            .nodes
            .get(at)
            .ok_or_else(|| invalid(format!("no node {at} to graft onto")))?;
        if bud.kind != NodeKind::Bud {
            return Err(invalid(format!("node {at} is not a bud")));
        }
        let sub_root = *sub
            .nodes
            .get(&NodeLabel::root())
            .ok_or_else(|| invalid("graft subtree has no root"))?;
        if (sub_root.alpha - bud.omega).abs() > 1e-9 {
            return Err(invalid(format!(
                "graft root height {} does not match bud height {}",
                sub_root.alpha, bud.omega
            )));
        }
        let host = self.nodes.get_mut(at).expect("checked above");
        host.omega = sub_root.omega;
        host.kind = sub_root.kind;
        host.leaf_mass = sub_root.leaf_mass;
        for (label, node) in &sub.nodes {
            if label.is_root() {
                continue;
            }
            let prev = self.nodes.insert(at.join(label), *node);
            debug_assert!(prev.is_none(), "graft target had descendants");
        }
        Ok(())
    }

    /// Newick serialization. Nodes are named by their bit address (the root
    /// is unnamed), leaves carry a `_bud` or `_boundary` status suffix, and
    /// branch lengths are edge lengths.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(&NodeLabel::root(), &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, label: &NodeLabel, out: &mut String) {
        use std::fmt::Write;
        let node = &self.nodes[label];
        if node.kind == NodeKind::Internal {
            out.push('(');
            self.write_newick(&label.child(0), out);
            out.push(',');
            self.write_newick(&label.child(1), out);
            out.push(')');
        }
        out.push_str(&String::from(label.clone()));
        match node.kind {
            NodeKind::Internal => {}
            NodeKind::Bud => out.push_str("_bud"),
            NodeKind::Boundary => out.push_str("_boundary"),
        }
        write!(out, ":{}", node.length()).expect("write to string");
    }
}

// Shared recursion over a comb: the subtree over the time range `(s, e)`
// hanging below height `top`. `atoms[lo..hi]` are the atoms with times in
// `(s, e)`. The node's edge lies on the vertical branch at time `s`.
struct CombSplitter<'a> {
    tree: &'a CombTree,
    // Marks to prune at, keyed by exact branch time bits: depth list.
    cuts: Option<HashMap<u64, Vec<f64>>>,
    nodes: BTreeMap<NodeLabel, SimpleNode>,
}

impl<'a> CombSplitter<'a> {
    fn highest_in(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo..hi).max_by(|&i, &j| {
            self.tree.atoms[i]
                .height
                .total_cmp(&self.tree.atoms[j].height)
        })
    }

    /// Highest pruning mark on the edge `[omega, alpha)` of the branch at
    /// time `s`, if any.
    fn cut_height(&self, s: f64, omega: f64, alpha: f64) -> Option<f64> {
        let cuts = self.cuts.as_ref()?;
        cuts.get(&s.to_bits())?
            .iter()
            .copied()
            .filter(|&d| d >= omega && d < alpha)
            .fold(None, |m, d| Some(m.map_or(d, |v: f64| v.max(d))))
    }

    fn split(&mut self, label: NodeLabel, s: f64, e: f64, top: f64, lo: usize, hi: usize) {
        let split_at = self.highest_in(lo, hi);
        let omega_full = split_at.map_or(0.0, |k| self.tree.atoms[k].height);
        if let Some(cut) = self.cut_height(s, omega_full, top) {
            self.nodes.insert(
                label,
                SimpleNode {
                    alpha: top,
                    omega: cut,
                    kind: NodeKind::Bud,
                    leaf_mass: 0.0,
                },
            );
            return;
        }
        match split_at {
            None => {
                self.nodes.insert(
                    label,
                    SimpleNode {
                        alpha: top,
                        omega: 0.0,
                        kind: NodeKind::Boundary,
                        leaf_mass: e - s,
                    },
                );
            }
            Some(k) => {
                let atom = self.tree.atoms[k];
                self.nodes.insert(
                    label.clone(),
                    SimpleNode {
                        alpha: top,
                        omega: atom.height,
                        kind: NodeKind::Internal,
                        leaf_mass: 0.0,
                    },
                );
                self.split(label.child(0), s, atom.time, atom.height, lo, k);
                self.split(label.child(1), atom.time, e, atom.height, k + 1, hi);
            }
        }
    }
}

/// Convert a comb into its simple-tree form (no pruning).
pub fn simple_tree_from_comb(tree: &CombTree) -> SimpleTree {
    let mut splitter = CombSplitter {
        tree,
        cuts: None,
        nodes: BTreeMap::new(),
    };
    splitter.split(NodeLabel::root(), 0.0, tree.span, tree.z, 0, tree.atoms.len());
    SimpleTree {
        nodes: splitter.nodes,
    }
}

/// The clonal subtree of a marked comb at coupling level `theta`: descend
/// from the root and cut every edge at its highest mark of level ≤ `theta`,
/// turning it into a bud. Edges that reach the boundary unmarked stay
/// boundary leaves.
pub fn clonal_subtree(mt: &MarkedTree, theta: f64) -> SimpleTree {
    let mut cuts: HashMap<u64, Vec<f64>> = HashMap::new();
    for m in mt.marks_at_level(theta) {
        cuts.entry(m.time.to_bits()).or_default().push(m.depth);
    }
    let tree = &mt.tree;
    let mut splitter = CombSplitter {
        tree,
        cuts: Some(cuts),
        nodes: BTreeMap::new(),
    };
    splitter.split(NodeLabel::root(), 0.0, tree.span, tree.z, 0, tree.atoms.len());
    SimpleTree {
        nodes: splitter.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::Atom;
    use crate::mutation::{BranchRef, Mark};

    fn fixture_comb() -> CombTree {
        CombTree {
            z: 1.0,
            epsilon: 0.01,
            span: 4.0,
            atoms: vec![
                Atom { time: 1.0, height: 0.3 },
                Atom { time: 2.0, height: 0.8 },
                Atom { time: 3.0, height: 0.1 },
            ],
        }
    }

    fn label(s: &str) -> NodeLabel {
        NodeLabel::try_from(s.to_string()).unwrap()
    }

    #[test]
    fn comb_splits_at_highest_atom() {
        let tree = fixture_comb();
        let st = simple_tree_from_comb(&tree);
        st.validate().unwrap();
        // Root splits at (2.0, 0.8); left subtree over (0,2) splits at
        // (1.0, 0.3); right over (2,4) splits at (3.0, 0.1).
        assert_eq!(st.len(), 7);
        let root = st.root();
        assert_eq!((root.alpha, root.omega, root.kind), (1.0, 0.8, NodeKind::Internal));
        let l = st.nodes[&label("0")];
        assert_eq!((l.alpha, l.omega, l.kind), (0.8, 0.3, NodeKind::Internal));
        let r = st.nodes[&label("1")];
        assert_eq!((r.alpha, r.omega, r.kind), (0.8, 0.1, NodeKind::Internal));
        let ll = st.nodes[&label("00")];
        assert_eq!((ll.omega, ll.kind, ll.leaf_mass), (0.0, NodeKind::Boundary, 1.0));
        let lr = st.nodes[&label("01")];
        assert_eq!((lr.kind, lr.leaf_mass), (NodeKind::Boundary, 1.0));
        // Total length = z + sum of atom heights.
        assert!((st.total_length() - tree.skeleton_length()).abs() < 1e-12);
        // Leaf masses sum to the span.
        let mass: f64 = st.nodes.values().map(|n| n.leaf_mass).sum();
        assert!((mass - tree.span).abs() < 1e-12);
    }

    #[test]
    fn newick_serialization_is_exact() {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            NodeLabel::root(),
            SimpleNode { alpha: 1.0, omega: 0.5, kind: NodeKind::Internal, leaf_mass: 0.0 },
        );
        nodes.insert(
            label("0"),
            SimpleNode { alpha: 0.5, omega: 0.0, kind: NodeKind::Boundary, leaf_mass: 1.0 },
        );
        nodes.insert(
            label("1"),
            SimpleNode { alpha: 0.5, omega: 0.25, kind: NodeKind::Bud, leaf_mass: 0.0 },
        );
        let st = SimpleTree { nodes };
        st.validate().unwrap();
        assert_eq!(st.to_newick(), "(0_boundary:0.5,1_bud:0.25):0.5;");
        // A lone boundary root renders as a single leaf.
        let solo = SimpleTree {
            nodes: std::iter::once((
                NodeLabel::root(),
                SimpleNode { alpha: 1.0, omega: 0.0, kind: NodeKind::Boundary, leaf_mass: 2.0 },
            ))
            .collect(),
        };
        assert_eq!(solo.to_newick(), "_boundary:1;");
        // Full fixture: every internal node opens one parenthesis pair.
        let full = simple_tree_from_comb(&fixture_comb());
        let s = full.to_newick();
        assert_eq!(s.matches('(').count(), 3);
        assert_eq!(s.matches("_boundary").count(), 4);
    }

    #[test]
    fn clonal_pruning_cuts_at_the_highest_selected_mark() {
        let tree = fixture_comb();
        // One mark on the origin branch at depth 0.5 (edge "0": [0.3, 0.8)),
        // one on atom 2's branch at depth 0.05 (edge "11": [0, 0.1)),
        // one too high on the coupling level to matter.
        let marks = vec![
            Mark { branch: BranchRef::Origin, time: 0.0, depth: 0.5, level: 0.3 },
            Mark { branch: BranchRef::Atom(2), time: 3.0, depth: 0.05, level: 0.2 },
            Mark { branch: BranchRef::Atom(0), time: 1.0, depth: 0.2, level: 0.9 },
        ];
        let mt = MarkedTree { tree, floor: 0.0, scale: 1.0, marks };
        mt.validate().unwrap();
        let ct = clonal_subtree(&mt, 0.5);
        ct.validate().unwrap();
        // Origin-branch edges: root [0.8,1.0) at time 0, then "0" [0.3,0.8)
        // at time 0 — the mark at depth 0.5 turns "0" into a bud at 0.5.
        let n0 = ct.nodes[&label("0")];
        assert_eq!((n0.kind, n0.omega, n0.alpha), (NodeKind::Bud, 0.5, 0.8));
        assert!(!ct.nodes.contains_key(&label("00")));
        // Atom-2 branch: a split's right child sits on the atom's own
        // branch, so edge "11" spans [0, 0.1) at time 3.0 — bud at 0.05.
        let n11 = ct.nodes[&label("11")];
        assert_eq!((n11.kind, n11.omega), (NodeKind::Bud, 0.05));
        // Edge "10" continues the branch at time 2.0 below the split; it is
        // unmarked (the level-0.9 mark exceeds theta = 0.5 and sits at time
        // 1.0 anyway), so it stays a boundary leaf.
        let n10 = ct.nodes[&label("10")];
        assert_eq!(n10.kind, NodeKind::Boundary);
        assert_eq!(ct.bud_count(), 2);
        // At theta = 1 the third mark also bites, but it sits on edge "01"
        // ([0, 0.3) at time 1.0), which already vanished when "0" became a
        // bud — the tree can only shrink.
        let ct2 = clonal_subtree(&mt, 1.0);
        ct2.validate().unwrap();
        assert!(ct2.len() <= ct.len());
    }

    #[test]
    fn unmarked_comb_prunes_to_its_full_tree() {
        let tree = fixture_comb();
        let mt = MarkedTree {
            tree: tree.clone(),
            floor: 0.0,
            scale: 1.0,
            marks: vec![],
        };
        let a = simple_tree_from_comb(&tree);
        let b = clonal_subtree(&mt, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn graft_relabels_with_concatenation() {
        // Host: root internal with children 0 (internal: 00, 01) and 1 (bud).
        let mut host = SimpleTree { nodes: BTreeMap::new() };
        let add = |t: &mut SimpleTree, l: &str, alpha: f64, omega: f64, kind: NodeKind| {
            t.nodes.insert(
                label(l),
                SimpleNode { alpha, omega, kind, leaf_mass: 0.0 },
            );
        };
        add(&mut host, "", 1.0, 0.6, NodeKind::Internal);
        add(&mut host, "0", 0.6, 0.2, NodeKind::Internal);
        add(&mut host, "00", 0.2, 0.0, NodeKind::Boundary);
        add(&mut host, "01", 0.2, 0.0, NodeKind::Boundary);
        add(&mut host, "1", 0.6, 0.4, NodeKind::Bud);
        host.validate().unwrap();

        // Graft at "1": root internal with children 0 (boundary) and
        // 1 (internal: 10, 11 leaves).
        let mut sub = SimpleTree { nodes: BTreeMap::new() };
        add(&mut sub, "", 0.4, 0.3, NodeKind::Internal);
        add(&mut sub, "0", 0.3, 0.0, NodeKind::Boundary);
        add(&mut sub, "1", 0.3, 0.1, NodeKind::Internal);
        add(&mut sub, "10", 0.1, 0.0, NodeKind::Boundary);
        add(&mut sub, "11", 0.1, 0.05, NodeKind::Bud);
        sub.validate().unwrap();

        host.graft(&label("1"), &sub).unwrap();
        host.validate().unwrap();
        let labels: Vec<String> = host.nodes.keys().cloned().map(String::from).collect();
        assert_eq!(
            labels,
            vec!["", "0", "00", "01", "1", "10", "11", "110", "111"]
        );
        // The host edge "1" extended down to the graft root's omega.
        let n1 = host.nodes[&label("1")];
        assert_eq!((n1.alpha, n1.omega, n1.kind), (0.6, 0.3, NodeKind::Internal));
        // Length bookkeeping: old host + sub lengths must add up.
        let want = 1.0 - 0.6 + (0.6 - 0.2) + 0.2 + 0.2  // original host minus bud
            + (0.6 - 0.4)                                // host bud edge [0.4, 0.6)
            + sub.total_length();
        assert!((host.total_length() - want).abs() < 1e-12);
    }

    #[test]
    fn graft_rejects_mismatched_heights_and_non_buds() {
        let mut host = SimpleTree { nodes: BTreeMap::new() };
        host.nodes.insert(
            label(""),
            SimpleNode { alpha: 1.0, omega: 0.4, kind: NodeKind::Bud, leaf_mass: 0.0 },
        );
        let mut sub = SimpleTree { nodes: BTreeMap::new() };
        sub.nodes.insert(
            label(""),
            SimpleNode { alpha: 0.7, omega: 0.0, kind: NodeKind::Boundary, leaf_mass: 0.0 },
        );
        assert!(host.clone().graft(&label(""), &sub).is_err());
        let mut sub2 = SimpleTree { nodes: BTreeMap::new() };
        sub2.nodes.insert(
            label(""),
            SimpleNode { alpha: 0.4, omega: 0.0, kind: NodeKind::Boundary, leaf_mass: 0.0 },
        );
        let mut h2 = host.clone();
        h2.graft(&label(""), &sub2).unwrap();
        assert_eq!(h2.root().kind, NodeKind::Boundary);
        // Grafting onto a non-bud fails.
        assert!(h2.graft(&label(""), &sub2).is_err());
    }

    #[test]
    fn labels_round_trip_through_strings() {
        for s in ["", "0", "1", "0110", "111000"] {
            let l = label(s);
            assert_eq!(String::from(l.clone()), s);
        }
        assert!(NodeLabel::try_from("012".to_string()).is_err());
        assert_eq!(label("01").join(&label("10")), label("0110"));
        assert_eq!(label("").join(&label("10")), label("10"));
        assert!(label("").is_root());
    }
}
