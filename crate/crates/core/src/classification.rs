//! Hierarchical, simultaneous and generalized classification structures.
//!
//! A [`HierTree`] is a rooted tree of groups over the hypothesis indices
//! `0..N`; level `l` groups refine their level `l - 1` parent and siblings may
//! overlap. A [`ClassificationForest`] holds `S` such trees over the same index
//! universe. Groups are identified by their path of 1-based positional labels
//! within each parent, so `[2, 3]` is the third child of the second level-1
//! group.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Oracle null / non-null labels, `true` meaning the null hypothesis holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthAssignment {
    is_null: Vec<bool>,
}

impl TruthAssignment {
    pub fn new(is_null: Vec<bool>) -> Self {
        Self { is_null }
    }

    /// Labels from a signal indicator (`true` = false null).
    pub fn from_signals(signal: &[bool]) -> Self {
        Self::new(signal.iter().map(|s| !s).collect())
    }

    pub fn len(&self) -> usize {
        self.is_null.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_null.is_empty()
    }

    pub fn is_null(&self, i: usize) -> bool {
        self.is_null[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.is_null
    }

    pub fn null_count(&self) -> usize {
        self.is_null.iter().filter(|&&b| b).count()
    }

    /// Global proportion of true nulls, `|I0| / N`.
    pub fn pi0(&self) -> f64 {
        if self.is_null.is_empty() {
            return 0.0;
        }
        self.null_count() as f64 / self.is_null.len() as f64
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                what: "truth labels",
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Size, true-null count and true-null proportion of one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub n: usize,
    pub n0: usize,
    pub pi0: f64,
}

/// A group of hypotheses at some level of a hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupNode {
    path: Vec<usize>,
    members: Vec<usize>,
    children: Vec<GroupNode>,
}

impl GroupNode {
    /// Build a node; `members` is sorted and deduplicated.
    pub fn new(path: Vec<usize>, members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self {
            path,
            members,
            children: Vec::new(),
        }
    }

    /// Root node covering `0..n`.
    pub fn root(n: usize) -> Self {
        Self::new(Vec::new(), 0..n)
    }

    /// Append a child whose path is this node's path plus the next label.
    pub fn push_child(&mut self, members: impl IntoIterator<Item = usize>) -> &mut GroupNode {
        let mut path = self.path.clone();
        path.push(self.children.len() + 1);
        self.children.push(GroupNode::new(path, members));
        self.children.last_mut().unwrap()
    }

    /// Attach an already-built child without touching its path.
    pub fn push_node(&mut self, child: GroupNode) {
        self.children.push(child);
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn level(&self) -> usize {
        self.path.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn children(&self) -> &[GroupNode] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    fn max_depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.max_depth())
            .max()
            .map_or(self.level(), |d| d)
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a GroupNode)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }
}

/// Counts `(n, n0, pi0)` for a group. An empty group reports `pi0 = 0`.
pub fn group_stats(node: &GroupNode, truth: &TruthAssignment) -> GroupStats {
    stats_of(node.members(), truth)
}

pub(crate) fn stats_of(members: &[usize], truth: &TruthAssignment) -> GroupStats {
    let n = members.len();
    let n0 = members.iter().filter(|&&i| truth.is_null(i)).count();
    let pi0 = if n == 0 { 0.0 } else { n0 as f64 / n as f64 };
    GroupStats { n, n0, pi0 }
}

/// A hierarchical classification of `N` hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierTree {
    root: GroupNode,
}

impl HierTree {
    pub fn new(root: GroupNode) -> Self {
        Self { root }
    }

    /// Depth-0 tree: the unclassified set.
    pub fn flat(n: usize) -> Self {
        Self::new(GroupNode::root(n))
    }

    /// Depth-1 tree with the given (possibly overlapping) groups.
    pub fn one_level(n: usize, groups: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut root = GroupNode::root(n);
        for g in groups {
            root.push_child(g);
        }
        Self::new(root)
    }

    pub fn root(&self) -> &GroupNode {
        &self.root
    }

    pub fn n(&self) -> usize {
        self.root.len()
    }

    /// Depth `L` of the deepest leaf.
    pub fn depth(&self) -> usize {
        self.root.max_depth()
    }

    /// All nodes in depth-first pre-order, root first.
    pub fn nodes(&self) -> Vec<&GroupNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| out.push(n));
        out
    }

    /// Leaf groups in depth-first order.
    pub fn leaves(&self) -> Vec<&GroupNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| {
            if n.is_leaf() {
                out.push(n)
            }
        });
        out
    }

    /// Looks up a node by its label path.
    pub fn node(&self, path: &[usize]) -> Option<&GroupNode> {
        let mut cur = &self.root;
        for &label in path {
            cur = cur.children.get(label.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// True when siblings never share a member at any level.
    pub fn is_partition(&self) -> bool {
        fn disjoint(node: &GroupNode) -> bool {
            if node.children.len() > 1 {
                let total: usize = node.children.iter().map(|c| c.len()).sum();
                let mut all: Vec<usize> = node
                    .children
                    .iter()
                    .flat_map(|c| c.members.iter().copied())
                    .collect();
                all.sort_unstable();
                all.dedup();
                if all.len() != total {
                    return false;
                }
            }
            node.children.iter().all(disjoint)
        }
        disjoint(&self.root)
    }

    /// For each hypothesis, the positions (in [`HierTree::leaves`] order) of
    /// the leaves containing it.
    pub fn leaf_index(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n()];
        for (k, leaf) in self.leaves().into_iter().enumerate() {
            for &i in leaf.members() {
                if i < out.len() {
                    out[i].push(k);
                }
            }
        }
        out
    }
}

/// `S` simultaneous hierarchical classifications of the same `N` hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationForest {
    n: usize,
    trees: Vec<HierTree>,
}

impl ClassificationForest {
    pub fn new(n: usize, trees: Vec<HierTree>) -> Self {
        Self { n, trees }
    }

    pub fn single(tree: HierTree) -> Self {
        Self::new(tree.n(), vec![tree])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s_count(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[HierTree] {
        &self.trees
    }
}

/// A structural defect found by [`validate_forest`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoTrees,
    EmptyUniverse,
    RootNotUniverse {
        tree: usize,
    },
    IndexOutOfRange {
        tree: usize,
        path: Vec<usize>,
        index: usize,
    },
    EmptyGroup {
        tree: usize,
        path: Vec<usize>,
    },
    NotSubsetOfParent {
        tree: usize,
        path: Vec<usize>,
        index: usize,
    },
    SiblingsDoNotCover {
        tree: usize,
        path: Vec<usize>,
        uncovered: usize,
    },
    SkippedLevel {
        tree: usize,
        path: Vec<usize>,
        depth: usize,
    },
    BadPath {
        tree: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTrees => write!(f, "forest has no trees"),
            Violation::EmptyUniverse => write!(f, "N must be at least 1"),
            Violation::RootNotUniverse { tree } => {
                write!(f, "tree {tree}: root does not cover exactly 0..N")
            }
            Violation::IndexOutOfRange { tree, path, index } => {
                write!(f, "tree {tree}, group {path:?}: index {index} out of range")
            }
            Violation::EmptyGroup { tree, path } => {
                write!(f, "tree {tree}, group {path:?}: empty group")
            }
            Violation::NotSubsetOfParent { tree, path, index } => write!(
                f,
                "tree {tree}, group {path:?}: member {index} not in parent group"
            ),
            Violation::SiblingsDoNotCover {
                tree,
                path,
                uncovered,
            } => write!(
                f,
                "tree {tree}, group {path:?}: {uncovered} member(s) not covered by any child"
            ),
            Violation::SkippedLevel { tree, path, depth } => write!(
                f,
                "tree {tree}, group {path:?}: leaf above the tree depth {depth}"
            ),
            Violation::BadPath {
                tree,
                expected,
                found,
            } => write!(
                f,
                "tree {tree}: expected path {expected:?}, found {found:?}"
            ),
        }
    }
}

/// Outcome of [`validate_forest`]; violations are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            return Ok(());
        }
        let msg = self
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidClassification(msg))
    }
}

/// Checks every structural invariant of a forest.
///
/// Every tree must have a root equal to `0..N`, non-empty groups, children
/// contained in their parent, children jointly covering their parent, and all
/// leaves at the same depth (a hypothesis may not skip a level).
pub fn validate_forest(forest: &ClassificationForest) -> ValidationReport {
    let mut violations = Vec::new();
    let n = forest.n();
    if n == 0 {
        violations.push(Violation::EmptyUniverse);
    }
    if forest.trees().is_empty() {
        violations.push(Violation::NoTrees);
    }
    for (t, tree) in forest.trees().iter().enumerate() {
        let root = tree.root();
        let root_ok = root.len() == n && root.members().iter().enumerate().all(|(k, &i)| k == i);
        if !root_ok {
            violations.push(Violation::RootNotUniverse { tree: t });
        }
        if !root.path().is_empty() {
            violations.push(Violation::BadPath {
                tree: t,
                expected: Vec::new(),
                found: root.path().to_vec(),
            });
        }
        let depth = tree.depth();
        check_node(t, root, n, depth, &mut violations);
    }
    ValidationReport { violations }
}

fn check_node(t: usize, node: &GroupNode, n: usize, depth: usize, out: &mut Vec<Violation>) {
    if node.is_empty() {
        out.push(Violation::EmptyGroup {
            tree: t,
            path: node.path().to_vec(),
        });
    }
    if let Some(&bad) = node.members().iter().find(|&&i| i >= n) {
        out.push(Violation::IndexOutOfRange {
            tree: t,
            path: node.path().to_vec(),
            index: bad,
        });
    }
    if node.is_leaf() {
        if node.level() < depth {
            out.push(Violation::SkippedLevel {
                tree: t,
                path: node.path().to_vec(),
                depth,
            });
        }
        return;
    }
    let mut covered = vec![false; node.len()];
    for (k, child) in node.children().iter().enumerate() {
        let mut expected = node.path().to_vec();
        expected.push(k + 1);
        if child.path() != expected.as_slice() {
            out.push(Violation::BadPath {
                tree: t,
                expected,
                found: child.path().to_vec(),
            });
        }
        for &i in child.members() {
            match node.members().binary_search(&i) {
                Ok(pos) => covered[pos] = true,
                Err(_) => {
                    out.push(Violation::NotSubsetOfParent {
                        tree: t,
                        path: child.path().to_vec(),
                        index: i,
                    });
                    break;
                }
            }
        }
        check_node(t, child, n, depth, out);
    }
    let uncovered = covered.iter().filter(|c| !**c).count();
    if uncovered > 0 {
        out.push(Violation::SiblingsDoNotCover {
            tree: t,
            path: node.path().to_vec(),
            uncovered,
        });
    }
}

/// For each tree, the paths of the leaves whose members include `i`.
pub fn leaf_memberships(forest: &ClassificationForest, i: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if i >= forest.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: forest.n(),
        });
    }
    fn collect(node: &GroupNode, i: usize, out: &mut Vec<Vec<usize>>) {
        if !node.contains(i) {
            return;
        }
        if node.is_leaf() {
            out.push(node.path().to_vec());
        } else {
            for c in node.children() {
                collect(c, i, out);
            }
        }
    }
    Ok(forest
        .trees()
        .iter()
        .map(|tree| {
            let mut paths = Vec::new();
            collect(tree.root(), i, &mut paths);
            paths
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overlap_example() -> HierTree {
        // 25 hypotheses, two level-1 groups sharing indices 10..15.
        HierTree::one_level(25, [(0..15).collect(), (10..25).collect()])
    }

    #[test]
    fn flat_tree_is_valid() {
        let f = ClassificationForest::single(HierTree::flat(5));
        assert!(validate_forest(&f).is_ok());
        assert_eq!(f.trees()[0].depth(), 0);
    }

    #[test]
    fn overlapping_siblings_are_allowed() {
        let f = ClassificationForest::single(overlap_example());
        assert!(validate_forest(&f).is_ok());
        assert!(!f.trees()[0].is_partition());
    }

    #[test]
    fn out_of_range_index_is_reported() {
        let tree = HierTree::one_level(25, [(0..15).collect(), vec![10, 11, 30]]);
        let f = ClassificationForest::new(25, vec![tree]);
        let report = validate_forest(&f);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::IndexOutOfRange { index: 30, .. })));
        assert!(report.into_result().is_err());
    }

    #[test]
    fn non_covering_children_and_empty_groups() {
        let tree = HierTree::one_level(6, [vec![0, 1, 2], vec![]]);
        let report = validate_forest(&ClassificationForest::single(tree));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::EmptyGroup { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SiblingsDoNotCover { uncovered: 3, .. })));
    }

    #[test]
    fn child_outside_parent() {
        let mut root = GroupNode::root(8);
        root.push_child(0..4).push_child([0, 1, 5]);
        root.push_child(4..8).push_child(4..8);
        let report = validate_forest(&ClassificationForest::single(HierTree::new(root)));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotSubsetOfParent { index: 5, .. })));
    }

    #[test]
    fn skipped_level_is_reported() {
        let mut root = GroupNode::root(4);
        root.push_child(0..2).push_child(0..2);
        root.push_child(2..4);
        let report = validate_forest(&ClassificationForest::single(HierTree::new(root)));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SkippedLevel { .. })));
    }

    #[test]
    fn stats_by_counting() {
        let truth = TruthAssignment::new(vec![true, true, false, false]);
        let node = GroupNode::new(vec![], 0..4);
        let s = group_stats(&node, &truth);
        assert_eq!((s.n, s.n0, s.pi0), (4, 2, 0.5));

        let none = TruthAssignment::new(vec![false; 4]);
        let s = group_stats(&node, &none);
        assert_eq!((s.n, s.n0, s.pi0), (4, 0, 0.0));
    }

    #[test]
    fn twenty_five_with_ten_signals() {
        let mut is_null = vec![true; 25];
        for i in [3, 5, 10, 11, 12, 13, 14, 17, 20, 22] {
            is_null[i] = false;
        }
        let truth = TruthAssignment::new(is_null);
        let s = group_stats(overlap_example().root(), &truth);
        assert_eq!((s.n, s.n0), (25, 15));
        assert!((s.pi0 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn leaf_memberships_partition_and_overlap() {
        let tree = HierTree::one_level(9, [(0..3).collect(), (3..6).collect(), (6..9).collect()]);
        let f = ClassificationForest::single(tree);
        assert_eq!(leaf_memberships(&f, 4).unwrap(), vec![vec![vec![2]]]);

        let f = ClassificationForest::single(overlap_example());
        assert_eq!(
            leaf_memberships(&f, 12).unwrap(),
            vec![vec![vec![1], vec![2]]]
        );
        assert!(leaf_memberships(&f, 25).is_err());
    }

    #[test]
    fn leaf_memberships_one_list_per_tree() {
        let rows = HierTree::one_level(6, [vec![0, 1, 2], vec![3, 4, 5]]);
        let cols = HierTree::one_level(6, [vec![0, 3], vec![1, 4], vec![2, 5]]);
        let f = ClassificationForest::new(6, vec![rows, cols]);
        let m = leaf_memberships(&f, 4).unwrap();
        assert_eq!(m, vec![vec![vec![2]], vec![vec![2]]]);
    }

    #[test]
    fn node_lookup_by_path() {
        let mut root = GroupNode::root(6);
        root.push_child(0..3).push_child(0..3);
        let g2 = root.push_child(3..6);
        g2.push_child(3..5);
        g2.push_child(5..6);
        let tree = HierTree::new(root);
        assert_eq!(tree.node(&[2, 2]).unwrap().members(), &[5]);
        assert!(tree.node(&[3]).is_none());
        assert!(tree.node(&[0]).is_none());
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.leaves().len(), 3);
    }
}
