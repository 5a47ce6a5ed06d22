//! Oracle and data-adaptive p-value weights.
//!
//! Every weighted BH variant in this crate multiplies `P_i` by a weight `W_i`.
//! The oracle weights are built from the true null proportions of each group
//! and satisfy `sum_{i in I0} 1/W_i = N`, which is what makes the weighted BH
//! control the FDR. The data-adaptive weights replace true null counts with
//! Storey-type estimates `(n - R(lambda) + 1) / (1 - lambda)`.
//!
//! Weights live on the extended non-negative reals. A group with no true
//! nulls has effect `0` (its members are always rejected), a group with only
//! true nulls has effect `+inf` (its members are never rejected through that
//! group), and `0 * inf` terms in the normalising sums are taken as `0`.

use serde::Serialize;

use crate::classification::{stats_of, ClassificationForest, GroupNode, HierTree, TruthAssignment};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, recip};

/// Per-hypothesis multiplicative p-value weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Self {
        Self(w)
    }

    pub fn constant(value: f64, n: usize) -> Self {
        Self(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `sum_{i in I0} 1/W_i`, the left-hand side of the FDR normalisation.
    pub fn null_inverse_sum(&self, truth: &TruthAssignment) -> f64 {
        compensated_sum(
            self.0
                .iter()
                .zip(truth.as_slice())
                .filter(|(_, &null)| null)
                .map(|(&w, _)| recip(w)),
        )
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Which of the two equivalent recursions builds the oracle group effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EffectRecursion {
    /// `w_l = pi0 (1 - pi0) / w_{l-1} * pi_l / (1 - pi_l)`, seeded by `w_0 = pi0`.
    #[default]
    ParentReciprocal,
    /// `w_l = w_{l-2} (1 - pi_{l-1}) / pi_{l-1} * pi_l / (1 - pi_l)`.
    Grandparent,
}

/// Oracle effect of one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupEffect {
    pub path: Vec<usize>,
    pub pi0: f64,
    pub effect: f64,
}

fn odds(pi: f64) -> f64 {
    // pi / (1 - pi) on [0, 1]
    if pi >= 1.0 {
        f64::INFINITY
    } else {
        pi / (1.0 - pi)
    }
}

fn check_truth(truth: &TruthAssignment, n: usize) -> Result<()> {
    truth.check_len(n)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(())
}

pub(crate) fn check_pvalues(p: &[f64]) -> Result<()> {
    if let Some((index, &value)) = p
        .iter()
        .enumerate()
        .find(|(_, &v)| !(0.0..=1.0).contains(&v))
    {
        return Err(Error::InvalidPValue { index, value });
    }
    Ok(())
}

/// Oracle BH weights: `W_i = pi0` for all `i`.
pub fn oracle_flat_weights(truth: &TruthAssignment, n: usize) -> Result<WeightVector> {
    check_truth(truth, n)?;
    Ok(WeightVector::constant(truth.pi0(), n))
}

/// Assemble `W_i` from group effects over possibly overlapping groups:
///
/// `1/W_i = (1/N sum_g m0_g / w_g)^-1 * sum_{g contains i} 1/w_g`
///
/// where `m0_g` is the (true or estimated) null count of group `g`. When the
/// normaliser vanishes (every null sits in an infinite-effect group) the
/// prefactor is taken as 1.
fn assemble_overlapping(
    n: usize,
    groups: &[&[usize]],
    effects: &[f64],
    null_mass: &[f64],
) -> Vec<f64> {
    let normaliser = compensated_sum(groups.iter().enumerate().map(|(g, _)| {
        if null_mass[g] == 0.0 || effects[g].is_infinite() {
            0.0
        } else {
            null_mass[g] / effects[g]
        }
    }));
    let scale = if normaliser > 0.0 && normaliser.is_finite() {
        n as f64 / normaliser
    } else {
        1.0
    };
    let mut inv: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (g, members) in groups.iter().enumerate() {
        let r = recip(effects[g]);
        for &i in members.iter() {
            inv[i].push(r);
        }
    }
    inv.into_iter()
        .map(|terms| recip(scale * compensated_sum(terms)))
        .collect()
}

fn check_coverage(n: usize, groups: &[&[usize]]) -> Result<()> {
    let mut covered = vec![false; n];
    for members in groups {
        for &i in members.iter() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            covered[i] = true;
        }
    }
    match covered.iter().position(|c| !c) {
        Some(i) => Err(Error::Uncovered(i)),
        None => Ok(()),
    }
}

/// Weights for one-way overlapping groups with arbitrary positive group
/// effects `w_g`.
pub fn oracle_overlap_oneway_weights(
    n: usize,
    groups: &[Vec<usize>],
    group_weights: &[f64],
    truth: &TruthAssignment,
) -> Result<WeightVector> {
    check_truth(truth, n)?;
    if groups.len() != group_weights.len() {
        return Err(Error::LengthMismatch {
            what: "group weights",
            expected: groups.len(),
            got: group_weights.len(),
        });
    }
    if let Some((group, &value)) = group_weights
        .iter()
        .enumerate()
        .find(|(_, &w)| !(w.is_finite() && w > 0.0))
    {
        return Err(Error::InvalidGroupWeight { group, value });
    }
    let slices: Vec<&[usize]> = groups.iter().map(|g| g.as_slice()).collect();
    check_coverage(n, &slices)?;
    if truth.null_count() == 0 {
        return Ok(WeightVector::constant(0.0, n));
    }
    let null_mass: Vec<f64> = groups
        .iter()
        .map(|g| stats_of(g, truth).n0 as f64)
        .collect();
    Ok(WeightVector(assemble_overlapping(
        n,
        &slices,
        group_weights,
        &null_mass,
    )))
}

/// Oracle group effects for every node of `tree`, root first (pre-order).
///
/// The root carries `pi0`. A node with no true nulls gets effect `0`, a node
/// with only true nulls gets `+inf`; a non-degenerate node always has
/// non-degenerate ancestors, so the recursion never sees `0 * inf`.
pub fn oracle_group_effects(
    tree: &HierTree,
    truth: &TruthAssignment,
    recursion: EffectRecursion,
) -> Result<Vec<GroupEffect>> {
    check_truth(truth, tree.n())?;
    let pi0 = truth.pi0();
    let mut out = Vec::new();
    // (effect of parent, effect of grandparent, pi0 of parent)
    fn walk(
        node: &GroupNode,
        truth: &TruthAssignment,
        global: f64,
        recursion: EffectRecursion,
        parent: Option<(f64, f64, f64)>,
        out: &mut Vec<GroupEffect>,
    ) {
        let pi = stats_of(node.members(), truth).pi0;
        let effect = match parent {
            None => global,
            Some(_) if pi >= 1.0 => f64::INFINITY,
            Some(_) if pi <= 0.0 => 0.0,
            Some((w_parent, w_grand, pi_parent)) => match recursion {
                EffectRecursion::ParentReciprocal => global * (1.0 - global) / w_parent * odds(pi),
                EffectRecursion::Grandparent => {
                    if node.level() == 1 {
                        (1.0 - global) * odds(pi)
                    } else {
                        w_grand / odds(pi_parent) * odds(pi)
                    }
                }
            },
        };
        out.push(GroupEffect {
            path: node.path().to_vec(),
            pi0: pi,
            effect,
        });
        let w_parent = parent.map_or(f64::NAN, |p| p.0);
        for c in node.children() {
            walk(
                c,
                truth,
                global,
                recursion,
                Some((effect, w_parent, pi)),
                out,
            );
        }
    }
    walk(tree.root(), truth, pi0, recursion, None, &mut out);
    Ok(out)
}

/// Oracle hierarchically grouped weights.
///
/// Leaf effects come from [`oracle_group_effects`]; `W_i` combines the
/// effects of every leaf containing `i`. Without overlap this is just the
/// effect of `i`'s leaf.
pub fn oracle_hier_weights(tree: &HierTree, truth: &TruthAssignment) -> Result<WeightVector> {
    oracle_hier_weights_with(tree, truth, EffectRecursion::ParentReciprocal)
}

pub fn oracle_hier_weights_with(
    tree: &HierTree,
    truth: &TruthAssignment,
    recursion: EffectRecursion,
) -> Result<WeightVector> {
    let n = tree.n();
    check_truth(truth, n)?;
    let pi0 = truth.pi0();
    if tree.depth() == 0 || pi0 <= 0.0 || pi0 >= 1.0 {
        return Ok(WeightVector::constant(pi0, n));
    }
    let effects = oracle_group_effects(tree, truth, recursion)?;
    let nodes = tree.nodes();
    let mut leaves: Vec<&[usize]> = Vec::new();
    let mut leaf_effects = Vec::new();
    let mut null_mass = Vec::new();
    for (node, eff) in nodes.iter().zip(&effects) {
        if node.is_leaf() {
            leaves.push(node.members());
            leaf_effects.push(eff.effect);
            null_mass.push(stats_of(node.members(), truth).n0 as f64);
        }
    }
    Ok(WeightVector(assemble_overlapping(
        n,
        &leaves,
        &leaf_effects,
        &null_mass,
    )))
}

fn require_sway(forest: &ClassificationForest) -> Result<()> {
    for (s, tree) in forest.trees().iter().enumerate() {
        if tree.depth() != 1 || !tree.is_partition() {
            return Err(Error::InvalidClassification(format!(
                "S-way weights need depth-1 non-overlapping classifications (tree {s})"
            )));
        }
    }
    if forest.trees().is_empty() {
        return Err(Error::InvalidClassification("forest has no trees".into()));
    }
    Ok(())
}

/// `1/W_i = (1/S) sum_s 1/W_i(s)`.
fn harmonic_combine(n: usize, per_tree: &[Vec<f64>]) -> WeightVector {
    let s = per_tree.len() as f64;
    WeightVector(
        (0..n)
            .map(|i| recip(compensated_sum(per_tree.iter().map(|w| recip(w[i]))) / s))
            .collect(),
    )
}

/// Oracle S-way grouped weights over `S` one-level partitions.
pub fn oracle_sway_weights(
    forest: &ClassificationForest,
    truth: &TruthAssignment,
) -> Result<WeightVector> {
    let n = forest.n();
    check_truth(truth, n)?;
    require_sway(forest)?;
    let pi0 = truth.pi0();
    if pi0 <= 0.0 || pi0 >= 1.0 {
        return Ok(WeightVector::constant(pi0, n));
    }
    let per_tree: Vec<Vec<f64>> = forest
        .trees()
        .iter()
        .map(|tree| {
            let mut w = vec![f64::NAN; n];
            for g in tree.root().children() {
                let pi = stats_of(g.members(), truth).pi0;
                let effect = if pi >= 1.0 {
                    f64::INFINITY
                } else {
                    (1.0 - pi0) * odds(pi)
                };
                for &i in g.members() {
                    w[i] = effect;
                }
            }
            w
        })
        .collect();
    Ok(harmonic_combine(n, &per_tree))
}

/// Oracle generalized grouped weights: harmonic mean over trees of the
/// per-tree hierarchical weights.
pub fn oracle_gen_weights(
    forest: &ClassificationForest,
    truth: &TruthAssignment,
) -> Result<WeightVector> {
    let n = forest.n();
    check_truth(truth, n)?;
    if forest.trees().is_empty() {
        return Err(Error::InvalidClassification("forest has no trees".into()));
    }
    let per_tree = forest
        .trees()
        .iter()
        .map(|t| oracle_hier_weights(t, truth).map(WeightVector::into_inner))
        .collect::<Result<Vec<_>>>()?;
    Ok(harmonic_combine(n, &per_tree))
}

/// Storey-type null count estimate for one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullCountEstimate {
    pub lambda: f64,
    pub n: usize,
    pub r_lambda: usize,
    pub n_hat0: f64,
}

impl NullCountEstimate {
    fn from_counts(n: usize, r_lambda: usize, lambda: f64) -> Self {
        Self {
            lambda,
            n,
            r_lambda,
            n_hat0: (n - r_lambda + 1) as f64 / (1.0 - lambda),
        }
    }
}

fn count_at_most(members: &[usize], p: &[f64], lambda: f64) -> usize {
    members.iter().filter(|&&i| p[i] <= lambda).count()
}

/// `n_hat0 = (n - R(lambda) + 1) / (1 - lambda)`, `R(lambda) = #{P_i <= lambda}`.
pub fn storey_null_estimate(pvalues: &[f64], lambda: f64) -> Result<NullCountEstimate> {
    check_lambda(lambda)?;
    let r = pvalues.iter().filter(|&&p| p <= lambda).count();
    Ok(NullCountEstimate::from_counts(pvalues.len(), r, lambda))
}

/// Adaptive BH weight `(N - R_N(lambda) + 1) / (N (1 - lambda))` for every p-value.
pub fn adaptive_flat_weights(pvalues: &[f64], lambda: f64) -> Result<WeightVector> {
    check_pvalues(pvalues)?;
    let n = pvalues.len();
    let est = storey_null_estimate(pvalues, lambda)?;
    Ok(WeightVector::constant(est.n_hat0 / n as f64, n))
}

/// How internal-node null counts are estimated for the adaptive hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AncestorEstimate {
    /// Each node's own p-values through the Storey formula.
    #[default]
    Direct,
    /// Along each leaf's lineage, `n_hat0(parent) = m_l * n_hat0(child)`
    /// starting from the leaf's own estimate.
    Lineage,
}

impl std::str::FromStr for AncestorEstimate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(Self::Direct),
            "lineage" => Ok(Self::Lineage),
            other => Err(format!(
                "unknown ancestor estimate '{other}' (direct|lineage)"
            )),
        }
    }
}

/// Tuning for the data-adaptive weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveOptions {
    pub lambda: f64,
    pub ancestors: AncestorEstimate,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            ancestors: AncestorEstimate::Direct,
        }
    }
}

impl AdaptiveOptions {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }
}

/// Estimated effect of one leaf group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafEffect {
    pub path: Vec<usize>,
    pub n_hat0: f64,
    pub effect: f64,
}

/// Estimated leaf effects of `tree` in [`HierTree::leaves`] order.
///
/// `w_0 = pi_hat0` (flat Storey), `w_{g1} = n_hat0(g1) m_1 / N` and, for
/// deeper levels, `w_l = w_{l-2} * n_hat0(node) / n_hat0(parent) * m_l` with
/// `m_l` the number of children of the parent.
pub fn adaptive_leaf_effects(
    tree: &HierTree,
    pvalues: &[f64],
    opts: AdaptiveOptions,
) -> Result<Vec<LeafEffect>> {
    check_lambda(opts.lambda)?;
    let n = tree.n();
    if pvalues.len() != n {
        return Err(Error::LengthMismatch {
            what: "p-values",
            expected: n,
            got: pvalues.len(),
        });
    }
    check_pvalues(pvalues)?;
    let lambda = opts.lambda;
    let estimate = |node: &GroupNode| {
        NullCountEstimate::from_counts(
            node.len(),
            count_at_most(node.members(), pvalues, lambda),
            lambda,
        )
        .n_hat0
    };
    let pi_hat0 = estimate(tree.root()) / n as f64;
    let mut out = Vec::new();

    // lineage[k] = (node, n_hat0 of node, number of children of node)
    fn descend<'a>(
        node: &'a GroupNode,
        lineage: &mut Vec<&'a GroupNode>,
        f: &mut impl FnMut(&[&'a GroupNode]),
    ) {
        lineage.push(node);
        if node.is_leaf() {
            f(lineage);
        } else {
            for c in node.children() {
                descend(c, lineage, f);
            }
        }
        lineage.pop();
    }

    let mut lineage = Vec::new();
    descend(tree.root(), &mut lineage, &mut |chain: &[&GroupNode]| {
        let depth = chain.len() - 1;
        let leaf = chain[depth];
        let leaf_n0 = estimate(leaf);
        if depth == 0 {
            out.push(LeafEffect {
                path: Vec::new(),
                n_hat0: leaf_n0,
                effect: pi_hat0,
            });
            return;
        }
        // n_hat0 for levels 1..=depth along this lineage
        let mut n_hat = vec![0.0; depth + 1];
        match opts.ancestors {
            AncestorEstimate::Direct => {
                for (l, node) in chain.iter().enumerate().skip(1) {
                    n_hat[l] = estimate(node);
                }
            }
            AncestorEstimate::Lineage => {
                n_hat[depth] = leaf_n0;
                for l in (1..depth).rev() {
                    n_hat[l] = chain[l].children().len() as f64 * n_hat[l + 1];
                }
            }
        }
        // effects w[0..=depth] along the lineage
        let mut w = vec![0.0; depth + 1];
        w[0] = pi_hat0;
        w[1] = n_hat[1] * chain[0].children().len() as f64 / n as f64;
        for l in 2..=depth {
            let m_l = chain[l - 1].children().len() as f64;
            w[l] = w[l - 2] * n_hat[l] / n_hat[l - 1] * m_l;
        }
        out.push(LeafEffect {
            path: leaf.path().to_vec(),
            n_hat0: leaf_n0,
            effect: w[depth],
        });
    });
    Ok(out)
}

/// Data-adaptive hierarchically grouped weights.
pub fn da_hier_weights(
    tree: &HierTree,
    pvalues: &[f64],
    opts: AdaptiveOptions,
) -> Result<WeightVector> {
    if tree.depth() == 0 {
        check_lambda(opts.lambda)?;
        if pvalues.len() != tree.n() {
            return Err(Error::LengthMismatch {
                what: "p-values",
                expected: tree.n(),
                got: pvalues.len(),
            });
        }
        return adaptive_flat_weights(pvalues, opts.lambda);
    }
    let effects = adaptive_leaf_effects(tree, pvalues, opts)?;
    let leaves: Vec<&[usize]> = tree.leaves().into_iter().map(|l| l.members()).collect();
    let eff: Vec<f64> = effects.iter().map(|e| e.effect).collect();
    let mass: Vec<f64> = effects.iter().map(|e| e.n_hat0).collect();
    Ok(WeightVector(assemble_overlapping(
        tree.n(),
        &leaves,
        &eff,
        &mass,
    )))
}

/// Data-adaptive S-way grouped weights over `S` one-level partitions.
///
/// `w_{g_s} = (n_{g_s} - R_{g_s}(lambda) + 1) / (N (1 - lambda)) * M_s` and the
/// cell weight is the harmonic mean over the `S` classifications.
pub fn da_sway_weights(
    forest: &ClassificationForest,
    pvalues: &[f64],
    lambda: f64,
) -> Result<WeightVector> {
    check_lambda(lambda)?;
    let n = forest.n();
    if pvalues.len() != n {
        return Err(Error::LengthMismatch {
            what: "p-values",
            expected: n,
            got: pvalues.len(),
        });
    }
    check_pvalues(pvalues)?;
    require_sway(forest)?;
    let per_tree: Vec<Vec<f64>> = forest
        .trees()
        .iter()
        .map(|tree| {
            let groups = tree.root().children();
            let m_s = groups.len() as f64;
            let mut w = vec![f64::NAN; n];
            for g in groups {
                let r = count_at_most(g.members(), pvalues, lambda);
                let effect = (g.len() - r + 1) as f64 / (n as f64 * (1.0 - lambda)) * m_s;
                for &i in g.members() {
                    w[i] = effect;
                }
            }
            w
        })
        .collect();
    Ok(harmonic_combine(n, &per_tree))
}

/// Data-adaptive generalized grouped weights: harmonic mean over trees of
/// the per-tree adaptive hierarchical weights.
pub fn da_gen_weights(
    forest: &ClassificationForest,
    pvalues: &[f64],
    opts: AdaptiveOptions,
) -> Result<WeightVector> {
    if forest.trees().is_empty() {
        return Err(Error::InvalidClassification("forest has no trees".into()));
    }
    let per_tree = forest
        .trees()
        .iter()
        .map(|t| da_hier_weights(t, pvalues, opts).map(WeightVector::into_inner))
        .collect::<Result<Vec<_>>>()?;
    Ok(harmonic_combine(forest.n(), &per_tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::GroupNode;

    fn truth_from_nulls(n: usize, nulls: &[usize]) -> TruthAssignment {
        let mut v = vec![false; n];
        for &i in nulls {
            v[i] = true;
        }
        TruthAssignment::new(v)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn flat_oracle() {
        let truth = truth_from_nulls(25, &(0..15).collect::<Vec<_>>());
        let w = oracle_flat_weights(&truth, 25).unwrap();
        assert!(w.as_slice().iter().all(|&x| x == 0.6));

        let all = TruthAssignment::new(vec![true; 7]);
        assert!(oracle_flat_weights(&all, 7)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&x| x == 1.0));

        let truth = truth_from_nulls(10, &[0, 1, 2, 3, 4, 5]);
        let w = oracle_flat_weights(&truth, 10).unwrap();
        assert!((w.null_inverse_sum(&truth) - 10.0).abs() < 1e-12);
        assert!(oracle_flat_weights(&truth, 11).is_err());
    }

    /// Two disjoint level-1 groups: (n=4, pi=1/2) and (n=6, pi=2/3).
    fn ten_hypotheses() -> (HierTree, TruthAssignment) {
        let tree = HierTree::one_level(10, [(0..4).collect(), (4..10).collect()]);
        let truth = truth_from_nulls(10, &[0, 1, 4, 5, 6, 7]);
        (tree, truth)
    }

    #[test]
    fn hier_one_level_hand_example() {
        let (tree, truth) = ten_hypotheses();
        let w = oracle_hier_weights(&tree, &truth).unwrap();
        for i in 0..4 {
            assert!(close(w[i], 0.4, 1e-12), "{}", w[i]);
        }
        for i in 4..10 {
            assert!(close(w[i], 0.8, 1e-12), "{}", w[i]);
        }
        assert!((w.null_inverse_sum(&truth) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn hier_depth_zero_is_flat() {
        let truth = truth_from_nulls(25, &(0..15).collect::<Vec<_>>());
        let w = oracle_hier_weights(&HierTree::flat(25), &truth).unwrap();
        assert_eq!(w, oracle_flat_weights(&truth, 25).unwrap());
    }

    #[test]
    fn overlap_single_group_collapses_to_flat() {
        let truth = truth_from_nulls(8, &[0, 2, 3, 7, 5]);
        for wg in [0.3, 1.0, 17.0] {
            let w = oracle_overlap_oneway_weights(8, &[(0..8).collect()], &[wg], &truth).unwrap();
            for &x in w.as_slice() {
                assert!(close(x, 5.0 / 8.0, 1e-14));
            }
        }
    }

    #[test]
    fn overlap_matches_hier_for_disjoint_groups() {
        let (tree, truth) = ten_hypotheses();
        let pi0 = truth.pi0();
        let groups: Vec<Vec<usize>> = vec![(0..4).collect(), (4..10).collect()];
        let gw: Vec<f64> = groups
            .iter()
            .map(|g| {
                let p = stats_of(g, &truth).pi0;
                p * (1.0 - pi0) / (1.0 - p)
            })
            .collect();
        let a = oracle_overlap_oneway_weights(10, &groups, &gw, &truth).unwrap();
        let b = oracle_hier_weights(&tree, &truth).unwrap();
        for i in 0..10 {
            assert!(close(a[i], b[i], 1e-12));
        }
    }

    #[test]
    fn overlap_rejects_bad_inputs() {
        let truth = truth_from_nulls(4, &[0]);
        let err = oracle_overlap_oneway_weights(4, &[vec![0, 1, 2]], &[1.0], &truth).unwrap_err();
        assert!(matches!(err, Error::Uncovered(3)));
        let err =
            oracle_overlap_oneway_weights(4, &[vec![0, 1, 2, 3]], &[0.0], &truth).unwrap_err();
        assert!(matches!(err, Error::InvalidGroupWeight { .. }));
        let err = oracle_overlap_oneway_weights(4, &[vec![0, 1, 2, 3]], &[f64::INFINITY], &truth)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidGroupWeight { .. }));
    }

    #[test]
    fn sway_two_by_three_hand_example() {
        // cells (r, c) -> 3 r + c, nulls at (1,3), (2,1), (2,2) in 1-based labels
        let rows = HierTree::one_level(6, [vec![0, 1, 2], vec![3, 4, 5]]);
        let cols = HierTree::one_level(6, [vec![0, 3], vec![1, 4], vec![2, 5]]);
        let forest = ClassificationForest::new(6, vec![rows, cols]);
        let truth = truth_from_nulls(6, &[2, 3, 4]);
        let w = oracle_sway_weights(&forest, &truth).unwrap();
        assert!(close(w[2], 1.0 / 3.0, 1e-12));
        assert!(close(w[3], 2.0 / 3.0, 1e-12));
        assert!(close(w[4], 2.0 / 3.0, 1e-12));
        assert!((w.null_inverse_sum(&truth) - 6.0).abs() < 1e-12);
        // generalized path over the same depth-1 partitions agrees
        let g = oracle_gen_weights(&forest, &truth).unwrap();
        for i in 0..6 {
            assert!(close(w[i], g[i], 1e-12));
        }
    }

    #[test]
    fn sway_equal_marginals_give_equal_weights() {
        let rows = HierTree::one_level(4, [vec![0, 1], vec![2, 3]]);
        let cols = HierTree::one_level(4, [vec![0, 2], vec![1, 3]]);
        let forest = ClassificationForest::new(4, vec![rows, cols]);
        let truth = truth_from_nulls(4, &[0, 3]);
        let w = oracle_sway_weights(&forest, &truth).unwrap();
        assert!(w.as_slice().iter().all(|&x| close(x, w[0], 1e-15)));
    }

    #[test]
    fn sway_single_classification_is_one_level_hier() {
        let (tree, truth) = ten_hypotheses();
        let forest = ClassificationForest::single(tree.clone());
        let a = oracle_sway_weights(&forest, &truth).unwrap();
        let b = oracle_hier_weights(&tree, &truth).unwrap();
        for i in 0..10 {
            assert!(close(a[i], b[i], 1e-12));
        }
    }

    #[test]
    fn sway_rejects_overlap_and_depth() {
        let truth = truth_from_nulls(25, &[0]);
        let tree = HierTree::one_level(25, [(0..15).collect(), (10..25).collect()]);
        assert!(oracle_sway_weights(&ClassificationForest::single(tree), &truth).is_err());
        let flat = ClassificationForest::single(HierTree::flat(25));
        assert!(oracle_sway_weights(&flat, &truth).is_err());
    }

    #[test]
    fn gen_single_and_duplicated_tree() {
        let mut root = GroupNode::root(12);
        let a = root.push_child(0..7);
        a.push_child(0..4);
        a.push_child(3..7);
        let b = root.push_child(5..12);
        b.push_child(5..9);
        b.push_child(9..12);
        let tree = HierTree::new(root);
        let truth = truth_from_nulls(12, &[0, 1, 4, 6, 8, 9, 10]);
        let hier = oracle_hier_weights(&tree, &truth).unwrap();
        let one = oracle_gen_weights(&ClassificationForest::single(tree.clone()), &truth).unwrap();
        let two = oracle_gen_weights(
            &ClassificationForest::new(12, vec![tree.clone(), tree]),
            &truth,
        )
        .unwrap();
        for i in 0..12 {
            assert!(close(hier[i], one[i], 1e-15));
            assert!(close(hier[i], two[i], 1e-14));
        }
        assert!((hier.null_inverse_sum(&truth) - 12.0).abs() < 1e-11);
    }

    #[test]
    fn recursions_agree_on_three_levels() {
        let mut root = GroupNode::root(16);
        for block in 0..2 {
            let b = root.push_child(block * 8..block * 8 + 8);
            for half in 0..2 {
                let lo = block * 8 + half * 4;
                let h = b.push_child(lo..lo + 4);
                h.push_child(lo..lo + 2);
                h.push_child(lo + 2..lo + 4);
            }
        }
        let tree = HierTree::new(root);
        let truth = truth_from_nulls(16, &[0, 2, 3, 4, 6, 8, 9, 11, 12, 13, 15]);
        let a = oracle_group_effects(&tree, &truth, EffectRecursion::ParentReciprocal).unwrap();
        let b = oracle_group_effects(&tree, &truth, EffectRecursion::Grandparent).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.path, y.path);
            if x.effect.is_finite() && x.effect > 0.0 {
                assert!(close(x.effect, y.effect, 1e-12), "{x:?} vs {y:?}");
            } else {
                assert_eq!(x.effect, y.effect);
            }
        }
    }

    #[test]
    fn degenerate_groups_use_extended_reals() {
        // group 1 all null, group 2 all signal, group 3 mixed
        let tree = HierTree::one_level(9, [vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
        let truth = truth_from_nulls(9, &[0, 1, 2, 6]);
        let w = oracle_hier_weights(&tree, &truth).unwrap();
        assert!(w.as_slice()[..3].iter().all(|x| x.is_infinite()));
        assert!(w.as_slice()[3..6].iter().all(|&x| x == 0.0));
        assert!(w.as_slice()[6..].iter().all(|x| x.is_finite() && *x > 0.0));
        assert!(w.as_slice().iter().all(|x| !x.is_nan()));

        let none = TruthAssignment::new(vec![false; 9]);
        assert!(oracle_hier_weights(&tree, &none)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&x| x == 0.0));
        let all = TruthAssignment::new(vec![true; 9]);
        assert!(oracle_hier_weights(&tree, &all)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&x| x == 1.0));
    }

    #[test]
    fn storey_estimates() {
        let est = storey_null_estimate(&[0.01, 0.2, 0.6, 0.8], 0.5).unwrap();
        assert_eq!(est.r_lambda, 2);
        assert_eq!(est.n_hat0, 6.0);

        let est = storey_null_estimate(&[0.1, 0.2, 0.3], 0.5).unwrap();
        assert_eq!(est.n_hat0, 2.0);

        assert!(storey_null_estimate(&[0.1], 0.0).is_err());
        assert!(storey_null_estimate(&[0.1], 1.0).is_err());
    }

    #[test]
    fn adaptive_flat_worked_value() {
        let mut p = vec![0.1; 19];
        p.extend([0.7; 6]);
        let w = adaptive_flat_weights(&p, 0.5).unwrap();
        assert!(w.as_slice().iter().all(|&x| x == 0.56));
        let dh = da_hier_weights(&HierTree::flat(25), &p, AdaptiveOptions::default()).unwrap();
        assert_eq!(w, dh);
    }

    #[test]
    fn da_hier_one_level_hand_example() {
        let (tree, _) = ten_hypotheses();
        // group 1: R = 2 of 4; group 2: R = 3 of 6
        let p = [0.01, 0.2, 0.6, 0.8, 0.1, 0.3, 0.4, 0.7, 0.9, 0.55];
        let effects = adaptive_leaf_effects(&tree, &p, AdaptiveOptions::default()).unwrap();
        assert_eq!(effects[0].n_hat0, 6.0);
        assert_eq!(effects[1].n_hat0, 8.0);
        assert!(close(effects[0].effect, 1.2, 1e-15));
        assert!(close(effects[1].effect, 1.6, 1e-15));
        let w = da_hier_weights(&tree, &p, AdaptiveOptions::default()).unwrap();
        for i in 0..4 {
            assert!(close(w[i], 1.2, 1e-12));
        }
        for i in 4..10 {
            assert!(close(w[i], 1.6, 1e-12));
        }
    }

    #[test]
    fn da_sway_marginal_effect() {
        let rows = HierTree::one_level(4, [vec![0, 1], vec![2, 3]]);
        let cols = HierTree::one_level(4, [vec![0, 2], vec![1, 3]]);
        let p = [0.01, 0.9, 0.6, 0.7];
        let rows_only = ClassificationForest::single(rows.clone());
        let w = da_sway_weights(&rows_only, &p, 0.5).unwrap();
        assert!(close(w[0], 2.0, 1e-15));
        assert!(close(w[1], 2.0, 1e-15));
        let forest = ClassificationForest::new(4, vec![rows, cols]);
        let w = da_sway_weights(&forest, &p, 0.5).unwrap();
        // row1 = 2, row2 = 3, col1 = 2, col2 = 3 (R = 0 in col2)
        assert!(close(w[0], 2.0, 1e-15));
        assert!(close(w[3], 3.0, 1e-15));
        assert!(close(w[1], 2.4, 1e-15));
    }

    #[test]
    fn da_gen_single_tree_equals_hier() {
        let (tree, _) = ten_hypotheses();
        let p = [0.01, 0.2, 0.6, 0.8, 0.1, 0.3, 0.4, 0.7, 0.9, 0.55];
        let a = da_hier_weights(&tree, &p, AdaptiveOptions::default()).unwrap();
        let b = da_gen_weights(
            &ClassificationForest::single(tree),
            &p,
            AdaptiveOptions::default(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lineage_mode_collapses_depth_two_effects() {
        let mut root = GroupNode::root(8);
        root.push_child(0..4).push_child(0..4);
        let b = root.push_child(4..8);
        b.push_child(4..6);
        b.push_child(6..8);
        let tree = HierTree::new(root);
        let p = [0.1, 0.2, 0.9, 0.8, 0.3, 0.6, 0.7, 0.05];
        let opts = AdaptiveOptions {
            lambda: 0.5,
            ancestors: AncestorEstimate::Lineage,
        };
        let pi_hat = storey_null_estimate(&p, 0.5).unwrap().n_hat0 / 8.0;
        for e in adaptive_leaf_effects(&tree, &p, opts).unwrap() {
            assert!(close(e.effect, pi_hat, 1e-15));
        }
    }

    #[test]
    fn adaptive_rejects_bad_pvalues() {
        let tree = HierTree::one_level(3, [vec![0, 1, 2]]);
        let err = da_hier_weights(&tree, &[0.1, 1.2, 0.3], AdaptiveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidPValue { index: 1, .. }));
        assert!(da_hier_weights(&tree, &[0.1, 0.3], AdaptiveOptions::default()).is_err());
        assert!(adaptive_flat_weights(&[f64::NAN], 0.5).is_err());
    }
}
