//! Executable checks of the identities behind the FDR guarantees.
//!
//! Each check yields an [`IdentityReport`]. [`run_sweep`] evaluates every
//! identity on randomly generated configurations; each trial draws from its
//! own ChaCha8 stream so a failing record can be regenerated from the seed
//! and trial number.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classification::{stats_of, ClassificationForest, GroupNode, HierTree, TruthAssignment};
use crate::error::Result;
use crate::numeric::{compensated_sum, recip};
use crate::testing::{weighted_bh, weighted_bh_bruteforce};
use crate::weights::{
    adaptive_flat_weights, da_gen_weights, da_hier_weights, da_sway_weights, oracle_flat_weights,
    oracle_gen_weights, oracle_group_effects, oracle_hier_weights, oracle_overlap_oneway_weights,
    oracle_sway_weights, AdaptiveOptions, AncestorEstimate, EffectRecursion, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|computed - target| <= tolerance`
    Equal,
    /// `computed <= target + tolerance`
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub trial: usize,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

impl IdentityReport {
    fn make(
        identity: &str,
        computed: f64,
        target: f64,
        tolerance: f64,
        relation: Relation,
    ) -> Self {
        let pass = match relation {
            Relation::Equal => (computed - target).abs() <= tolerance,
            Relation::AtMost => computed <= target + tolerance,
        };
        Self {
            identity: identity.to_string(),
            trial: 0,
            computed,
            target,
            tolerance,
            relation,
            pass,
            digest: None,
        }
    }

    pub fn equal(identity: &str, computed: f64, target: f64, tolerance: f64) -> Self {
        Self::make(identity, computed, target, tolerance, Relation::Equal)
    }

    pub fn at_most(identity: &str, computed: f64, target: f64, tolerance: f64) -> Self {
        Self::make(identity, computed, target, tolerance, Relation::AtMost)
    }
}

/// Relative tolerance for closed-form comparisons.
pub const FORMULA_RTOL: f64 = 1e-12;
/// Condition 1 tolerance, as a multiple of `N`.
pub const CONDITION1_RTOL: f64 = 1e-9;

/// `sum_{i in I0} 1/W_i` against `N`.
pub fn check_condition1(weights: &WeightVector, truth: &TruthAssignment) -> IdentityReport {
    let n = weights.len() as f64;
    IdentityReport::equal(
        "condition1",
        weights.null_inverse_sum(truth),
        n,
        CONDITION1_RTOL * n,
    )
}

/// Weight map from p-values, as used by the adaptive checks.
pub type WeightFn<'a> = dyn Fn(&[f64]) -> Result<WeightVector> + Sync + 'a;

/// `sum_{i in I0} 1(P_i > lambda) / (1 - lambda) * 1 / W_i(P^(-i), 0)`, the
/// quantity bounded by `N` in the adaptive FDR argument. `W(P^(-i), 0)` is
/// obtained by re-running `weight_fn` with `P_i` replaced by 0; terms with
/// `P_i <= lambda` vanish.
pub fn loo_statistic(
    weight_fn: &WeightFn<'_>,
    pvalues: &[f64],
    truth: &TruthAssignment,
    lambda: f64,
) -> Result<f64> {
    truth.check_len(pvalues.len())?;
    let mut terms = Vec::new();
    let mut p = pvalues.to_vec();
    for i in 0..p.len() {
        if !truth.is_null(i) || pvalues[i] <= lambda {
            continue;
        }
        p[i] = 0.0;
        let w = weight_fn(&p)?;
        p[i] = pvalues[i];
        terms.push(recip(w[i]) / (1.0 - lambda));
    }
    Ok(compensated_sum(terms))
}

pub fn check_loo_bound(
    weight_fn: &WeightFn<'_>,
    pvalues: &[f64],
    truth: &TruthAssignment,
    lambda: f64,
) -> Result<IdentityReport> {
    let n = pvalues.len() as f64;
    Ok(IdentityReport::at_most(
        "loo_bound",
        loo_statistic(weight_fn, pvalues, truth, lambda)?,
        n,
        CONDITION1_RTOL * n,
    ))
}

/// Closed form of [`loo_statistic`] for the adaptive weights of a one-level
/// partition: `sum_g (n0_g - V_g) / (n_g - R_g) * N / m_1`, where `V_g`
/// counts nulls at or below `lambda`.
pub fn loo_closed_form_one_level(
    tree: &HierTree,
    pvalues: &[f64],
    truth: &TruthAssignment,
    lambda: f64,
) -> f64 {
    let n = tree.n() as f64;
    let groups = tree.root().children();
    let m1 = groups.len() as f64;
    compensated_sum(groups.iter().map(|g| {
        let r = g
            .members()
            .iter()
            .filter(|&&i| pvalues[i] <= lambda)
            .count();
        let above_nulls = g
            .members()
            .iter()
            .filter(|&&i| truth.is_null(i) && pvalues[i] > lambda)
            .count();
        if above_nulls == 0 {
            0.0
        } else {
            above_nulls as f64 / (g.len() - r) as f64 * n / m1
        }
    }))
}

/// Weights that decrease by more than this relative amount count as a
/// monotonicity violation.
pub const MONOTONE_RTOL: f64 = 1e-12;

/// Draw `trials` upward perturbations of single p-values and count those
/// after which some weight decreases. Half the perturbations of a p-value at
/// or below `lambda` push it above `lambda`.
pub fn check_monotone<R: Rng + ?Sized>(
    weight_fn: &WeightFn<'_>,
    pvalues: &[f64],
    lambda: f64,
    trials: usize,
    rng: &mut R,
) -> Result<IdentityReport> {
    let base = weight_fn(pvalues)?;
    let mut p = pvalues.to_vec();
    let mut violations = 0usize;
    for _ in 0..trials {
        let j = rng.random_range(0..p.len());
        let old = p[j];
        let u: f64 = rng.random();
        let new = if old <= lambda && rng.random_bool(0.5) {
            lambda + (1.0 - lambda) * (1.0 - u)
        } else {
            old + (1.0 - old) * (1.0 - u)
        };
        p[j] = new.min(1.0);
        let w = weight_fn(&p)?;
        p[j] = old;
        if monotone_violated(&base, &w) {
            violations += 1;
        }
    }
    Ok(IdentityReport::equal(
        "monotone",
        violations as f64,
        0.0,
        0.0,
    ))
}

/// Some entry of `after` lies below the matching entry of `before`.
pub fn monotone_violated(before: &WeightVector, after: &WeightVector) -> bool {
    before
        .as_slice()
        .iter()
        .zip(after.as_slice())
        .any(|(&b, &a)| a < b * (1.0 - MONOTONE_RTOL))
}

/// Depth 0 gives the oracle BH weight `pi0` exactly.
pub fn check_reduction_depth0(truth: &TruthAssignment) -> Result<IdentityReport> {
    let n = truth.len();
    let hier = oracle_hier_weights(&HierTree::flat(n), truth)?;
    let flat = oracle_flat_weights(truth, n)?;
    let mismatches = hier
        .as_slice()
        .iter()
        .zip(flat.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(IdentityReport::equal(
        "reduction_depth0",
        mismatches as f64,
        0.0,
        0.0,
    ))
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / x.abs().max(y.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// A one-level partition gives `W_i = (1 - pi0) pi0_g / (1 - pi0_g)`.
pub fn check_reduction_one_level(
    tree: &HierTree,
    truth: &TruthAssignment,
) -> Result<IdentityReport> {
    let w = oracle_hier_weights(tree, truth)?;
    let pi0 = truth.pi0();
    let mut expected = vec![f64::NAN; tree.n()];
    for g in tree.root().children() {
        let pg = stats_of(g.members(), truth).pi0;
        let v = if pg >= 1.0 {
            f64::INFINITY
        } else {
            (1.0 - pi0) * pg / (1.0 - pg)
        };
        for &i in g.members() {
            expected[i] = v;
        }
    }
    Ok(IdentityReport::equal(
        "reduction_one_level",
        max_rel_diff(w.as_slice(), &expected),
        0.0,
        FORMULA_RTOL,
    ))
}

/// A single-tree generalized classification gives the hierarchical weights.
pub fn check_reduction_single_tree(
    tree: &HierTree,
    truth: &TruthAssignment,
) -> Result<IdentityReport> {
    let a = oracle_hier_weights(tree, truth)?;
    let b = oracle_gen_weights(&ClassificationForest::single(tree.clone()), truth)?;
    Ok(IdentityReport::equal(
        "reduction_single_tree",
        max_rel_diff(a.as_slice(), b.as_slice()),
        0.0,
        FORMULA_RTOL,
    ))
}

/// The parent-reciprocal and grandparent recursions give the same effects.
pub fn check_reduction_recursions(
    tree: &HierTree,
    truth: &TruthAssignment,
) -> Result<IdentityReport> {
    let a: Vec<f64> = oracle_group_effects(tree, truth, EffectRecursion::ParentReciprocal)?
        .into_iter()
        .map(|e| e.effect)
        .collect();
    let b: Vec<f64> = oracle_group_effects(tree, truth, EffectRecursion::Grandparent)?
        .into_iter()
        .map(|e| e.effect)
        .collect();
    Ok(IdentityReport::equal(
        "reduction_recursions",
        max_rel_diff(&a, &b),
        0.0,
        FORMULA_RTOL,
    ))
}

/// All four reductions on a depth-1 partition `one_level` and any `tree`.
pub fn check_reductions(
    truth: &TruthAssignment,
    one_level: &HierTree,
    tree: &HierTree,
) -> Result<Vec<IdentityReport>> {
    Ok(vec![
        check_reduction_depth0(truth)?,
        check_reduction_one_level(one_level, truth)?,
        check_reduction_single_tree(tree, truth)?,
        check_reduction_recursions(tree, truth)?,
    ])
}

/// Step-up against the quadratic reference; `computed` counts disagreements.
pub fn check_stepup(pvalues: &[f64], weights: &WeightVector, alpha: f64) -> Result<IdentityReport> {
    let fast = weighted_bh(pvalues, weights, alpha)?.rejected;
    let slow = weighted_bh_bruteforce(pvalues, weights, alpha);
    let diff = fast.iter().zip(&slow).filter(|(a, b)| a != b).count();
    Ok(IdentityReport::equal(
        "stepup_bruteforce",
        diff as f64,
        0.0,
        0.0,
    ))
}

/// Classification structure of a random configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Flat,
    OverlapOneway,
    Hierarchical,
    Sway,
    Generalized,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Flat,
        Variant::OverlapOneway,
        Variant::Hierarchical,
        Variant::Sway,
        Variant::Generalized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Flat => "flat",
            Variant::OverlapOneway => "overlap_oneway",
            Variant::Hierarchical => "hierarchical",
            Variant::Sway => "sway",
            Variant::Generalized => "generalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorBounds {
    pub n_min: usize,
    pub n_max: usize,
    pub max_depth: usize,
    pub max_trees: usize,
    pub max_overlap: f64,
    /// Every group's null proportion is kept in `[margin, 1 - margin]` when
    /// a draw allows it.
    pub margin: f64,
}

impl Default for GeneratorBounds {
    fn default() -> Self {
        Self {
            n_min: 10,
            n_max: 500,
            max_depth: 3,
            max_trees: 3,
            max_overlap: 0.3,
            margin: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub variant: Variant,
    pub forest: ClassificationForest,
    pub truth: TruthAssignment,
    pub pvalues: Vec<f64>,
    /// Arbitrary positive group effects for [`Variant::OverlapOneway`].
    pub group_weights: Vec<f64>,
    /// Every group has a null proportion inside the margin.
    pub nondegenerate: bool,
}

impl RandomConfig {
    pub fn n(&self) -> usize {
        self.forest.n()
    }

    pub fn oracle_weights(&self) -> Result<WeightVector> {
        match self.variant {
            Variant::Flat => oracle_flat_weights(&self.truth, self.n()),
            Variant::OverlapOneway => {
                let groups: Vec<Vec<usize>> = self.forest.trees()[0]
                    .root()
                    .children()
                    .iter()
                    .map(|g| g.members().to_vec())
                    .collect();
                oracle_overlap_oneway_weights(self.n(), &groups, &self.group_weights, &self.truth)
            }
            Variant::Hierarchical => oracle_hier_weights(&self.forest.trees()[0], &self.truth),
            Variant::Sway => oracle_sway_weights(&self.forest, &self.truth),
            Variant::Generalized => oracle_gen_weights(&self.forest, &self.truth),
        }
    }

    /// Data-adaptive weights of the same structure.
    pub fn adaptive_weights(&self, pvalues: &[f64], opts: AdaptiveOptions) -> Result<WeightVector> {
        match self.variant {
            Variant::Flat => adaptive_flat_weights(pvalues, opts.lambda),
            Variant::OverlapOneway | Variant::Hierarchical => {
                da_hier_weights(&self.forest.trees()[0], pvalues, opts)
            }
            Variant::Sway => da_sway_weights(&self.forest, pvalues, opts.lambda),
            Variant::Generalized => da_gen_weights(&self.forest, pvalues, opts),
        }
    }

    /// Short hash of the structure, truth and p-values.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.variant.name().as_bytes());
        h.update((self.n() as u64).to_le_bytes());
        for tree in self.forest.trees() {
            for node in tree.nodes() {
                for &k in node.path() {
                    h.update((k as u64).to_le_bytes());
                }
                h.update(b"|");
                for &i in node.members() {
                    h.update((i as u64).to_le_bytes());
                }
                h.update(b";");
            }
        }
        for &t in self.truth.as_slice() {
            h.update([t as u8]);
        }
        for &p in &self.pvalues {
            h.update(p.to_bits().to_le_bytes());
        }
        for &w in &self.group_weights {
            h.update(w.to_bits().to_le_bytes());
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

const MIN_GROUP: usize = 3;

/// Split `members` (in the given order) into up to four consecutive runs,
/// each extended into the next by up to `max_overlap` of its length, and
/// recurse `levels` times.
fn split_node<R: Rng + ?Sized>(
    node: &mut GroupNode,
    members: &[usize],
    levels: usize,
    max_overlap: f64,
    rng: &mut R,
) {
    if levels == 0 {
        return;
    }
    let s = members.len();
    let k = rng.random_range(1..=(s / MIN_GROUP).clamp(1, 4));
    let mut bounds = vec![0];
    for j in 1..k {
        let lo = bounds[j - 1] + MIN_GROUP;
        let hi = s - (k - j) * MIN_GROUP;
        bounds.push(rng.random_range(lo..=hi));
    }
    bounds.push(s);
    for j in 0..k {
        let (start, end) = (bounds[j], bounds[j + 1]);
        let extend = if j + 1 < k && max_overlap > 0.0 {
            let frac = rng.random_range(0.0..=max_overlap);
            ((end - start) as f64 * frac).floor() as usize
        } else {
            0
        };
        let chunk = &members[start..(end + extend).min(s)];
        let child = node.push_child(chunk.iter().copied());
        split_node(child, chunk, levels - 1, max_overlap, rng);
    }
}

/// Random tree of exactly `depth` levels over a random ordering of `0..n`.
pub fn random_tree<R: Rng + ?Sized>(
    n: usize,
    depth: usize,
    max_overlap: f64,
    rng: &mut R,
) -> HierTree {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut root = GroupNode::root(n);
    split_node(&mut root, &order, depth, max_overlap, rng);
    HierTree::new(root)
}

fn within_margin(forest: &ClassificationForest, truth: &TruthAssignment, margin: f64) -> bool {
    let ok = |members: &[usize]| {
        let pi = stats_of(members, truth).pi0;
        pi >= margin && pi <= 1.0 - margin
    };
    forest
        .trees()
        .iter()
        .all(|t| t.nodes().iter().all(|g| ok(g.members())))
}

fn random_forest<R: Rng + ?Sized>(
    variant: Variant,
    n: usize,
    b: &GeneratorBounds,
    rng: &mut R,
) -> ClassificationForest {
    match variant {
        Variant::Flat => ClassificationForest::single(HierTree::flat(n)),
        Variant::OverlapOneway => {
            ClassificationForest::single(random_tree(n, 1, b.max_overlap, rng))
        }
        Variant::Hierarchical => {
            let depth = rng.random_range(1..=b.max_depth.max(1));
            ClassificationForest::single(random_tree(n, depth, b.max_overlap, rng))
        }
        Variant::Sway => {
            let s = rng.random_range(1..=b.max_trees.max(1));
            let trees = (0..s).map(|_| random_tree(n, 1, 0.0, rng)).collect();
            ClassificationForest::new(n, trees)
        }
        Variant::Generalized => {
            let s = rng.random_range(1..=b.max_trees.max(1));
            let trees = (0..s)
                .map(|_| {
                    let depth = rng.random_range(0..=b.max_depth);
                    random_tree(n, depth, b.max_overlap, rng)
                })
                .collect();
            ClassificationForest::new(n, trees)
        }
    }
}

/// Random configuration of the given variant. Null p-values are uniform,
/// non-null ones are `U^4`.
pub fn random_config<R: Rng + ?Sized>(
    variant: Variant,
    b: &GeneratorBounds,
    rng: &mut R,
) -> RandomConfig {
    let n = rng.random_range(b.n_min..=b.n_max);
    let forest = random_forest(variant, n, b, rng);
    let mut truth = TruthAssignment::new(vec![true; n]);
    let mut nondegenerate = false;
    for _ in 0..200 {
        let pi: f64 = rng.random_range(0.2..0.8);
        truth = TruthAssignment::new((0..n).map(|_| rng.random_bool(pi)).collect());
        if within_margin(&forest, &truth, b.margin) {
            nondegenerate = true;
            break;
        }
    }
    let pvalues = (0..n)
        .map(|i| {
            let u: f64 = rng.random();
            if truth.is_null(i) {
                u
            } else {
                u.powi(4)
            }
        })
        .collect();
    let group_weights = match variant {
        Variant::OverlapOneway => forest.trees()[0]
            .root()
            .children()
            .iter()
            .map(|_| rng.random_range(0.2..5.0))
            .collect(),
        _ => Vec::new(),
    };
    RandomConfig {
        variant,
        forest,
        truth,
        pvalues,
        group_weights,
        nondegenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub trials: usize,
    pub seed: u64,
    pub lambda: f64,
    pub alpha: f64,
    pub ancestors: AncestorEstimate,
    /// Upward perturbations per trial and adaptive variant.
    pub perturbations: usize,
    pub bounds: GeneratorBounds,
    /// Damage one oracle weight per trial so that Condition 1 must fail.
    pub corrupt: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 7,
            lambda: 0.5,
            alpha: 0.05,
            ancestors: AncestorEstimate::Direct,
            perturbations: 20,
            bounds: GeneratorBounds::default(),
            corrupt: false,
        }
    }
}

/// Identities evaluated once per sweep trial, in record order.
pub const SWEEP_IDENTITIES: [&str; 18] = [
    "condition1_flat",
    "condition1_overlap_oneway",
    "condition1_hierarchical",
    "condition1_sway",
    "condition1_generalized",
    "loo_bound_flat",
    "loo_bound_hierarchical",
    "loo_bound_sway",
    "loo_bound_generalized",
    "monotone_flat",
    "monotone_hierarchical",
    "monotone_sway",
    "monotone_generalized",
    "reduction_depth0",
    "reduction_one_level",
    "reduction_single_tree",
    "reduction_recursions",
    "stepup_bruteforce",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<IdentityReport>,
}

/// Pass count per identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityTally {
    pub identity: String,
    pub checked: usize,
    pub passed: usize,
    pub worst: f64,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityReport> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn tally(&self) -> Vec<IdentityTally> {
        let mut out: Vec<IdentityTally> = Vec::new();
        for r in &self.records {
            let slack = match r.relation {
                Relation::Equal => (r.computed - r.target).abs(),
                Relation::AtMost => r.computed - r.target,
            };
            match out.iter_mut().find(|t| t.identity == r.identity) {
                Some(t) => {
                    t.checked += 1;
                    t.passed += r.pass as usize;
                    t.worst = t.worst.max(slack);
                }
                None => out.push(IdentityTally {
                    identity: r.identity.clone(),
                    checked: 1,
                    passed: r.pass as usize,
                    worst: slack,
                }),
            }
        }
        out
    }
}

fn corrupt_weights(w: WeightVector, truth: &TruthAssignment) -> WeightVector {
    let mut v = w.into_inner();
    if let Some(i) = (0..v.len()).find(|&i| truth.is_null(i) && v[i].is_finite() && v[i] > 0.0) {
        v[i] *= 2.0;
    }
    WeightVector::new(v)
}

fn trial_records(cfg: &SweepConfig, trial: usize) -> Result<Vec<IdentityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let b = &cfg.bounds;
    let configs: Vec<RandomConfig> = Variant::ALL
        .iter()
        .map(|&v| random_config(v, b, &mut rng))
        .collect();
    let opts = AdaptiveOptions {
        lambda: cfg.lambda,
        ancestors: cfg.ancestors,
    };
    let mut out = Vec::with_capacity(SWEEP_IDENTITIES.len());
    let mut push = |name: &str, mut rep: IdentityReport, c: &RandomConfig| {
        rep.identity = name.to_string();
        rep.trial = trial;
        if !rep.pass {
            rep.digest = Some(format!(
                "seed={} trial={} variant={} n={} sha={}",
                cfg.seed,
                trial,
                c.variant.name(),
                c.n(),
                c.digest()
            ));
        }
        out.push(rep);
    };

    for c in &configs {
        let mut w = c.oracle_weights()?;
        if cfg.corrupt {
            w = corrupt_weights(w, &c.truth);
        }
        push(
            &format!("condition1_{}", c.variant.name()),
            check_condition1(&w, &c.truth),
            c,
        );
    }
    let adaptive: Vec<&RandomConfig> = configs
        .iter()
        .filter(|c| c.variant != Variant::OverlapOneway)
        .collect();
    for c in &adaptive {
        let f = |p: &[f64]| c.adaptive_weights(p, opts);
        let rep = check_loo_bound(&f, &c.pvalues, &c.truth, cfg.lambda)?;
        push(&format!("loo_bound_{}", c.variant.name()), rep, c);
    }
    for c in &adaptive {
        let f = |p: &[f64]| c.adaptive_weights(p, opts);
        let rep = check_monotone(&f, &c.pvalues, cfg.lambda, cfg.perturbations, &mut rng)?;
        push(&format!("monotone_{}", c.variant.name()), rep, c);
    }

    let hier = &configs[2];
    let one_level = &configs[1];
    // the one-level identity needs a non-degenerate partition; pair a fresh
    // one with the overlap draw's truth
    let mut partition = random_tree(one_level.n(), 1, 0.0, &mut rng);
    for _ in 0..200 {
        let f = ClassificationForest::single(partition.clone());
        if within_margin(&f, &one_level.truth, b.margin) {
            break;
        }
        partition = random_tree(one_level.n(), 1, 0.0, &mut rng);
    }
    let tree = &hier.forest.trees()[0];
    push(
        "reduction_depth0",
        check_reduction_depth0(&hier.truth)?,
        hier,
    );
    push(
        "reduction_one_level",
        check_reduction_one_level(&partition, &one_level.truth)?,
        one_level,
    );
    push(
        "reduction_single_tree",
        check_reduction_single_tree(tree, &hier.truth)?,
        hier,
    );
    push(
        "reduction_recursions",
        check_reduction_recursions(tree, &hier.truth)?,
        hier,
    );

    // Mixed weights, including 0 and +inf, on the hierarchical draw.
    let mut w = hier.oracle_weights()?.into_inner();
    for x in w.iter_mut() {
        match rng.random_range(0..20) {
            0 => *x = 0.0,
            1 => *x = f64::INFINITY,
            2 => *x = rng.random_range(0.01..10.0),
            _ => {}
        }
    }
    push(
        "stepup_bruteforce",
        check_stepup(&hier.pvalues, &WeightVector::new(w), cfg.alpha)?,
        hier,
    );
    Ok(out)
}

/// Run every identity in [`SWEEP_IDENTITIES`] on `cfg.trials` random trials.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if !(cfg.lambda > 0.0 && cfg.lambda < 1.0) {
        return Err(crate::Error::InvalidLambda(cfg.lambda));
    }
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_records(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        config: cfg.clone(),
        records: per_trial.into_iter().flatten().collect(),
    })
}
