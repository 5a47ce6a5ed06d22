//! Monte Carlo comparison of BH-type procedures on a two-level overlapping
//! hierarchy of `m x n` hypotheses.
//!
//! Signals are placed by three Bernoulli layers: a cell layer with density
//! `1 - pi0`, a row-block layer (rows `0..25` and `30..50` with density
//! `1 - pi1`, the shared rows `25..30` with `1 - pi1_star`) and a row layer
//! with density `1 - pi2`. Statistics get Kronecker-structured correlation:
//! cells in the same row correlate at `rho_l2`, cells in the same column at
//! `rho_l1`.
//!
//! Every replicate draws from its own ChaCha8 stream, `(point << 32) | rep`,
//! under the master seed, so results do not depend on scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::classification::{ClassificationForest, GroupNode, HierTree, TruthAssignment};
use crate::error::{Error, Result};
use crate::numeric::normal_sf;
use crate::procedure::{run_method, Method};
use crate::testing::{outcome_metrics, OutcomeMetrics};
use crate::weights::{AdaptiveOptions, AncestorEstimate};

/// Rows of the first level-1 group, and where the second one starts.
const FIRST_BLOCK_END: usize = 25;
const SHARED_END: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationPlan {
    pub m: usize,
    pub n: usize,
    pub mu: f64,
    /// Values of `1 - pi0` to sweep.
    pub grid: Vec<f64>,
    pub pi1: f64,
    pub pi1_star: f64,
    pub pi2: f64,
    pub rho_l1: f64,
    pub rho_l2: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub ancestors: AncestorEstimate,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        Self {
            m: 50,
            n: 100,
            mu: 3.0,
            grid: even_grid(11),
            pi1: 0.5,
            pi1_star: 0.25,
            pi2: 0.5,
            rho_l1: 0.0,
            rho_l2: 0.0,
            lambda: 0.5,
            alpha: 0.05,
            replicates: 500,
            seed: 2024,
            methods: vec![
                Method::Bh,
                Method::OracleBh,
                Method::AdaptiveBh,
                Method::HeirGbh,
                Method::DaheirGbh,
            ],
            ancestors: AncestorEstimate::Direct,
        }
    }
}

/// `k` equispaced points on `[0, 1]`.
pub fn even_grid(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    }
}

impl SimulationPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if self.m != 50 || self.n == 0 {
            return bad(format!(
                "the layout needs 50 rows and at least one column, got {}x{}",
                self.m, self.n
            ));
        }
        for (name, v) in [
            ("pi1", self.pi1),
            ("pi1_star", self.pi1_star),
            ("pi2", self.pi2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if let Some(v) = self.grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad(format!("grid values must be in [0, 1], got {v}"));
        }
        if self.pi1_star > self.pi1 {
            return bad(format!(
                "pi1_star ({}) must not exceed pi1 ({})",
                self.pi1_star, self.pi1
            ));
        }
        for (name, v) in [("rho_l1", self.rho_l1), ("rho_l2", self.rho_l2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1), got {v}"));
            }
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !self.mu.is_finite() {
            return bad(format!("mu must be finite, got {}", self.mu));
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if let Some(m) = self
            .methods
            .iter()
            .find(|m| matches!(m, Method::SwayGbh | Method::DaSwayGbh))
        {
            return bad(format!(
                "{m} needs one-level partitions; the simulation tree overlaps"
            ));
        }
        Ok(())
    }

    fn total(&self) -> usize {
        self.m * self.n
    }
}

/// Signal layers, row-major `m x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredTheta {
    pub m: usize,
    pub n: usize,
    pub theta0: Vec<bool>,
    /// One draw per row block, broadcast over the block's rows and all columns.
    pub theta1: Vec<bool>,
    pub theta2: Vec<bool>,
    pub theta: Vec<bool>,
}

impl LayeredTheta {
    /// Null labels, `theta == 0`.
    pub fn truth(&self) -> TruthAssignment {
        TruthAssignment::from_signals(&self.theta)
    }

    /// Fraction of signal cells among `rows`.
    pub fn signal_fraction(&self, rows: std::ops::Range<usize>) -> f64 {
        let cells = &self.theta[rows.start * self.n..rows.end * self.n];
        cells.iter().filter(|&&t| t).count() as f64 / cells.len() as f64
    }
}

fn block_of(row: usize) -> usize {
    if row < FIRST_BLOCK_END {
        0
    } else if row < SHARED_END {
        1
    } else {
        2
    }
}

/// Draw the three signal layers for density `1 - pi0`.
pub fn generate_theta<R: Rng + ?Sized>(
    plan: &SimulationPlan,
    one_minus_pi0: f64,
    rng: &mut R,
) -> LayeredTheta {
    let (m, n) = (plan.m, plan.n);
    let theta0: Vec<bool> = (0..m * n).map(|_| rng.random_bool(one_minus_pi0)).collect();
    let blocks = [
        rng.random_bool(1.0 - plan.pi1),
        rng.random_bool(1.0 - plan.pi1_star),
        rng.random_bool(1.0 - plan.pi1),
    ];
    let rows: Vec<bool> = (0..m).map(|_| rng.random_bool(1.0 - plan.pi2)).collect();
    let mut theta1 = vec![false; m * n];
    let mut theta = vec![false; m * n];
    for r in 0..m {
        for c in 0..n {
            let k = r * n + c;
            theta1[k] = blocks[block_of(r)];
            theta[k] = theta0[k] && theta1[k] && rows[r];
        }
    }
    LayeredTheta {
        m,
        n,
        theta0,
        theta1,
        theta2: rows,
        theta,
    }
}

/// Coefficients of `Z_mn`, `Z_m 1^T`, `1 Z_n^T` and `Z_0` in the statistic.
pub fn correlation_coefficients(rho_l1: f64, rho_l2: f64) -> [f64; 4] {
    [
        ((1.0 - rho_l1) * (1.0 - rho_l2)).sqrt(),
        ((1.0 - rho_l1) * rho_l2).sqrt(),
        (rho_l1 * (1.0 - rho_l2)).sqrt(),
        (rho_l1 * rho_l2).sqrt(),
    ]
}

/// `X = mu Theta + a Z_mn + b Z_m 1^T + c 1 Z_n^T + d Z_0`, row-major.
pub fn generate_statistics<R: Rng + ?Sized>(
    theta: &[bool],
    m: usize,
    n: usize,
    rho_l1: f64,
    rho_l2: f64,
    mu: f64,
    rng: &mut R,
) -> Vec<f64> {
    let [a, b, c, d] = correlation_coefficients(rho_l1, rho_l2);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let z_mn: Vec<f64> = (0..m * n).map(|_| normal()).collect();
    let z_m: Vec<f64> = (0..m).map(|_| normal()).collect();
    let z_n: Vec<f64> = (0..n).map(|_| normal()).collect();
    let z_0 = normal();
    let mut x = Vec::with_capacity(m * n);
    for (r, &zr) in z_m.iter().enumerate() {
        for (col, &zc) in z_n.iter().enumerate() {
            let k = r * n + col;
            let signal = if theta[k] { mu } else { 0.0 };
            x.push(signal + a * z_mn[k] + b * zr + c * zc + d * z_0);
        }
    }
    x
}

/// One-sided p-values `1 - Phi(x)`.
pub fn pvalues_from_statistics(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| normal_sf(v)).collect()
}

/// Two level-1 groups over rows `0..30` and `25..50`, each split into its
/// rows at level 2. The five shared rows sit under both parents.
pub fn simulation_tree(plan: &SimulationPlan) -> HierTree {
    let n = plan.n;
    let mut root = GroupNode::root(plan.total());
    for rows in [0..SHARED_END, FIRST_BLOCK_END..plan.m] {
        let g = root.push_child(rows.start * n..rows.end * n);
        for r in rows {
            g.push_child(r * n..(r + 1) * n);
        }
    }
    HierTree::new(root)
}

/// One simulated data set.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub theta: LayeredTheta,
    pub pvalues: Vec<f64>,
}

/// Stream id of replicate `rep` at sweep point `point`.
pub fn stream_id(point: usize, rep: usize) -> u64 {
    ((point as u64) << 32) | rep as u64
}

pub fn replicate_rng(seed: u64, point: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(point, rep));
    rng
}

pub fn simulate_replicate(
    plan: &SimulationPlan,
    one_minus_pi0: f64,
    rng: &mut ChaCha8Rng,
) -> Replicate {
    let theta = generate_theta(plan, one_minus_pi0, rng);
    let x = generate_statistics(
        &theta.theta,
        plan.m,
        plan.n,
        plan.rho_l1,
        plan.rho_l2,
        plan.mu,
        rng,
    );
    Replicate {
        pvalues: pvalues_from_statistics(&x),
        theta,
    }
}

/// Aggregated performance of one method at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub one_minus_pi0: f64,
    pub lambda: f64,
    pub mean_fdp: f64,
    pub se_fdp: f64,
    pub mean_power: f64,
    pub se_power: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub plan: SimulationPlan,
    pub rows: Vec<SummaryRow>,
}

impl SimulationSummary {
    pub fn row(&self, method: Method, one_minus_pi0: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.one_minus_pi0 - one_minus_pi0).abs() < 1e-12)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &SummaryRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "method,one_minus_pi0,mean_fdp,se_fdp,mean_power,se_power,replicates,rho_L1,rho_L2,lambda,alpha,seed"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.method,
                r.one_minus_pi0,
                r.mean_fdp,
                r.se_fdp,
                r.mean_power,
                r.se_power,
                r.replicates,
                self.plan.rho_l1,
                self.plan.rho_l2,
                r.lambda,
                self.plan.alpha,
                self.plan.seed
            )?;
        }
        Ok(())
    }
}

/// Mean and standard error (sample SD over `sqrt(k)`).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

fn run_points(plan: &SimulationPlan, points: &[(f64, f64)]) -> Result<SimulationSummary> {
    plan.validate()?;
    let tree = simulation_tree(plan);
    let forest = ClassificationForest::single(tree);
    let mut rows = Vec::new();
    for (point, &(one_minus_pi0, lambda)) in points.iter().enumerate() {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        let opts = AdaptiveOptions {
            lambda,
            ancestors: plan.ancestors,
        };
        let per_rep: Vec<Vec<OutcomeMetrics>> = (0..plan.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replicate_rng(plan.seed, point, rep);
                let data = simulate_replicate(plan, one_minus_pi0, &mut rng);
                let truth = data.theta.truth();
                plan.methods
                    .iter()
                    .map(|&method| {
                        let (_, out) = run_method(
                            method,
                            &forest,
                            &data.pvalues,
                            Some(&truth),
                            plan.alpha,
                            opts,
                        )?;
                        outcome_metrics(&out, &truth)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, &method) in plan.methods.iter().enumerate() {
            let fdp: Vec<f64> = per_rep.iter().map(|r| r[k].fdp).collect();
            let power: Vec<f64> = per_rep.iter().map(|r| r[k].power).collect();
            let (mean_fdp, se_fdp) = mean_se(&fdp);
            let (mean_power, se_power) = mean_se(&power);
            rows.push(SummaryRow {
                method,
                one_minus_pi0,
                lambda,
                mean_fdp,
                se_fdp,
                mean_power,
                se_power,
                replicates: plan.replicates,
            });
        }
    }
    Ok(SimulationSummary {
        plan: plan.clone(),
        rows,
    })
}

/// Sweep the signal density over `plan.grid`.
pub fn run_study(plan: &SimulationPlan) -> Result<SimulationSummary> {
    let points: Vec<(f64, f64)> = plan.grid.iter().map(|&g| (g, plan.lambda)).collect();
    run_points(plan, &points)
}

/// Default tuning grid for the positively dependent adaptive study.
pub const PRDS_LAMBDAS: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

/// Plan for the positively dependent study: signals spread evenly
/// (`pi1 = pi1_star = pi2 = 0`), `pi0 = 0.3`, `rho = (0.3, 0.4)`.
pub fn prds_plan() -> SimulationPlan {
    SimulationPlan {
        grid: vec![0.7],
        pi1: 0.0,
        pi1_star: 0.0,
        pi2: 0.0,
        rho_l1: 0.3,
        rho_l2: 0.4,
        methods: vec![Method::AdaptiveBh, Method::DaheirGbh],
        ..SimulationPlan::default()
    }
}

/// Sweep the tuning parameter at each density in `plan.grid`.
pub fn run_lambda_study(plan: &SimulationPlan, lambdas: &[f64]) -> Result<SimulationSummary> {
    let points: Vec<(f64, f64)> = plan
        .grid
        .iter()
        .flat_map(|&g| lambdas.iter().map(move |&l| (g, l)))
        .collect();
    run_points(plan, &points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::validate_forest;

    #[test]
    fn tree_layout() {
        let plan = SimulationPlan::default();
        let tree = simulation_tree(&plan);
        assert_eq!(tree.n(), 5000);
        assert_eq!(tree.depth(), 2);
        let level1 = tree.root().children();
        assert_eq!((level1[0].len(), level1[1].len()), (3000, 2500));
        let shared = level1[0]
            .members()
            .iter()
            .filter(|&&i| level1[1].contains(i))
            .count();
        assert_eq!(shared, 500);
        let mut distinct: Vec<&[usize]> = tree.leaves().iter().map(|l| l.members()).collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 50);
        assert!(distinct.iter().all(|l| l.len() == 100));
        assert_eq!(level1[0].children().len(), 30);
        assert_eq!(level1[1].children().len(), 25);
        assert!(validate_forest(&ClassificationForest::single(tree)).is_ok());
    }

    #[test]
    fn degenerate_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = SimulationPlan::default();
        let t = generate_theta(&plan, 0.0, &mut rng);
        assert!(t.theta.iter().all(|&x| !x));
        let all = SimulationPlan {
            pi1: 0.0,
            pi1_star: 0.0,
            pi2: 0.0,
            ..plan
        };
        let t = generate_theta(&all, 1.0, &mut rng);
        assert!(t.theta.iter().all(|&x| x));
    }

    #[test]
    fn theta_is_layer_product() {
        let plan = SimulationPlan::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = generate_theta(&plan, 0.6, &mut rng);
        for r in 0..plan.m {
            for c in 0..plan.n {
                let k = r * plan.n + c;
                assert_eq!(t.theta[k], t.theta0[k] && t.theta1[k] && t.theta2[r]);
                assert_eq!(t.theta1[k], t.theta1[r * plan.n]);
            }
        }
        assert_eq!(t.theta1[0], t.theta1[24 * plan.n]);
        assert_eq!(t.theta1[30 * plan.n], t.theta1[49 * plan.n]);
    }

    #[test]
    fn variance_coefficients_square_to_one() {
        for (r1, r2) in [(0.0, 0.0), (0.3, 0.4), (0.9, 0.1), (0.5, 0.5)] {
            let s: f64 = correlation_coefficients(r1, r2).iter().map(|c| c * c).sum();
            assert!((s - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
        assert_eq!(correlation_coefficients(0.0, 0.0), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn pvalue_basics() {
        let p = pvalues_from_statistics(&[0.0, 40.0, 1.6449]);
        assert_eq!(p[0], 0.5);
        assert!(p[1] < 1e-300);
        assert!((p[2] - 0.05).abs() < 1e-4);
    }

    #[test]
    fn plan_validation() {
        assert!(SimulationPlan::default().validate().is_ok());
        let bad = SimulationPlan {
            pi1_star: 0.6,
            ..SimulationPlan::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimulationPlan {
            rho_l1: 1.0,
            ..SimulationPlan::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimulationPlan {
            methods: vec![Method::SwayGbh],
            ..SimulationPlan::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn small_study_is_deterministic() {
        let plan = SimulationPlan {
            replicates: 6,
            grid: vec![0.0, 0.5],
            ..SimulationPlan::default()
        };
        let a = run_study(&plan).unwrap();
        let b = run_study(&plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * plan.methods.len());
        for r in &a.rows {
            assert!((0.0..=1.0).contains(&r.mean_fdp));
            assert!((0.0..=1.0).contains(&r.mean_power));
        }
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + a.rows.len());
        assert!(text.starts_with("method,one_minus_pi0,"));
    }

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0_f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_se(&[0.3]), (0.3, 0.0));
    }
}
