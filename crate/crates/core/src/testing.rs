//! The weighted Benjamini-Hochberg step-up.

use serde::Serialize;

use crate::classification::TruthAssignment;
use crate::error::{Error, Result};
use crate::weights::{check_pvalues, WeightVector};

/// Result of one weighted BH run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub alpha: f64,
    /// Largest `k` with `P^W_(k) <= k alpha / N`, 0 if none.
    pub threshold_index: usize,
    pub weighted: Vec<f64>,
    pub rejected: Vec<bool>,
}

impl TestOutcome {
    pub fn rejections(&self) -> usize {
        self.threshold_index
    }

    pub fn rejected_indices(&self) -> Vec<usize> {
        self.rejected
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
            .collect()
    }

    /// Cutoff applied to the weighted p-values, `k alpha / N`.
    pub fn cutoff(&self) -> f64 {
        step_cutoff(self.threshold_index, self.alpha, self.weighted.len())
    }
}

#[inline]
pub(crate) fn step_cutoff(j: usize, alpha: f64, n: usize) -> f64 {
    j as f64 * alpha / n as f64
}

/// `W_i * P_i`, with `inf * 0 = inf` so that infinite weights never reject.
pub fn weighted_pvalues(pvalues: &[f64], weights: &WeightVector) -> Vec<f64> {
    pvalues
        .iter()
        .zip(weights.as_slice())
        .map(|(&p, &w)| {
            if w.is_infinite() {
                f64::INFINITY
            } else {
                w * p
            }
        })
        .collect()
}

/// Weighted BH at level `alpha`. Weighted p-values are not clipped at 1.
pub fn weighted_bh(pvalues: &[f64], weights: &WeightVector, alpha: f64) -> Result<TestOutcome> {
    let n = pvalues.len();
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: n,
            got: weights.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    check_pvalues(pvalues)?;
    if let Some((index, &w)) = weights
        .as_slice()
        .iter()
        .enumerate()
        .find(|(_, w)| w.is_nan() || **w < 0.0)
    {
        return Err(Error::InvalidGroupWeight {
            group: index,
            value: w,
        });
    }

    let weighted = weighted_pvalues(pvalues, weights);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weighted[a].total_cmp(&weighted[b]).then(a.cmp(&b)));

    let k = (1..=n)
        .rev()
        .find(|&j| weighted[order[j - 1]] <= step_cutoff(j, alpha, n))
        .unwrap_or(0);
    let mut rejected = vec![false; n];
    for &i in &order[..k] {
        rejected[i] = true;
    }
    Ok(TestOutcome {
        alpha,
        threshold_index: k,
        weighted,
        rejected,
    })
}

/// Quadratic-time reference for [`weighted_bh`]: for each `j` count the
/// weighted p-values at or below `j alpha / N`, take the largest `j` whose
/// count reaches `j`, reject everything at or below that cutoff.
pub fn weighted_bh_bruteforce(pvalues: &[f64], weights: &WeightVector, alpha: f64) -> Vec<bool> {
    let n = pvalues.len();
    let wp = weighted_pvalues(pvalues, weights);
    let mut k = 0;
    for j in 1..=n {
        let cut = step_cutoff(j, alpha, n);
        if wp.iter().filter(|&&v| v <= cut).count() >= j {
            k = j;
        }
    }
    let cut = step_cutoff(k, alpha, n);
    wp.iter().map(|&v| k > 0 && v <= cut).collect()
}

/// Realised error and power of one outcome against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeMetrics {
    pub rejections: usize,
    pub false_rejections: usize,
    pub fdp: f64,
    pub power: f64,
}

pub fn outcome_metrics(outcome: &TestOutcome, truth: &TruthAssignment) -> Result<OutcomeMetrics> {
    truth.check_len(outcome.rejected.len())?;
    let mut r = 0;
    let mut v = 0;
    for (&rej, &null) in outcome.rejected.iter().zip(truth.as_slice()) {
        if rej {
            r += 1;
            if null {
                v += 1;
            }
        }
    }
    let signals = truth.len() - truth.null_count();
    Ok(OutcomeMetrics {
        rejections: r,
        false_rejections: v,
        fdp: v as f64 / r.max(1) as f64,
        power: if signals == 0 {
            0.0
        } else {
            (r - v) as f64 / signals as f64
        },
    })
}
