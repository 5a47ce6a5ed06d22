//! Named procedures: a weighting scheme followed by the weighted BH.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classification::{ClassificationForest, TruthAssignment};
use crate::error::{Error, Result};
use crate::testing::{weighted_bh, TestOutcome};
use crate::weights::{
    adaptive_flat_weights, da_gen_weights, da_hier_weights, da_sway_weights, oracle_flat_weights,
    oracle_gen_weights, oracle_hier_weights, oracle_sway_weights, AdaptiveOptions, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Unweighted BH.
    Bh,
    /// BH with `W_i = pi0`.
    OracleBh,
    /// BH with the flat Storey weight.
    AdaptiveBh,
    HeirGbh,
    DaheirGbh,
    SwayGbh,
    DaSwayGbh,
    GenGbh,
    DaGenGbh,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Bh,
        Method::OracleBh,
        Method::AdaptiveBh,
        Method::HeirGbh,
        Method::DaheirGbh,
        Method::SwayGbh,
        Method::DaSwayGbh,
        Method::GenGbh,
        Method::DaGenGbh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bh => "bh",
            Method::OracleBh => "oracle-bh",
            Method::AdaptiveBh => "adaptive-bh",
            Method::HeirGbh => "heir-gbh",
            Method::DaheirGbh => "daheir-gbh",
            Method::SwayGbh => "sway-gbh",
            Method::DaSwayGbh => "da-sway-gbh",
            Method::GenGbh => "gen-gbh",
            Method::DaGenGbh => "da-gen-gbh",
        }
    }

    /// Needs the true null/non-null labels.
    pub fn is_oracle(self) -> bool {
        matches!(
            self,
            Method::OracleBh | Method::HeirGbh | Method::SwayGbh | Method::GenGbh
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown method '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

fn single_tree(forest: &ClassificationForest, method: Method) -> Result<&crate::HierTree> {
    match forest.trees() {
        [t] => Ok(t),
        _ => Err(Error::InvalidClassification(format!(
            "{method} needs exactly one classification tree, got {}",
            forest.s_count()
        ))),
    }
}

/// Weights for `method`. Oracle methods require `truth`.
pub fn compute_weights(
    method: Method,
    forest: &ClassificationForest,
    pvalues: &[f64],
    truth: Option<&TruthAssignment>,
    opts: AdaptiveOptions,
) -> Result<WeightVector> {
    let n = forest.n();
    if pvalues.len() != n {
        return Err(Error::LengthMismatch {
            what: "p-values",
            expected: n,
            got: pvalues.len(),
        });
    }
    let truth = || {
        truth.ok_or(Error::MissingInput {
            method: method.name(),
            what: "truth labels",
        })
    };
    match method {
        Method::Bh => Ok(WeightVector::constant(1.0, n)),
        Method::OracleBh => oracle_flat_weights(truth()?, n),
        Method::AdaptiveBh => adaptive_flat_weights(pvalues, opts.lambda),
        Method::HeirGbh => oracle_hier_weights(single_tree(forest, method)?, truth()?),
        Method::DaheirGbh => da_hier_weights(single_tree(forest, method)?, pvalues, opts),
        Method::SwayGbh => oracle_sway_weights(forest, truth()?),
        Method::DaSwayGbh => da_sway_weights(forest, pvalues, opts.lambda),
        Method::GenGbh => oracle_gen_weights(forest, truth()?),
        Method::DaGenGbh => da_gen_weights(forest, pvalues, opts),
    }
}

/// Weights and the weighted BH outcome for `method`.
pub fn run_method(
    method: Method,
    forest: &ClassificationForest,
    pvalues: &[f64],
    truth: Option<&TruthAssignment>,
    alpha: f64,
    opts: AdaptiveOptions,
) -> Result<(WeightVector, TestOutcome)> {
    let w = compute_weights(method, forest, pvalues, truth, opts)?;
    let out = weighted_bh(pvalues, &w, alpha)?;
    Ok((w, out))
}
