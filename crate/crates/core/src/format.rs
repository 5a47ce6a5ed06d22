//! Text formats: classification JSON, p-value lists and truth labels.
//!
//! A classification file looks like
//!
//! ```json
//! {"n": 10, "trees": [{"levels": [
//!   [{"path": [1], "members": [[0, 4]]}, {"path": [2], "members": [[4, 10]]}]
//! ]}]}
//! ```
//!
//! `levels[k]` lists the groups at depth `k + 1`; the root covering `0..n` is
//! implicit. Paths are 1-based positions among siblings, so `[2, 3]` is the
//! third child of the second level-1 group. A `members` entry is either one
//! index or a half-open `[start, end)` pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classification::{
    validate_forest, ClassificationForest, GroupNode, HierTree, TruthAssignment,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestSpec {
    pub n: usize,
    pub trees: Vec<TreeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub levels: Vec<Vec<GroupSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub path: Vec<usize>,
    pub members: Vec<MemberSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemberSpec {
    Index(usize),
    Range([usize; 2]),
}

/// Sorted indices as single entries and `[start, end)` runs of length > 2.
pub fn compress_members(members: &[usize]) -> Vec<MemberSpec> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < members.len() {
        let start = members[k];
        let mut end = k + 1;
        while end < members.len() && members[end] == members[end - 1] + 1 {
            end += 1;
        }
        let len = end - k;
        if len > 2 {
            out.push(MemberSpec::Range([start, start + len]));
        } else {
            out.extend(members[k..end].iter().map(|&i| MemberSpec::Index(i)));
        }
        k = end;
    }
    out
}

pub fn expand_members(spec: &[MemberSpec]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for m in spec {
        match *m {
            MemberSpec::Index(i) => out.push(i),
            MemberSpec::Range([a, b]) if a <= b => out.extend(a..b),
            MemberSpec::Range([a, b]) => {
                return Err(Error::InvalidClassification(format!(
                    "empty or reversed range [{a}, {b})"
                )))
            }
        }
    }
    Ok(out)
}

impl ForestSpec {
    /// Canonical description of `forest`.
    pub fn from_forest(forest: &ClassificationForest) -> Self {
        let trees = forest
            .trees()
            .iter()
            .map(|t| {
                let mut levels: Vec<Vec<GroupSpec>> = vec![Vec::new(); t.depth()];
                for node in t.nodes().into_iter().skip(1) {
                    levels[node.level() - 1].push(GroupSpec {
                        path: node.path().to_vec(),
                        members: compress_members(node.members()),
                    });
                }
                TreeSpec { levels }
            })
            .collect();
        ForestSpec {
            n: forest.n(),
            trees,
        }
    }

    /// Build the forest without structural validation.
    pub fn to_forest_unchecked(&self) -> Result<ClassificationForest> {
        let trees = self
            .trees
            .iter()
            .enumerate()
            .map(|(s, t)| build_tree(self.n, s, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassificationForest::new(self.n, trees))
    }

    /// Build and validate.
    pub fn to_forest(&self) -> Result<ClassificationForest> {
        let forest = self.to_forest_unchecked()?;
        validate_forest(&forest).into_result()?;
        Ok(forest)
    }
}

fn build_tree(n: usize, s: usize, spec: &TreeSpec) -> Result<HierTree> {
    let mut by_parent: BTreeMap<Vec<usize>, Vec<GroupNode>> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for (k, level) in spec.levels.iter().enumerate() {
        for g in level {
            if g.path.len() != k + 1 {
                return Err(Error::InvalidClassification(format!(
                    "tree {s}: path {:?} listed at level {}",
                    g.path,
                    k + 1
                )));
            }
            if !seen.insert(g.path.clone()) {
                return Err(Error::InvalidClassification(format!(
                    "tree {s}: duplicate path {:?}",
                    g.path
                )));
            }
            let node = GroupNode::new(g.path.clone(), expand_members(&g.members)?);
            by_parent
                .entry(g.path[..k].to_vec())
                .or_default()
                .push(node);
        }
    }
    fn attach(node: &mut GroupNode, by_parent: &mut BTreeMap<Vec<usize>, Vec<GroupNode>>) {
        if let Some(children) = by_parent.remove(node.path()) {
            for mut c in children {
                attach(&mut c, by_parent);
                node.push_node(c);
            }
        }
    }
    let mut root = GroupNode::root(n);
    attach(&mut root, &mut by_parent);
    if let Some((parent, _)) = by_parent.into_iter().next() {
        return Err(Error::InvalidClassification(format!(
            "tree {s}: groups under missing parent {parent:?}"
        )));
    }
    Ok(HierTree::new(root))
}

pub fn forest_to_json(forest: &ClassificationForest) -> Result<String> {
    Ok(serde_json::to_string(&ForestSpec::from_forest(forest))?)
}

pub fn forest_from_json(text: &str) -> Result<ClassificationForest> {
    serde_json::from_str::<ForestSpec>(text)?.to_forest()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn bad_line(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}: {msg}"))
}

/// Parse `(index, value)` records: either one value per line, or
/// `index,value` with an optional header line. Indices must be `0..N` once
/// each.
fn parse_indexed(text: &str) -> Result<Vec<(usize, String)>> {
    let mut rows = Vec::new();
    for (pos, (line, l)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        match fields.as_slice() {
            [v] => rows.push((None, line, v.to_string())),
            [i, v] => match i.parse::<usize>() {
                Ok(i) => rows.push((Some(i), line, v.to_string())),
                Err(_) if pos == 0 => continue,
                Err(_) => return Err(bad_line(line, format!("bad index '{i}'"))),
            },
            _ => return Err(bad_line(line, "expected 'value' or 'index,value'")),
        }
    }
    let indexed = rows.iter().filter(|r| r.0.is_some()).count();
    if indexed != 0 && indexed != rows.len() {
        return Err(Error::InvalidInput("mixed plain and indexed lines".into()));
    }
    if indexed == 0 {
        return Ok(rows
            .into_iter()
            .enumerate()
            .map(|(k, (_, _, v))| (k, v))
            .collect());
    }
    let n = rows.len();
    let mut out: Vec<Option<String>> = vec![None; n];
    for (i, line, v) in rows {
        let i = i.unwrap();
        if i >= n {
            return Err(bad_line(
                line,
                format!("index {i} out of range for {n} records"),
            ));
        }
        if out[i].replace(v).is_some() {
            return Err(bad_line(line, format!("duplicate index {i}")));
        }
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(k, v)| (k, v.unwrap()))
        .collect())
}

/// P-values, one per line or as `index,p`. Values must lie in `[0, 1]`.
pub fn parse_pvalues(text: &str) -> Result<Vec<f64>> {
    parse_indexed(text)?
        .into_iter()
        .map(|(index, v)| {
            let value: f64 = v.parse().map_err(|_| {
                Error::InvalidInput(format!("record {index}: '{v}' is not a number"))
            })?;
            if (0.0..=1.0).contains(&value) {
                Ok(value)
            } else {
                Err(Error::InvalidPValue { index, value })
            }
        })
        .collect()
}

/// Truth labels, same layout as p-values; `1`/`true`/`null` mark a true
/// null, `0`/`false`/`signal` a false one.
pub fn parse_truth(text: &str) -> Result<TruthAssignment> {
    let labels = parse_indexed(text)?
        .into_iter()
        .map(|(index, v)| match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "null" => Ok(true),
            "0" | "false" | "signal" => Ok(false),
            _ => Err(Error::InvalidInput(format!(
                "record {index}: bad truth label '{v}'"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruthAssignment::new(labels))
}
