//! Synthetic classification layouts.

use crate::classification::{ClassificationForest, GroupNode, HierTree};

pub const ELECTRODES: usize = 61;
pub const REGIONS: usize = 6;

/// Exclusive electrodes per region; neighbouring regions also share two.
const EXCLUSIVE: [usize; REGIONS] = [9, 9, 9, 8, 8, 8];
const SHARED: usize = 2;

/// Electrode ranges of the six scalp regions. Region `r` and `r + 1` share
/// two electrodes, so the regions form an overlapping chain.
pub fn region_electrodes() -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(REGIONS);
    let mut cursor = 0;
    for (r, &excl) in EXCLUSIVE.iter().enumerate() {
        let start = if r == 0 { 0 } else { cursor - SHARED };
        cursor += excl;
        if r + 1 < REGIONS {
            cursor += SHARED;
        }
        out.push(start..cursor);
    }
    debug_assert_eq!(cursor, ELECTRODES);
    out
}

/// Hypothesis index of electrode pair `(a, b)` at time `t`.
pub fn eeg_index(a: usize, b: usize, t: usize, times: usize) -> usize {
    (a * ELECTRODES + b) * times + t
}

/// Two-tree forest over `61 x 61 x times` electrode-pair hypotheses. Tree
/// `s` groups by the `s`-th electrode of the pair: regions at level 1,
/// single electrodes at level 2.
pub fn eeg_forest(times: usize) -> ClassificationForest {
    let n = ELECTRODES * ELECTRODES * times;
    let regions = region_electrodes();
    let trees = (0..2)
        .map(|s| {
            let cell = |e: usize, other: usize, t: usize| {
                if s == 0 {
                    eeg_index(e, other, t, times)
                } else {
                    eeg_index(other, e, t, times)
                }
            };
            let electrode_members = |e: usize| {
                (0..ELECTRODES).flat_map(move |o| (0..times).map(move |t| cell(e, o, t)))
            };
            let mut root = GroupNode::root(n);
            for range in &regions {
                let region = root.push_child(range.clone().flat_map(electrode_members));
                for e in range.clone() {
                    region.push_child(electrode_members(e));
                }
            }
            HierTree::new(root)
        })
        .collect();
    ClassificationForest::new(n, trees)
}
