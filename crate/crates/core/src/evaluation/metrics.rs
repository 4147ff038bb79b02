use std::collections::{BTreeSet, HashSet};

use crate::code_graph::NodeId;
use crate::error::{Error, Result};

fn check(gt: &BTreeSet<NodeId>, k: usize) -> Result<()> {
    if gt.is_empty() {
        return Err(Error::input("metrics need a non-empty ground-truth set"));
    }
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    Ok(())
}

fn hits(gt: &BTreeSet<NodeId>, retrieved: &[NodeId], k: usize) -> usize {
    retrieved
        .iter()
        .take(k)
        .filter(|id| gt.contains(*id))
        .collect::<HashSet<_>>()
        .len()
}

/// Fraction of the ground truth found in the first `k` retrieved ids.
pub fn recall_at_k(gt: &BTreeSet<NodeId>, retrieved: &[NodeId], k: usize) -> Result<f64> {
    check(gt, k)?;
    Ok(hits(gt, retrieved, k) as f64 / gt.len() as f64)
}

/// 1 when every ground-truth node is in the first `k`, else 0.
pub fn acc_at_k(gt: &BTreeSet<NodeId>, retrieved: &[NodeId], k: usize) -> Result<f64> {
    check(gt, k)?;
    Ok(if hits(gt, retrieved, k) == gt.len() {
        1.0
    } else {
        0.0
    })
}

/// Reciprocal rank of the first ground-truth hit within the first `k`.
pub fn mrr_at_k(gt: &BTreeSet<NodeId>, retrieved: &[NodeId], k: usize) -> Result<f64> {
    check(gt, k)?;
    Ok(retrieved
        .iter()
        .take(k)
        .position(|id| gt.contains(id))
        .map_or(0.0, |r| 1.0 / (r + 1) as f64))
}
