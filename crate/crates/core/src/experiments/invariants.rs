//! Structural checks run on every replicate.

use crate::coalescent::{stats_from_flips, CoalescentTrace, SelectionRecord};
use crate::error::Error;
use crate::seed::{stream_seed, DOMAIN_MODEL};
use crate::tree::{TreeTopology, Vertex};

/// Degree sum, optional increasing property, and for every pair of
/// `tracked` vertices `dist = h(i) + h(j) - 2 h(lca) <= h(i) + h(j)`.
pub fn check_tree(tree: &TreeTopology, tracked: &[Vertex], increasing: bool) -> Result<(), String> {
    let n = tree.n();
    let degree_sum: u64 = tree.in_degrees().iter().map(|&d| d as u64).sum();
    if degree_sum != n as u64 - 1 {
        return Err(format!("degree sum {degree_sum} != n - 1 = {}", n - 1));
    }
    if increasing && !tree.is_increasing() {
        return Err("tree is not increasing".into());
    }
    let depth = |v| tree.depth(v).map_err(|e| e.to_string());
    for (a, &u) in tracked.iter().enumerate() {
        for &v in &tracked[a + 1..] {
            let dist = tree.distance(u, v).map_err(|e| e.to_string())?;
            let lca = tree.lca(u, v).map_err(|e| e.to_string())?;
            let (hu, hv, hl) = (depth(u)?, depth(v)?, depth(lca)?);
            if dist + 2 * hl != hu + hv {
                return Err(format!(
                    "dist({u}, {v}) = {dist} but depths give {}",
                    hu + hv - 2 * hl
                ));
            }
            if dist > hu + hv {
                return Err(format!(
                    "dist({u}, {v}) = {dist} exceeds depth sum {}",
                    hu + hv
                ));
            }
        }
    }
    Ok(())
}

/// Tree checks on the final tree, the relabelled tree being increasing and
/// coin-flip statistics agreeing with the tree for every tracked vertex.
pub fn check_trace(trace: &CoalescentTrace, record: &SelectionRecord) -> Result<(), String> {
    let k = record.tracked();
    let tracked: Vec<Vertex> = (1..=k as Vertex).collect();
    check_tree(trace.final_tree(), &tracked, false)?;
    let mut seen = vec![false; trace.n() + 1];
    for v in 1..=trace.n() as Vertex {
        let l = trace.label(v) as usize;
        if l == 0 || l > trace.n() || std::mem::replace(&mut seen[l], true) {
            return Err(format!("labels are not a bijection at vertex {v}"));
        }
    }
    if !trace.relabelled_tree().is_increasing() {
        return Err("relabelled tree is not increasing".into());
    }
    for i in 1..=k {
        let flips = stats_from_flips(record, i).map_err(|e| e.to_string())?;
        let tree = trace.tree_stats(i as Vertex).map_err(|e| e.to_string())?;
        if flips != tree {
            return Err(format!(
                "vertex {i}: flips give {flips:?}, tree gives {tree:?}"
            ));
        }
    }
    Ok(())
}

pub(crate) fn violation(seed: u64, replicate: u64, message: String) -> Error {
    Error::InvariantViolation {
        replicate,
        stream_seed: stream_seed(seed, DOMAIN_MODEL, replicate),
        message,
    }
}
