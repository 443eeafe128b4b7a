//! Degree, depth and distance of vertices with prescribed labels.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::invariants::{check_tree, violation};
use super::{column, reference_selftest, run_model, AggregateReport, ExperimentConfig};
use crate::error::{invalid, Result};
use crate::limits::{
    c_coefficient, fixed_label_degree, fixed_label_depth, fixed_label_distance, lattice_ks,
    lattice_normal_cdf, poisson_cdf, poisson_pmf, Estimate, RegimeSpec,
};
use crate::tree::{TreeTopology, Vertex, VertexStats};

/// Statistics of the labelled vertices in one tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedLabelSample {
    pub stats: Vec<VertexStats>,
    /// Pairs `(i, j), i < j`, lexicographic.
    pub distances: Vec<u32>,
}

/// Grows an RRT on `n` vertices, keeping the parent map only up to the
/// largest label and counting children of small vertices beyond it. The
/// draws are those of [`crate::tree::build_rrt`], so both see the same tree
/// for the same generator state. Returns the prefix tree and the sample.
pub fn fixed_label_stats<R: Rng + ?Sized>(
    n: usize,
    labels: &[Vertex],
    rng: &mut R,
) -> Result<(TreeTopology, FixedLabelSample)> {
    if labels.is_empty() {
        return invalid("need at least one label");
    }
    if let Some(&l) = labels.iter().find(|&&l| l == 0 || l as usize > n) {
        return invalid(format!("label {l} not in [1, {n}]"));
    }
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != labels.len() {
        return invalid("labels must be distinct");
    }
    let m = *sorted.last().expect("non-empty") as usize;
    let mut parents = Vec::with_capacity(m);
    parents.push(0);
    let mut children = vec![0u32; m + 1];
    for v in 2..=n as u32 {
        let p = rng.random_range(1..=v - 1);
        if (p as usize) <= m {
            children[p as usize] += 1;
        }
        if v as usize <= m {
            parents.push(p);
        }
    }
    let prefix = TreeTopology::from_parents(&parents)?;
    let stats = labels
        .iter()
        .map(|&l| {
            Ok(VertexStats {
                degree: children[l as usize],
                depth: prefix.depth(l)?,
                label: l,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut distances = Vec::new();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            distances.push(prefix.distance(a, b)?);
        }
    }
    Ok((prefix, FixedLabelSample { stats, distances }))
}

/// Fixed-label experiment over `cfg.labels` (`pow:0.5` when empty).
pub fn exp_fixed_label(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let specs = if cfg.labels.is_empty() {
        vec![super::LabelSpec::Pow(0.5)]
    } else {
        cfg.labels.clone()
    };
    let labels: Vec<u64> = specs.iter().map(|s| s.resolve(cfg.n)).collect();
    let regimes: Vec<RegimeSpec> = specs.iter().map(|s| s.regime(cfg.n)).collect();
    if let Some(&l) = labels.iter().find(|&&l| l < 2 || l > cfg.n) {
        return invalid(format!("label {l} not in [2, n]"));
    }
    let vertices: Vec<Vertex> = labels.iter().map(|&l| l as Vertex).collect();
    let samples = run_model(cfg, |r, rng| {
        let (prefix, s) = fixed_label_stats(cfg.n as usize, &vertices, rng)?;
        check_tree(&prefix, &vertices, true).map_err(|m| violation(cfg.seed, r, m))?;
        Ok(s)
    })?;

    let mut report = AggregateReport::new(cfg);
    for (i, (&l, regime)) in labels.iter().zip(&regimes).enumerate() {
        let v = i + 1;
        report.info(format!("label_{v}"), l as f64);
        let degree: Vec<i64> = samples.iter().map(|s| s.stats[i].degree as i64).collect();
        let degree_f: Vec<f64> = degree.iter().map(|&d| d as f64).collect();
        report.ecdf(format!("degree_{v}"), &degree_f);
        match *regime {
            RegimeSpec::Sublinear => {
                let norm = fixed_label_degree(cfg.n, l)?;
                report.ks(
                    format!("degree_ks_{v}"),
                    lattice_ks(&degree, lattice_normal_cdf(norm))?,
                    cfg.ks_tol(0.1),
                );
            }
            RegimeSpec::Proportional { rho } => {
                let mean = (1.0 / rho).ln();
                for x in 0..=2u64 {
                    let hits = column(&degree, |&d| (d == x as i64) as u8 as f64);
                    let est = Estimate::from_values(&hits)?;
                    report.near(
                        format!("degree_pmf_{v}_{x}"),
                        est,
                        poisson_pmf(mean, x),
                        0.02,
                    );
                }
                let ks = lattice_ks(&degree, |m| {
                    if m < 0 {
                        0.0
                    } else {
                        poisson_cdf(mean, m as u64)
                    }
                })?;
                report.info(format!("degree_poisson_ks_{v}"), ks);
            }
            RegimeSpec::Full => {
                let nonzero = column(&degree, |&d| (d != 0) as u8 as f64);
                let est = Estimate::from_values(&nonzero)?;
                if l == cfg.n {
                    report.verdict(format!("degree_nonzero_{v}"), est, 0.0, est.mean == 0.0);
                } else {
                    report.info(format!("degree_nonzero_{v}"), est.mean);
                }
            }
        }
        let depth: Vec<i64> = samples.iter().map(|s| s.stats[i].depth as i64).collect();
        let norm = fixed_label_depth(l)?;
        report.ks(
            format!("depth_ks_{v}"),
            lattice_ks(&depth, lattice_normal_cdf(norm))?,
            cfg.ks_tol(0.05),
        );
        report.ecdf(
            format!("depth_{v}"),
            &column(&depth, |&h| norm.apply(h as f64)),
        );
    }
    let mut idx = 0;
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let (a, b) = (i + 1, j + 1);
            report.info(format!("c_{a}_{b}"), c_coefficient(labels[i], labels[j])?);
            let dist: Vec<i64> = samples.iter().map(|s| s.distances[idx] as i64).collect();
            let norm = fixed_label_distance(labels[i], labels[j])?;
            report.ks(
                format!("distance_ks_{a}_{b}"),
                lattice_ks(&dist, lattice_normal_cdf(norm))?,
                cfg.ks_tol(0.07),
            );
            report.ecdf(
                format!("distance_{a}_{b}"),
                &column(&dist, |&d| norm.apply(d as f64)),
            );
            idx += 1;
        }
    }
    reference_selftest(&mut report, cfg, cfg.replicates.max(1000))?;
    Ok(report)
}
