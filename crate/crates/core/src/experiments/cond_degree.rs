//! Depth, label and distance of vertices conditioned on minimum degrees.

use serde::{Deserialize, Serialize};

use super::invariants::{check_trace, violation};
use super::{
    column, reference_selftest, run_model, run_replicates, AggregateReport, ExperimentConfig,
};
use crate::coalescent::sample_conditional_degrees;
use crate::error::{invalid, Result};
use crate::limits::{
    cond_degree_depth, cond_degree_distance, correlation, ks_distance, lattice_ks,
    lattice_normal_cdf, limit_tuple_cond_degree, normal_cdf, normalize_cond_degree, two_sample_ks,
    Estimate,
};
use crate::seed::DOMAIN_REFERENCE;
use crate::tree::{Vertex, VertexStats};

/// Statistics of the tracked vertices in one conditioned replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondDegreeSample {
    pub stats: Vec<VertexStats>,
    /// Pairs `(i, j), i < j`, lexicographic.
    pub distances: Vec<u32>,
    pub attempts: u64,
}

/// Draws `cfg.replicates` conditioned traces and reads the statistics of
/// vertices `1..=k`, checking the structural invariants on each.
pub fn cond_degree_samples(
    cfg: &ExperimentConfig,
    degrees: &[u32],
) -> Result<Vec<CondDegreeSample>> {
    let n = cfg.n as usize;
    run_model(cfg, |r, rng| {
        let s = sample_conditional_degrees(n, degrees, rng)?;
        check_trace(&s.trace, &s.record).map_err(|m| violation(cfg.seed, r, m))?;
        let k = degrees.len() as Vertex;
        let stats = (1..=k)
            .map(|v| s.trace.tree_stats(v))
            .collect::<Result<Vec<_>>>()?;
        let tree = s.trace.final_tree();
        let mut distances = Vec::new();
        for i in 1..=k {
            for j in i + 1..=k {
                distances.push(tree.distance(i, j)?);
            }
        }
        Ok(CondDegreeSample {
            stats,
            distances,
            attempts: s.attempts,
        })
    })
}

/// Conditional-degree experiment. Thresholds come from `cfg.degrees`
/// (`k = 1, d = 0` when empty).
pub fn exp_cond_degree(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let degrees: Vec<u32> = if cfg.degrees.is_empty() {
        vec![0]
    } else {
        cfg.degrees.iter().map(|d| d.resolve(cfg.n)).collect()
    };
    let ln_n = (cfg.n as f64).ln();
    if let Some(&d) = degrees.iter().find(|&&d| d as f64 >= 2.0 * ln_n) {
        return invalid(format!(
            "threshold {d} is not below 2 ln n = {:.3}",
            2.0 * ln_n
        ));
    }
    let with_labels = cfg
        .with_labels
        .unwrap_or_else(|| degrees.iter().all(|&d| d > 0));
    if with_labels && degrees.contains(&0) {
        return invalid("label terms need positive thresholds");
    }
    let a: Vec<f64> = degrees.iter().map(|&d| d as f64 / ln_n).collect();
    let samples = cond_degree_samples(cfg, &degrees)?;
    let tuples = samples
        .iter()
        .map(|s| normalize_cond_degree(&s.stats, &s.distances, cfg.n, &degrees))
        .collect::<Result<Vec<_>>>()?;
    let limits = run_replicates(
        cfg.seed,
        DOMAIN_REFERENCE,
        cfg.replicates,
        cfg.threads,
        |_, rng| limit_tuple_cond_degree(&a, with_labels, rng),
    )?;

    let mut report = AggregateReport::new(cfg);
    let attempts = column(&samples, |s| s.attempts as f64);
    report.info("mean_attempts", Estimate::from_values(&attempts)?.mean);
    for (i, &d) in degrees.iter().enumerate() {
        let v = i + 1;
        report.info(format!("threshold_{v}"), d as f64);
        report.info(format!("a_{v}"), a[i]);
        let raw: Vec<i64> = samples.iter().map(|s| s.stats[i].depth as i64).collect();
        let norm = cond_degree_depth(cfg.n, d)?;
        let tol = if d == 0 { 0.05 } else { 0.07 };
        report.ks(
            format!("depth_ks_{v}"),
            lattice_ks(&raw, lattice_normal_cdf(norm))?,
            cfg.ks_tol(tol),
        );
        let depth = column(&tuples, |t| t.per_vertex[i].depth);
        let ref_depth = column(&limits, |l| l.depth[i]);
        report.info(
            format!("depth_two_sample_ks_{v}"),
            two_sample_ks(&depth, &ref_depth)?,
        );
        report.ecdf(format!("depth_{v}"), &depth);
        let min_degree = samples.iter().map(|s| s.stats[i].degree).min().unwrap_or(0);
        report.verdict(
            format!("degree_threshold_met_{v}"),
            Estimate {
                mean: min_degree as f64,
                stderr: 0.0,
            },
            d as f64,
            min_degree >= d,
        );
        if with_labels {
            let label = column(&tuples, |t| t.per_vertex[i].label.unwrap_or(f64::NAN));
            report.ks(
                format!("label_ks_{v}"),
                ks_distance(&label, normal_cdf)?,
                cfg.ks_tol(0.07),
            );
            let corr = correlation(&depth, &label)?;
            let target = (a[i] / (4.0 - a[i])).sqrt();
            report.near(
                format!("depth_label_corr_{v}"),
                Estimate {
                    mean: corr,
                    stderr: 0.0,
                },
                target,
                0.05,
            );
            let ref_label = column(&limits, |l| l.label[i].unwrap_or(f64::NAN));
            report.info(
                format!("label_two_sample_ks_{v}"),
                two_sample_ks(&label, &ref_label)?,
            );
            report.ecdf(format!("label_{v}"), &label);
        }
    }
    let k = degrees.len();
    let mut idx = 0;
    for i in 0..k {
        for j in i + 1..k {
            let raw: Vec<i64> = samples.iter().map(|s| s.distances[idx] as i64).collect();
            let norm = cond_degree_distance(cfg.n, degrees[i], degrees[j])?;
            let name = format!("distance_ks_{}_{}", i + 1, j + 1);
            report.ks(
                name,
                lattice_ks(&raw, lattice_normal_cdf(norm))?,
                cfg.ks_tol(0.07),
            );
            let dist = column(&tuples, |t| t.per_pair[idx]);
            let ref_dist = column(&limits, |l| l.distance[idx]);
            report.info(
                format!("distance_two_sample_ks_{}_{}", i + 1, j + 1),
                two_sample_ks(&dist, &ref_dist)?,
            );
            report.ecdf(format!("distance_{}_{}", i + 1, j + 1), &dist);
            idx += 1;
        }
    }
    reference_selftest(&mut report, cfg, cfg.replicates.max(1000))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{DegreeSpec, ExperimentKind};

    #[test]
    fn small_run_is_deterministic() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::CondDegree, 256, 200, 4);
        cfg.degrees = vec![DegreeSpec::Abs(3), DegreeSpec::Abs(2)];
        cfg.threads = Some(1);
        let a = exp_cond_degree(&cfg).unwrap();
        cfg.threads = Some(3);
        let b = exp_cond_degree(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.find("degree_threshold_met_1").unwrap().pass, Some(true));
        assert!(a.find("distance_ks_1_2").is_some());
        assert!(a.find("label_ks_2").is_some());
    }

    #[test]
    fn rejects_large_thresholds() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::CondDegree, 256, 10, 4);
        cfg.degrees = vec![DegreeSpec::Abs(12)];
        assert!(exp_cond_degree(&cfg).is_err());
        cfg.degrees = vec![DegreeSpec::Abs(0)];
        cfg.with_labels = Some(true);
        assert!(exp_cond_degree(&cfg).is_err());
    }
}
