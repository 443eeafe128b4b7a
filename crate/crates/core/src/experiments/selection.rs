//! Experiments on selection sets: tightness of the first co-selection step
//! and negligibility of the depth accrued below the truncation step.

use super::{run_replicates, AggregateReport, ExperimentConfig};
use crate::coalescent::{sample_conditional_degrees, sample_selection, truncate, SelectionRecord};
use crate::error::{invalid, Result};
use crate::limits::Estimate;
use crate::seed::DOMAIN_MODEL;

/// First co-selection step among the first `k` tracked vertices.
pub(crate) fn tau_prefix(rec: &SelectionRecord, k: usize) -> Result<u32> {
    let mut best = 0;
    for i in 1..=k {
        let a = rec.selection_steps(i)?;
        for j in i + 1..=k {
            let b = rec.selection_steps(j)?;
            if let Some(&s) = a.iter().find(|s| b.contains(s)) {
                best = best.max(s);
            }
        }
    }
    Ok(best)
}

/// `ceil((ln n)^2)` clamped to `[2, n]`.
pub fn default_truncation(n: u64) -> u32 {
    ((n as f64).ln().powi(2).ceil() as u64).clamp(2, n) as u32
}

fn draw_record(
    n: usize,
    k: usize,
    degrees: &[u32],
    rng: &mut crate::seed::SimRng,
) -> Result<SelectionRecord> {
    if degrees.is_empty() {
        sample_selection(n, k, rng)
    } else {
        Ok(sample_conditional_degrees(n, degrees, rng)?.record)
    }
}

/// Survival of the first co-selection step. Unconditionally the survival
/// `P(tau_k >= K)` is compared with `k^2 / (K - 2)` for `K` in `k_range` and
/// every `k` in `2..=cfg.k`; with degree thresholds the survival at
/// `ceil((ln n)^2)` is compared with 0.05.
pub fn exp_tau_tightness(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let degrees: Vec<u32> = cfg.degrees.iter().map(|d| d.resolve(cfg.n)).collect();
    let k = if degrees.is_empty() {
        cfg.k
    } else {
        degrees.len()
    };
    if k < 2 {
        return invalid("tau needs at least two tracked vertices");
    }
    if k > cfg.n as usize {
        return invalid("more tracked vertices than n");
    }
    let (lo, hi) = cfg.k_range;
    if lo < 3 || lo > hi {
        return invalid(format!("K range [{lo}, {hi}] must satisfy 3 <= lo <= hi"));
    }
    let n = cfg.n as usize;
    let taus: Vec<Vec<u32>> = run_replicates(
        cfg.seed,
        DOMAIN_MODEL,
        cfg.replicates,
        cfg.threads,
        |_, rng| {
            let rec = draw_record(n, k, &degrees, rng)?;
            (2..=k).map(|m| tau_prefix(&rec, m)).collect()
        },
    )?;
    let mut report = AggregateReport::new(cfg);
    let survival = |m: usize, big_k: u32| -> Result<Estimate> {
        let hits: Vec<f64> = taus
            .iter()
            .map(|t| (t[m - 2] >= big_k) as u8 as f64)
            .collect();
        Estimate::from_values(&hits)
    };
    if degrees.is_empty() {
        for m in 2..=k {
            let mut all = true;
            for big_k in lo..=hi {
                let est = survival(m, big_k)?;
                let bound = (m * m) as f64 / (big_k as f64 - 2.0);
                let pass = est.mean <= bound + 3.0 * est.stderr;
                all &= pass;
                report.below(
                    format!("tau{m}_survival_{big_k}"),
                    est,
                    bound,
                    3.0 * est.stderr,
                );
            }
            let worst = (lo..=hi)
                .map(|big_k| {
                    survival(m, big_k).map(|e| e.mean * (big_k as f64 - 2.0) / (m * m) as f64)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            report.verdict(
                format!("tau{m}_envelope"),
                Estimate {
                    mean: worst,
                    stderr: 0.0,
                },
                1.0,
                all,
            );
        }
    } else {
        let big_k = default_truncation(cfg.n);
        let est = survival(k, big_k)?;
        report.info("truncation_step", big_k as f64);
        report.below(
            format!("tau{k}_conditional_survival_{big_k}"),
            est,
            0.05,
            0.0,
        );
    }
    Ok(report)
}

/// `sum_{j=2}^{t-1} 1/j`.
pub fn harmonic_tail(t: u32) -> f64 {
    (2..t).map(|j| 1.0 / j as f64).sum()
}

/// Depth of vertex 1 accrued below `ceil((ln n)^2)` for each size in
/// `cfg.sizes` (`[cfg.n]` when empty): its mean against the harmonic sum,
/// tail probabilities `P(h2 >= eps sqrt(ln n))` and their trend in `n`.
pub fn exp_h2_negligible(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let sizes = if cfg.sizes.is_empty() {
        vec![cfg.n]
    } else {
        cfg.sizes.clone()
    };
    if sizes.iter().any(|&s| s < 2) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("sizes must be increasing and at least 2");
    }
    let degrees: Vec<u32> = cfg.degrees.iter().map(|d| d.resolve(cfg.n)).collect();
    let mut report = AggregateReport::new(cfg);
    let mut tails: Vec<Vec<Estimate>> = Vec::new();
    for (idx, &size) in sizes.iter().enumerate() {
        let t = default_truncation(size);
        let n = size as usize;
        let domain = DOMAIN_MODEL.wrapping_add(idx as u64 + 1);
        let h2: Vec<f64> =
            run_replicates(cfg.seed, domain, cfg.replicates, cfg.threads, |_, rng| {
                let rec = draw_record(n, 1, &degrees, rng)?;
                Ok(truncate(&rec, t)?.h2[0] as f64)
            })?;
        let est = Estimate::from_values(&h2)?;
        let reference = harmonic_tail(t);
        if degrees.is_empty() {
            report.near(
                format!("h2_mean_{size}"),
                est,
                reference,
                0.05 * reference.max(1e-12),
            );
        } else {
            report.info(format!("h2_mean_{size}"), est.mean);
        }
        let scale = (size as f64).ln().sqrt();
        let mut row = Vec::new();
        for &eps in &cfg.eps {
            let threshold = eps * scale;
            let hits: Vec<f64> = h2.iter().map(|&h| (h >= threshold) as u8 as f64).collect();
            let tail = Estimate::from_values(&hits)?;
            if threshold >= t as f64 {
                report.verdict(format!("h2_tail_{size}_{eps}"), tail, 0.0, tail.mean == 0.0);
            } else {
                report.info(format!("h2_tail_{size}_{eps}"), tail.mean);
            }
            row.push(tail);
        }
        tails.push(row);
        report.ecdf(format!("h2_{size}"), &h2);
    }
    if sizes.len() > 1 {
        for (e, &eps) in cfg.eps.iter().enumerate() {
            let non_increasing = tails.windows(2).all(|w| {
                let (a, b) = (w[0][e], w[1][e]);
                b.mean <= a.mean + 2.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
            });
            let last = tails.last().expect("non-empty")[e];
            report.verdict(
                format!("h2_trend_{eps}"),
                last,
                tails[0][e].mean,
                non_increasing,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalescent::tau;
    use crate::experiments::ExperimentKind;
    use crate::seed::rng_from_seed;

    #[test]
    fn tau_prefix_matches_record() {
        let mut rng = rng_from_seed(2);
        for _ in 0..200 {
            let rec = sample_selection(50, 3, &mut rng).unwrap();
            assert_eq!(tau_prefix(&rec, 3).unwrap(), tau(&rec).unwrap());
            assert!(tau_prefix(&rec, 2).unwrap() <= tau(&rec).unwrap());
        }
    }

    #[test]
    fn truncation_defaults() {
        assert_eq!(default_truncation(3), 2);
        assert_eq!(default_truncation(20), 9);
        assert_eq!(default_truncation(1 << 14), 95);
        assert_eq!(harmonic_tail(2), 0.0);
        assert!((harmonic_tail(4) - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn tau_experiment_small() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Tau, 200, 500, 3);
        cfg.k = 3;
        cfg.k_range = (3, 10);
        let r = exp_tau_tightness(&cfg).unwrap();
        assert!(r.find("tau2_survival_3").is_some());
        assert!(r.find("tau3_envelope").is_some());
        cfg.k = 1;
        assert!(exp_tau_tightness(&cfg).is_err());
    }

    #[test]
    fn h2_huge_eps_is_zero() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::H2, 256, 200, 3);
        cfg.eps = vec![100.0];
        let r = exp_h2_negligible(&cfg).unwrap();
        let row = r.find("h2_tail_256_100").unwrap();
        assert_eq!((row.estimate, row.pass), (0.0, Some(true)));
    }
}
