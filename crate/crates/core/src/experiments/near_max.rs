//! Near-maximal degrees: counts of high-degree vertices, their marks and
//! mixed factorial moments of the counts.

use serde::{Deserialize, Serialize};

use super::invariants::{check_tree, violation};
use super::{column, reference_selftest, run_model, AggregateReport, ExperimentConfig, RectSet};
use crate::error::{invalid, Result};
use crate::limits::{
    cond_degree_depth, cond_degree_label, correlation, eps_n, factorial_moment, floor_log2,
    ks_distance, lattice_ks, lattice_normal_cdf, mark_sample, normal_cdf, poisson_cdf,
    two_sample_ks, Affine, Estimate, MU, SIGMA2,
};
use crate::seed::DOMAIN_REFERENCE;
use crate::tree::{build_rrt, TreeTopology, Vertex};

/// Vertices of one tree with degree at least `floor(log2 n) + j_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMaxSample {
    /// `(degree - floor(log2 n), depth, label)` per vertex, by label.
    pub vertices: Vec<(i64, u32, Vertex)>,
}

impl NearMaxSample {
    /// `X_{>= j}` over the whole plane.
    pub fn count_at_least(&self, j: i64) -> u64 {
        self.vertices.iter().filter(|v| v.0 >= j).count() as u64
    }

    /// `X_j` over the whole plane.
    pub fn count_exactly(&self, j: i64) -> u64 {
        self.vertices.iter().filter(|v| v.0 == j).count() as u64
    }
}

/// Collects the vertices with degree at least `floor(log2 n) + j_min`.
pub fn near_max_counts(tree: &TreeTopology, j_min: i64) -> NearMaxSample {
    let base = floor_log2(tree.n() as u64) as i64;
    let degrees = tree.in_degrees();
    let depths = tree.depths();
    let vertices = (1..=tree.n())
        .filter(|&v| degrees[v] as i64 - base >= j_min)
        .map(|v| (degrees[v] as i64 - base, depths[v], v as Vertex))
        .collect();
    NearMaxSample { vertices }
}

/// Depth and log-label normalisation of the marks: the `mu`/`sigma^2` form,
/// or the form of a degree threshold `d`.
fn mark_norms(n: u64, degree: Option<u32>) -> Result<(Affine, Affine)> {
    let ln_n = (n as f64).ln();
    match degree {
        None => Ok((
            Affine::new(MU * ln_n, SIGMA2 * ln_n)?,
            Affine::new(MU * ln_n, (1.0 - SIGMA2) * ln_n)?,
        )),
        Some(d) => Ok((cond_degree_depth(n, d)?, cond_degree_label(n, d)?)),
    }
}

fn mark_of(norms: &(Affine, Affine), depth: u32, label: Vertex) -> (f64, f64) {
    (
        norms.0.apply(depth as f64),
        norms.1.apply((label as f64).ln()),
    )
}

fn sample_tree(
    cfg: &ExperimentConfig,
    r: u64,
    rng: &mut crate::seed::SimRng,
    j_min: i64,
) -> Result<NearMaxSample> {
    let tree = build_rrt(cfg.n as usize, rng)?;
    let sample = near_max_counts(&tree, j_min);
    let tracked: Vec<Vertex> = sample.vertices.iter().take(4).map(|v| v.2).collect();
    check_tree(&tree, &tracked, true).map_err(|m| violation(cfg.seed, r, m))?;
    let base = floor_log2(cfg.n) as i64;
    let degrees = tree.in_degrees();
    let max_excess = sample.vertices.iter().map(|v| v.0).max().unwrap_or(j_min);
    for j in j_min..=max_excess + 1 {
        let direct = degrees[1..]
            .iter()
            .filter(|&&d| d as i64 >= base + j)
            .count() as u64;
        let summed: u64 = (j..=max_excess + 1).map(|x| sample.count_exactly(x)).sum();
        if direct != summed {
            return Err(violation(
                cfg.seed,
                r,
                format!("X_>={j} = {direct} but level counts sum to {summed}"),
            ));
        }
    }
    Ok(sample)
}

/// Counts of near-maximal degree vertices against `Poi(2^-j)` and their
/// marks against the mark law. Requires `n` to be a power of two.
pub fn exp_near_max(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    if !cfg.n.is_power_of_two() {
        return invalid(format!("n = {} is not a power of two", cfg.n));
    }
    let js = if cfg.j.is_empty() {
        vec![0]
    } else {
        cfg.j.clone()
    };
    let j_min = *js.iter().min().expect("non-empty");
    let samples = run_model(cfg, |r, rng| sample_tree(cfg, r, rng, j_min))?;
    let mut report = AggregateReport::new(cfg);
    for &j in &js {
        let ge = column(&samples, |s| s.count_at_least(j) as f64);
        let est = Estimate::from_values(&ge)?;
        let reference = (-j as f64).exp2();
        report.near(format!("count_ge_{j}"), est, reference, 0.15 * reference);
        let var = est.stderr.powi(2) * ge.len() as f64;
        report.info(
            format!("count_ge_{j}_dispersion"),
            if est.mean > 0.0 { var / est.mean } else { 0.0 },
        );
        let ints: Vec<i64> = ge.iter().map(|&x| x as i64).collect();
        let ks = lattice_ks(&ints, |m| {
            if m < 0 {
                0.0
            } else {
                poisson_cdf(reference, m as u64)
            }
        })?;
        report.info(format!("count_ge_{j}_poisson_ks"), ks);
        let eq = column(&samples, |s| s.count_exactly(j) as f64);
        report.info(format!("count_eq_{j}"), Estimate::from_values(&eq)?.mean);
        report.ecdf(format!("count_ge_{j}"), &ge);
    }
    let norms = mark_norms(cfg.n, None)?;
    let marks: Vec<(f64, f64)> = samples
        .iter()
        .flat_map(|s| s.vertices.iter().map(|v| mark_of(&norms, v.1, v.2)))
        .collect();
    let depths: Vec<i64> = samples
        .iter()
        .flat_map(|s| s.vertices.iter().map(|v| v.1 as i64))
        .collect();
    report.count("pooled_marks", marks.len() as u64);
    if marks.len() >= 2 {
        let xs = column(&marks, |m| m.0);
        let ys = column(&marks, |m| m.1);
        report.ks(
            format!("mark_depth_ks_j{j_min}"),
            lattice_ks(&depths, lattice_normal_cdf(norms.0))?,
            cfg.ks_tol(0.1),
        );
        report.ks(
            format!("mark_label_ks_j{j_min}"),
            ks_distance(&ys, normal_cdf)?,
            cfg.ks_tol(0.1),
        );
        let corr = correlation(&xs, &ys).unwrap_or(f64::NAN);
        report.info("mark_correlation", corr);
        report.info("mark_correlation_reference", crate::limits::mark_rho());
        let reference = super::run_replicates(
            cfg.seed,
            DOMAIN_REFERENCE,
            marks.len(),
            cfg.threads,
            |_, rng| Ok(mark_sample(rng)),
        )?;
        report.info(
            "mark_depth_two_sample_ks",
            two_sample_ks(&xs, &column(&reference, |m| m.0))?,
        );
        report.info(
            "mark_label_two_sample_ks",
            two_sample_ks(&ys, &column(&reference, |m| m.1))?,
        );
        report.ecdf("mark_depth", &xs);
        report.ecdf("mark_label", &ys);
    }
    reference_selftest(&mut report, cfg, cfg.replicates.max(1000))?;
    Ok(report)
}

/// One factor `(X(B))_c` of a mixed factorial moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTerm {
    pub j: i64,
    /// `X_{>= j}` when set, `X_j` otherwise.
    pub at_least: bool,
    pub set: RectSet,
    pub order: u32,
}

impl MomentTerm {
    /// `2^(-j + eps_n)` or `2^(-(j+1) + eps_n)` times the mark probability
    /// of the set.
    fn intensity(&self, n: u64) -> f64 {
        let shift = if self.at_least { 0.0 } else { 1.0 };
        (-(self.j as f64) - shift + eps_n(n)).exp2() * self.set.mark_probability()
    }
}

/// Terms from a config: `j` non-decreasing, terms at the largest `j` count
/// `X_{>= j}` and the others `X_j`, sets at equal `j` disjoint.
pub(crate) fn moment_terms(cfg: &ExperimentConfig) -> Result<Vec<MomentTerm>> {
    let js = if cfg.j.is_empty() {
        vec![0]
    } else {
        cfg.j.clone()
    };
    if js.windows(2).any(|w| w[0] > w[1]) {
        return invalid("j sequence must be non-decreasing");
    }
    if cfg.orders.len() > js.len() || cfg.rects.len() > js.len() {
        return invalid("more orders or test sets than j values");
    }
    let last = *js.last().expect("non-empty");
    let terms: Vec<MomentTerm> = js
        .iter()
        .enumerate()
        .map(|(i, &j)| MomentTerm {
            j,
            at_least: j == last,
            set: cfg.rects.get(i).cloned().unwrap_or_else(RectSet::plane),
            order: cfg.orders.get(i).copied().unwrap_or(1),
        })
        .collect();
    for (a, s) in terms.iter().enumerate() {
        if terms[a + 1..]
            .iter()
            .any(|t| t.j == s.j && t.set.overlaps(&s.set))
        {
            return invalid(format!("test sets at j = {} overlap", s.j));
        }
    }
    Ok(terms)
}

/// Mixed factorial moment of near-maximal degree counts with mark test sets
/// against the product of Poisson intensities.
pub fn exp_factorial_moments(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let terms = moment_terms(cfg)?;
    let j_min = terms.iter().map(|t| t.j).min().expect("non-empty");
    let base = floor_log2(cfg.n);
    let norms: Vec<(Affine, Affine)> = terms
        .iter()
        .map(|t| {
            let d = if cfg.asymptotic_marks {
                None
            } else {
                Some((base as i64 + t.j).max(0) as u32)
            };
            mark_norms(cfg.n, d)
        })
        .collect::<Result<_>>()?;
    let counts: Vec<Vec<u64>> = run_model(cfg, |r, rng| {
        let s = sample_tree(cfg, r, rng, j_min)?;
        Ok(terms
            .iter()
            .zip(&norms)
            .map(|(t, nm)| {
                s.vertices
                    .iter()
                    .filter(|v| if t.at_least { v.0 >= t.j } else { v.0 == t.j })
                    .filter(|v| {
                        let (x, y) = mark_of(nm, v.1, v.2);
                        t.set.contains(x, y)
                    })
                    .count() as u64
            })
            .collect())
    })?;
    let orders: Vec<u32> = terms.iter().map(|t| t.order).collect();
    let est = factorial_moment(&counts, &orders)?;
    let target: f64 = terms
        .iter()
        .map(|t| t.intensity(cfg.n).powi(t.order as i32))
        .product();
    let mut report = AggregateReport::new(cfg);
    report.near("factorial_moment", est, target, 0.15 * target);
    report.info(
        "moment_ratio",
        if target > 0.0 {
            est.mean / target
        } else {
            f64::NAN
        },
    );
    for (i, t) in terms.iter().enumerate() {
        report.info(
            format!("term{i}_mark_probability"),
            t.set.mark_probability(),
        );
        report.ecdf(format!("term{i}_count"), &column(&counts, |c| c[i] as f64));
    }
    Ok(report)
}
