//! Monte Carlo experiments with reproducible replicate streams.
//!
//! Replicate `r` of an experiment with master seed `s` draws from
//! `stream_rng(s, DOMAIN_MODEL, r)`; reference-law samples use
//! `DOMAIN_REFERENCE`. Replicates are split into static blocks, one per
//! worker, and collected in index order, so reports are identical for any
//! worker count.

mod cond_degree;
mod fixed_label;
mod invariants;
mod near_max;
mod selection;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::limits::{Estimate, Rect, RegimeSpec};
use crate::seed::{stream_rng, stream_seed, SimRng, DOMAIN_MODEL};

pub use cond_degree::{cond_degree_samples, exp_cond_degree, CondDegreeSample};
pub use fixed_label::{exp_fixed_label, fixed_label_stats, FixedLabelSample};
pub use invariants::{check_trace, check_tree};
pub use near_max::{
    exp_factorial_moments, exp_near_max, near_max_counts, MomentTerm, NearMaxSample,
};
pub use selection::{default_truncation, exp_h2_negligible, exp_tau_tightness, harmonic_tail};

/// Experiment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NearMax,
    Moments,
    CondDegree,
    FixedLabel,
    Tau,
    H2,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::NearMax => "near-max",
            ExperimentKind::Moments => "moments",
            ExperimentKind::CondDegree => "cond-degree",
            ExperimentKind::FixedLabel => "fixed-label",
            ExperimentKind::Tau => "tau",
            ExperimentKind::H2 => "h2",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "near-max" => ExperimentKind::NearMax,
            "moments" => ExperimentKind::Moments,
            "cond-degree" => ExperimentKind::CondDegree,
            "fixed-label" => ExperimentKind::FixedLabel,
            "tau" => ExperimentKind::Tau,
            "h2" => ExperimentKind::H2,
            _ => return invalid(format!("unknown experiment '{s}'")),
        })
    }
}

/// Degree threshold: absolute (`abs:d`) or `floor(a ln n)` (`a:a`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DegreeSpec {
    Abs(u32),
    Ratio(f64),
}

impl DegreeSpec {
    pub fn resolve(&self, n: u64) -> u32 {
        match *self {
            DegreeSpec::Abs(d) => d,
            DegreeSpec::Ratio(a) => (a * (n as f64).ln()).floor() as u32,
        }
    }
}

impl FromStr for DegreeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidArgument(format!("bad degree spec '{s}'; expected abs:D or a:A"));
        match s.split_once(':') {
            Some(("abs", v)) => v.parse().map(DegreeSpec::Abs).map_err(|_| bad()),
            Some(("a", v)) => {
                let a: f64 = v.parse().map_err(|_| bad())?;
                if !(0.0..2.0).contains(&a) {
                    return invalid(format!("degree ratio {a} not in [0, 2)"));
                }
                Ok(DegreeSpec::Ratio(a))
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for DegreeSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for DegreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeSpec::Abs(d) => write!(f, "abs:{d}"),
            DegreeSpec::Ratio(a) => write!(f, "a:{a}"),
        }
    }
}

impl From<DegreeSpec> for String {
    fn from(d: DegreeSpec) -> String {
        d.to_string()
    }
}

/// Fixed label: `abs:L`, `pow:alpha` (`floor(n^alpha)`), `rho:rho`
/// (`floor(rho n)`) or `last` (`n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LabelSpec {
    Abs(u64),
    Pow(f64),
    Rho(f64),
    Last,
}

impl LabelSpec {
    pub fn resolve(&self, n: u64) -> u64 {
        match *self {
            LabelSpec::Abs(l) => l,
            LabelSpec::Pow(a) => (n as f64).powf(a).floor() as u64,
            LabelSpec::Rho(r) => (r * n as f64).floor() as u64,
            LabelSpec::Last => n,
        }
    }

    /// Regime of the limit law.
    pub fn regime(&self, n: u64) -> RegimeSpec {
        match *self {
            LabelSpec::Rho(rho) => RegimeSpec::Proportional { rho },
            LabelSpec::Last => RegimeSpec::Full,
            LabelSpec::Abs(l) if l == n => RegimeSpec::Full,
            _ => RegimeSpec::Sublinear,
        }
    }
}

impl FromStr for LabelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "bad label spec '{s}'; expected abs:L, pow:A, rho:R or last"
            ))
        };
        if s == "last" {
            return Ok(LabelSpec::Last);
        }
        match s.split_once(':') {
            Some(("abs", v)) => v.parse().map(LabelSpec::Abs).map_err(|_| bad()),
            Some(("pow", v)) => {
                let a: f64 = v.parse().map_err(|_| bad())?;
                if !(a > 0.0 && a < 1.0) {
                    return invalid(format!("label exponent {a} not in (0, 1)"));
                }
                Ok(LabelSpec::Pow(a))
            }
            Some(("rho", v)) => {
                let r: f64 = v.parse().map_err(|_| bad())?;
                RegimeSpec::proportional(r)?;
                Ok(LabelSpec::Rho(r))
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for LabelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for LabelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSpec::Abs(l) => write!(f, "abs:{l}"),
            LabelSpec::Pow(a) => write!(f, "pow:{a}"),
            LabelSpec::Rho(r) => write!(f, "rho:{r}"),
            LabelSpec::Last => write!(f, "last"),
        }
    }
}

impl From<LabelSpec> for String {
    fn from(l: LabelSpec) -> String {
        l.to_string()
    }
}

/// Union of rectangles used as a mark test set. Serialised as
/// `x0,x1,y0,y1;...` so infinite bounds survive JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RectSet {
    pub rects: Vec<Rect>,
}

impl RectSet {
    /// Rejects overlapping rectangles.
    pub fn new(rects: Vec<Rect>) -> Result<Self> {
        if rects.is_empty() {
            return invalid("empty rectangle set");
        }
        for (i, a) in rects.iter().enumerate() {
            if rects[i + 1..].iter().any(|b| a.overlaps(b)) {
                return invalid("rectangles in a set must not overlap");
            }
        }
        Ok(Self { rects })
    }

    pub fn plane() -> Self {
        Self {
            rects: vec![Rect::plane()],
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    pub fn overlaps(&self, other: &RectSet) -> bool {
        self.rects
            .iter()
            .any(|a| other.rects.iter().any(|b| a.overlaps(b)))
    }

    /// Probability of the set under the mark law.
    pub fn mark_probability(&self) -> f64 {
        self.rects
            .iter()
            .map(crate::limits::mark_rect_probability)
            .sum::<f64>()
            .min(1.0)
    }
}

impl FromStr for RectSet {
    type Err = Error;

    /// `x0,x1,y0,y1;...` with `inf`/`-inf` allowed.
    fn from_str(s: &str) -> Result<Self> {
        let rects = s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let v: Vec<f64> = p
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidArgument(format!("bad rectangle '{p}'")))?;
                match v[..] {
                    [x0, x1, y0, y1] => Rect::new(x0, x1, y0, y1),
                    _ => invalid(format!("rectangle '{p}' needs four numbers")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        RectSet::new(rects)
    }
}

impl fmt::Display for RectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rects
            .iter()
            .map(|r| format!("{},{},{},{}", r.x0, r.x1, r.y0, r.y1))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl From<RectSet> for String {
    fn from(r: RectSet) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RectSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_k() -> usize {
    2
}

fn default_k_range() -> (u32, u32) {
    (7, 100)
}

fn default_eps() -> Vec<f64> {
    vec![0.5, 1.0]
}

/// Parameters of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Tracked vertices for `tau` and `h2`.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker count; all available cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub degrees: Vec<DegreeSpec>,
    #[serde(default)]
    pub labels: Vec<LabelSpec>,
    /// Degree offsets above `floor(log2 n)`.
    #[serde(default)]
    pub j: Vec<i64>,
    #[serde(default)]
    pub orders: Vec<u32>,
    /// One test set per moment term; the whole plane when absent.
    #[serde(default)]
    pub rects: Vec<RectSet>,
    /// Use the `mu`/`sigma^2` mark normalisation instead of the
    /// degree-dependent one in `moments`.
    #[serde(default = "default_true")]
    pub asymptotic_marks: bool,
    /// Include label terms in `cond-degree`; defaults to all thresholds
    /// being positive.
    #[serde(default)]
    pub with_labels: Option<bool>,
    /// Extra sizes for `h2`; `[n]` when empty.
    #[serde(default)]
    pub sizes: Vec<u64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_k_range")]
    pub k_range: (u32, u32),
    /// Overrides every KS tolerance of the experiment.
    #[serde(default)]
    pub ks_tolerance: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, n: u64, replicates: usize, seed: u64) -> Self {
        Self {
            experiment,
            n,
            replicates,
            k: default_k(),
            seed,
            threads: None,
            degrees: Vec::new(),
            labels: Vec::new(),
            j: Vec::new(),
            orders: Vec::new(),
            rects: Vec::new(),
            asymptotic_marks: true,
            with_labels: None,
            sizes: Vec::new(),
            eps: default_eps(),
            k_range: default_k_range(),
            ks_tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid("n must be at least 2");
        }
        if self.n > u32::MAX as u64 {
            return invalid("n exceeds the vertex range");
        }
        if self.replicates == 0 {
            return invalid("need at least one replicate");
        }
        if self.threads == Some(0) {
            return invalid("thread count must be positive");
        }
        Ok(())
    }

    pub(crate) fn ks_tol(&self, default: f64) -> f64 {
        self.ks_tolerance.unwrap_or(default)
    }
}

/// Quantiles of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// `(p, quantile)` at `p = 0.05, 0.25, 0.5, 0.75, 0.95`.
    pub quantiles: Vec<(f64, f64)>,
}

impl EcdfSummary {
    pub fn new(name: impl Into<String>, values: &[f64]) -> Self {
        let mut xs = values.to_vec();
        xs.sort_by(f64::total_cmp);
        let count = xs.len();
        let mean = if count == 0 {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / count as f64
        };
        let quantiles = [0.05, 0.25, 0.5, 0.75, 0.95]
            .iter()
            .map(|&p| {
                let q = if count == 0 {
                    f64::NAN
                } else {
                    xs[((p * count as f64).ceil() as usize).clamp(1, count) - 1]
                };
                (p, q)
            })
            .collect();
        Self {
            name: name.into(),
            count,
            mean,
            quantiles,
        }
    }
}

/// One statistic compared with its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub name: String,
    pub n: u64,
    pub replicates: usize,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub ks: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    /// Absent for informational rows.
    pub pass: Option<bool>,
    pub seed: u64,
}

/// Output of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub experiment: String,
    pub n: u64,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<StatRow>,
    pub ecdfs: Vec<EcdfSummary>,
    pub counts: Vec<(String, u64)>,
    /// Not serialised, so reports are byte-identical across runs.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl AggregateReport {
    pub(crate) fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment.name().to_string(),
            n: cfg.n,
            replicates: cfg.replicates,
            seed: cfg.seed,
            rows: Vec::new(),
            ecdfs: Vec::new(),
            counts: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }

    fn row(&self, name: impl Into<String>, estimate: f64) -> StatRow {
        StatRow {
            name: name.into(),
            n: self.n,
            replicates: self.replicates,
            estimate,
            stderr: None,
            ks: None,
            reference: None,
            tolerance: None,
            pass: None,
            seed: self.seed,
        }
    }

    /// Informational row.
    pub(crate) fn info(&mut self, name: impl Into<String>, estimate: f64) {
        let row = self.row(name, estimate);
        self.rows.push(row);
    }

    /// KS row passing when `ks <= tol`.
    pub(crate) fn ks(&mut self, name: impl Into<String>, ks: f64, tol: f64) {
        let mut row = self.row(name, ks);
        row.ks = Some(ks);
        row.reference = Some(0.0);
        row.tolerance = Some(tol);
        row.pass = Some(ks <= tol);
        self.rows.push(row);
    }

    /// Estimate row passing when `|estimate - reference| <= tol`.
    pub(crate) fn near(
        &mut self,
        name: impl Into<String>,
        est: Estimate,
        reference: f64,
        tol: f64,
    ) {
        let mut row = self.row(name, est.mean);
        row.stderr = Some(est.stderr);
        row.reference = Some(reference);
        row.tolerance = Some(tol);
        row.pass = Some((est.mean - reference).abs() <= tol);
        self.rows.push(row);
    }

    /// Estimate row passing when `estimate <= bound + slack`.
    pub(crate) fn below(&mut self, name: impl Into<String>, est: Estimate, bound: f64, slack: f64) {
        let mut row = self.row(name, est.mean);
        row.stderr = Some(est.stderr);
        row.reference = Some(bound);
        row.tolerance = Some(slack);
        row.pass = Some(est.mean <= bound + slack);
        self.rows.push(row);
    }

    /// Estimate row with a precomputed verdict.
    pub(crate) fn verdict(
        &mut self,
        name: impl Into<String>,
        est: Estimate,
        reference: f64,
        pass: bool,
    ) {
        let mut row = self.row(name, est.mean);
        row.stderr = Some(est.stderr);
        row.reference = Some(reference);
        row.pass = Some(pass);
        self.rows.push(row);
    }

    pub(crate) fn ecdf(&mut self, name: impl Into<String>, values: &[f64]) {
        self.ecdfs.push(EcdfSummary::new(name, values));
    }

    pub(crate) fn count(&mut self, name: impl Into<String>, value: u64) {
        self.counts.push((name.into(), value));
    }

    /// Every row with a verdict passed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn find(&self, name: &str) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidState(e.to_string()))
    }

    /// CSV with columns `name,n,replicates,estimate,stderr,ks,reference,pass,seed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidState(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "name",
            "n",
            "replicates",
            "estimate",
            "stderr",
            "ks",
            "reference",
            "pass",
            "seed",
        ])
        .map_err(io)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let pass = match r.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "",
            };
            w.write_record([
                r.name.clone(),
                r.n.to_string(),
                r.replicates.to_string(),
                r.estimate.to_string(),
                opt(r.stderr),
                opt(r.ks),
                opt(r.reference),
                pass.to_string(),
                r.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidState(e.to_string()))
    }
}

/// Runs `f(index, rng)` for every replicate index in `0..replicates` on
/// `threads` workers (all cores when `None`) and returns the results in
/// index order. The first failing replicate aborts the run and is reported
/// with its stream seed.
pub fn run_replicates<T, F>(
    seed: u64,
    domain: u64,
    replicates: usize,
    threads: Option<usize>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync,
{
    let workers = threads.unwrap_or_else(rayon::current_num_threads).max(1);
    let block = replicates.div_ceil(workers).max(1);
    let run_block = |b: usize| -> Result<Vec<T>> {
        let start = b * block;
        let end = ((b + 1) * block).min(replicates);
        (start..end)
            .map(|r| {
                let mut rng = stream_rng(seed, domain, r as u64);
                f(r as u64, &mut rng).map_err(|e| match e {
                    e @ Error::InvariantViolation { .. } => e,
                    e => Error::Replicate {
                        replicate: r as u64,
                        stream_seed: stream_seed(seed, domain, r as u64),
                        source: Box::new(e),
                    },
                })
            })
            .collect()
    };
    let blocks = replicates.div_ceil(block);
    let run = || -> Result<Vec<T>> {
        let parts: Vec<Vec<T>> = (0..blocks)
            .into_par_iter()
            .map(run_block)
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::ResourceLimit(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Model-stream runner for a config.
pub(crate) fn run_model<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync,
{
    run_replicates(cfg.seed, DOMAIN_MODEL, cfg.replicates, cfg.threads, f)
}

/// Runs the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::NearMax => exp_near_max(cfg),
        ExperimentKind::Moments => exp_factorial_moments(cfg),
        ExperimentKind::CondDegree => exp_cond_degree(cfg),
        ExperimentKind::FixedLabel => exp_fixed_label(cfg),
        ExperimentKind::Tau => exp_tau_tightness(cfg),
        ExperimentKind::H2 => exp_h2_negligible(cfg),
    }?;
    report.wall_clock = start.elapsed();
    Ok(report)
}

/// Column of a slice of per-replicate values.
pub(crate) fn column<T>(xs: &[T], f: impl Fn(&T) -> f64) -> Vec<f64> {
    xs.iter().map(f).collect()
}

/// Standard-normal reference sample from the reference stream, with the
/// self-test row `reference_selftest` (KS vs `Phi` at most `1.95/sqrt(m)`).
pub(crate) fn reference_selftest(
    report: &mut AggregateReport,
    cfg: &ExperimentConfig,
    m: usize,
) -> Result<Vec<f64>> {
    use crate::limits::{ks_distance, normal_cdf};
    use rand::RngExt;
    use rand_distr::StandardNormal;
    let xs = run_replicates(
        cfg.seed,
        crate::seed::DOMAIN_REFERENCE,
        m,
        cfg.threads,
        |_, rng| Ok(rng.sample::<f64, _>(StandardNormal)),
    )?;
    let ks = ks_distance(&xs, normal_cdf)?;
    report.ks("reference_selftest", ks, 1.95 / (m as f64).sqrt());
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_and_degree_parsing() {
        assert_eq!("abs:5".parse::<DegreeSpec>().unwrap(), DegreeSpec::Abs(5));
        assert_eq!("a:1".parse::<DegreeSpec>().unwrap().resolve(1 << 16), 11);
        assert!("a:2".parse::<DegreeSpec>().is_err());
        assert!("x:1".parse::<DegreeSpec>().is_err());
        assert_eq!(
            "pow:0.5".parse::<LabelSpec>().unwrap().resolve(1_000_000),
            1000
        );
        assert_eq!(
            "rho:0.5".parse::<LabelSpec>().unwrap().resolve(1_000_000),
            500_000
        );
        assert_eq!("last".parse::<LabelSpec>().unwrap().resolve(77), 77);
        assert!("rho:1".parse::<LabelSpec>().is_err());
        assert_eq!(LabelSpec::Last.regime(10), RegimeSpec::Full);
        let rs: RectSet = "0,1,0,1;1,2,-inf,inf".parse().unwrap();
        assert_eq!(rs.rects.len(), 2);
        assert!("0,1,0,1;0.5,2,0,1".parse::<RectSet>().is_err());
        assert!("0,1,0".parse::<RectSet>().is_err());
    }

    #[test]
    fn rect_sets_roundtrip_with_infinite_bounds() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Moments, 64, 10, 1);
        cfg.rects = vec![RectSet::plane(), "0,1,-inf,0;1,inf,0,2".parse().unwrap()];
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"-inf,inf,-inf,inf\""));
        assert_eq!(
            serde_json::from_str::<ExperimentConfig>(&json).unwrap(),
            cfg
        );
    }

    #[test]
    fn config_json_roundtrip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::FixedLabel, 1000, 10, 3);
        cfg.labels = vec![LabelSpec::Pow(0.5), LabelSpec::Last];
        cfg.degrees = vec![DegreeSpec::Ratio(1.0)];
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let min: ExperimentConfig =
            serde_json::from_str(r#"{"experiment":"tau","n":100}"#).unwrap();
        assert_eq!(min.replicates, 1000);
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"experiment":"tau","n":100,"bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn runner_is_ordered_and_thread_independent() {
        use rand::Rng;
        let a = run_replicates(5, DOMAIN_MODEL, 37, Some(1), |r, rng| {
            Ok((r, rng.next_u64()))
        })
        .unwrap();
        let b = run_replicates(5, DOMAIN_MODEL, 37, Some(4), |r, rng| {
            Ok((r, rng.next_u64()))
        })
        .unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, x)| x.0 == i as u64));
    }

    #[test]
    fn runner_reports_failing_replicate() {
        let err = run_replicates(5, DOMAIN_MODEL, 10, Some(2), |r, _| {
            if r == 6 {
                invalid("boom")
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        match err {
            Error::Replicate {
                replicate,
                stream_seed: s,
                ..
            } => {
                assert_eq!(replicate, 6);
                assert_eq!(s, stream_seed(5, DOMAIN_MODEL, 6));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ecdf_summary() {
        let s = EcdfSummary::new("x", &[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.quantiles[2], (0.5, 2.0));
        assert_eq!(s.quantiles[4], (0.95, 4.0));
    }

    #[test]
    fn report_csv() {
        let cfg = ExperimentConfig::new(ExperimentKind::Tau, 100, 5, 9);
        let mut r = AggregateReport::new(&cfg);
        r.ks("a,b", 0.01, 0.05);
        r.info("c", 1.5);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "name,n,replicates,estimate,stderr,ks,reference,pass,seed\n\"a,b\",100,5,0.01,,0.01,0,pass,9\nc,100,5,1.5,,,,,9\n"
        );
        assert!(r.passed());
    }
}
