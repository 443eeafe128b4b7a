//! Limit laws, normalisations and goodness-of-fit statistics.
//!
//! Logarithms are natural throughout, except the degree centering
//! `floor(log2 n)` and the fractional part [`eps_n`].

use std::f64::consts::{LN_2, SQRT_2};

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tree::VertexStats;

/// `1 - 1 / (2 ln 2)`.
pub const MU: f64 = 1.0 - 1.0 / (2.0 * LN_2);
/// `1 - 1 / (4 ln 2)`.
pub const SIGMA2: f64 = 1.0 - 1.0 / (4.0 * LN_2);

/// Weight of the common normal in the first mark coordinate.
pub fn mark_rho() -> f64 {
    (1.0 - MU / SIGMA2).sqrt()
}

/// `log2 n - floor(log2 n)`.
pub fn eps_n(n: u64) -> f64 {
    let l = (n as f64).log2();
    if n.is_power_of_two() {
        0.0
    } else {
        l - l.floor()
    }
}

/// `floor(log2 n)`, exact for integers.
pub fn floor_log2(n: u64) -> u32 {
    63 - n.max(1).leading_zeros()
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `P(Poi(mean) = k)`.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - libm::lgamma(k as f64 + 1.0)).exp()
}

/// `P(Poi(mean) <= k)` by direct summation.
pub fn poisson_cdf(mean: f64, k: u64) -> f64 {
    let mut term = (-mean).exp();
    let mut acc = term;
    for i in 1..=k {
        term *= mean / i as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// Position of a label relative to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeSpec {
    /// `l = o(n)`.
    Sublinear,
    /// `l ~ rho n`.
    Proportional { rho: f64 },
    /// `l = n - o(n)`.
    Full,
}

impl RegimeSpec {
    pub fn proportional(rho: f64) -> Result<Self> {
        let spec = RegimeSpec::Proportional { rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RegimeSpec::Proportional { rho } if !(rho > 0.0 && rho < 1.0) => {
                invalid(format!("rho = {rho} not in (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

/// `Phi(y)` for sublinear labels, `P(Poi(ln(1/rho)) <= d)` for proportional
/// labels and 1 for labels near `n`.
pub fn pr_value(y: f64, spec: RegimeSpec, d: u64) -> Result<f64> {
    spec.validate()?;
    Ok(match spec {
        RegimeSpec::Sublinear => normal_cdf(y),
        RegimeSpec::Proportional { rho } => poisson_cdf((1.0 / rho).ln(), d),
        RegimeSpec::Full => 1.0,
    })
}

fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Mark built from given normals `(m, z)`.
pub fn mark_from(m: f64, z: f64) -> (f64, f64) {
    let r = MU / SIGMA2;
    (m * (1.0 - r).sqrt() + z * r.sqrt(), m)
}

/// One draw of the depth/label mark of a near-maximal degree vertex.
pub fn mark_sample<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let m = std_normal(rng);
    let z = std_normal(rng);
    mark_from(m, z)
}

/// Points of the Poisson process with intensity `2^-x ln 2` on
/// `[lo, hi)`; `hi` may be `+inf`.
pub fn ppp_sample<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> Result<Vec<f64>> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::NEG_INFINITY {
        return invalid(format!("empty or unbounded window [{lo}, {hi})"));
    }
    let top = (-lo).exp2();
    let bottom = if hi.is_finite() { (-hi).exp2() } else { 0.0 };
    let mass = top - bottom;
    if mass <= 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mass)
        .map_err(|e| crate::error::Error::InvalidArgument(e.to_string()))?
        .sample(rng) as usize;
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            -(top - u * mass).log2()
        })
        .collect())
}

/// `(x - center) / scale` and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub center: f64,
    pub scale: f64,
}

impl Affine {
    pub fn new(center: f64, scale_sq: f64) -> Result<Self> {
        if scale_sq.is_nan() || scale_sq <= 0.0 || !center.is_finite() {
            return invalid(format!("non-positive scaling term {scale_sq}"));
        }
        Ok(Self {
            center,
            scale: scale_sq.sqrt(),
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.scale + self.center
    }
}

/// Normalised statistics of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexTerms {
    pub degree: f64,
    pub depth: f64,
    /// Absent where the label scaling vanishes.
    pub label: Option<f64>,
}

/// Normalised statistics of the tracked vertices and their pairs
/// `(i, j), i < j`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedTuple {
    pub per_vertex: Vec<VertexTerms>,
    pub per_pair: Vec<f64>,
}

fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Depth normalisation given `d_n >= d`.
pub fn cond_degree_depth(n: u64, d: u32) -> Result<Affine> {
    let ln_n = (n as f64).ln();
    Affine::new(ln_n - d as f64 / 2.0, ln_n - d as f64 / 4.0)
}

/// Log-label normalisation given `d_n >= d`; requires `d >= 1`.
pub fn cond_degree_label(n: u64, d: u32) -> Result<Affine> {
    let ln_n = (n as f64).ln();
    Affine::new(ln_n - d as f64 / 2.0, d as f64 / 4.0)
}

/// Distance normalisation given `d_n(i) >= d_i`, `d_n(j) >= d_j`.
pub fn cond_degree_distance(n: u64, di: u32, dj: u32) -> Result<Affine> {
    let ln_n = (n as f64).ln();
    let s = (di + dj) as f64;
    Affine::new(2.0 * ln_n - s / 2.0, 2.0 * ln_n - s / 4.0)
}

/// Normalises the statistics of vertices conditioned on `d_n(i) >= d_i`.
/// The degree term is the excess `d_n(i) - d_i`; the label term is present
/// for `d_i >= 1`.
pub fn normalize_cond_degree(
    stats: &[VertexStats],
    distances: &[u32],
    n: u64,
    degrees: &[u32],
) -> Result<NormalizedTuple> {
    if stats.len() != degrees.len() || distances.len() != pair_count(stats.len()) {
        return invalid("statistics, thresholds and pair distances have mismatched lengths");
    }
    let ln_n = (n as f64).ln();
    if let Some(&d) = degrees.iter().find(|&&d| d as f64 >= 2.0 * ln_n) {
        return invalid(format!("threshold {d} is not below 2 ln n"));
    }
    let mut out = NormalizedTuple::default();
    for (s, &d) in stats.iter().zip(degrees) {
        let depth = cond_degree_depth(n, d)?.apply(s.depth as f64);
        let label = if d == 0 {
            None
        } else {
            Some(cond_degree_label(n, d)?.apply((s.label as f64).ln()))
        };
        out.per_vertex.push(VertexTerms {
            degree: s.degree as f64 - d as f64,
            depth,
            label,
        });
    }
    let k = stats.len();
    let mut idx = 0;
    for i in 0..k {
        for j in i + 1..k {
            out.per_pair.push(
                cond_degree_distance(n, degrees[i], degrees[j])?.apply(distances[idx] as f64),
            );
            idx += 1;
        }
    }
    Ok(out)
}

/// `sqrt(ln l_i / (ln l_i + ln l_j))`.
pub fn c_coefficient(li: u64, lj: u64) -> Result<f64> {
    if li < 2 || lj < 2 {
        return invalid("labels must be at least 2");
    }
    let (a, b) = ((li as f64).ln(), (lj as f64).ln());
    Ok((a / (a + b)).sqrt())
}

/// Degree normalisation of a fixed label in the sublinear regime.
pub fn fixed_label_degree(n: u64, label: u64) -> Result<Affine> {
    let r = (n as f64 / label as f64).ln();
    Affine::new(r, r)
}

/// Depth normalisation of a fixed label.
pub fn fixed_label_depth(label: u64) -> Result<Affine> {
    let l = (label as f64).ln();
    Affine::new(l, l)
}

/// Distance normalisation of two fixed labels.
pub fn fixed_label_distance(li: u64, lj: u64) -> Result<Affine> {
    let s = (li as f64).ln() + (lj as f64).ln();
    Affine::new(s, s)
}

/// Normalises the statistics of the vertices with labels `labels`.
pub fn normalize_fixed_label(
    stats: &[VertexStats],
    distances: &[u32],
    n: u64,
    labels: &[u64],
    regimes: &[RegimeSpec],
) -> Result<NormalizedTuple> {
    if stats.len() != labels.len()
        || regimes.len() != labels.len()
        || distances.len() != pair_count(labels.len())
    {
        return invalid("statistics, labels, regimes and pair distances have mismatched lengths");
    }
    if let Some(&l) = labels.iter().find(|&&l| l < 2 || l > n) {
        return invalid(format!("label {l} not in [2, n]"));
    }
    let mut out = NormalizedTuple::default();
    for ((s, &l), regime) in stats.iter().zip(labels).zip(regimes) {
        regime.validate()?;
        let degree = match regime {
            RegimeSpec::Sublinear => fixed_label_degree(n, l)?.apply(s.degree as f64),
            _ => s.degree as f64,
        };
        let depth = fixed_label_depth(l)?.apply(s.depth as f64);
        out.per_vertex.push(VertexTerms {
            degree,
            depth,
            label: None,
        });
    }
    let mut idx = 0;
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            out.per_pair
                .push(fixed_label_distance(labels[i], labels[j])?.apply(distances[idx] as f64));
            idx += 1;
        }
    }
    Ok(out)
}

/// One draw of the limit of the conditioned-degree tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondDegreeLimit {
    pub depth: Vec<f64>,
    /// Present in the diverging-degree form.
    pub label: Vec<Option<f64>>,
    pub distance: Vec<f64>,
}

/// Samples the limit for degree ratios `a`. With `with_labels` the depth is
/// `M sqrt(a/(4-a)) + N sqrt(1 - a/(4-a))` and the label `M`; otherwise the
/// depths are independent standard normals. Distances combine depths as
/// `(sqrt(4-a_i) H_i + sqrt(4-a_j) H_j) / sqrt(8 - a_i - a_j)`.
pub fn limit_tuple_cond_degree<R: Rng + ?Sized>(
    a: &[f64],
    with_labels: bool,
    rng: &mut R,
) -> Result<CondDegreeLimit> {
    if let Some(&x) = a.iter().find(|&&x| !(0.0..2.0).contains(&x)) {
        return invalid(format!("a = {x} not in [0, 2)"));
    }
    let mut depth = Vec::with_capacity(a.len());
    let mut label = Vec::with_capacity(a.len());
    for &ai in a {
        if with_labels {
            let m = std_normal(rng);
            let z = std_normal(rng);
            let w = ai / (4.0 - ai);
            depth.push(m * w.sqrt() + z * (1.0 - w).sqrt());
            label.push(Some(m));
        } else {
            depth.push(std_normal(rng));
            label.push(None);
        }
    }
    let mut distance = Vec::with_capacity(pair_count(a.len()));
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (wi, wj) = ((4.0 - a[i]).sqrt(), (4.0 - a[j]).sqrt());
            distance.push((wi * depth[i] + wj * depth[j]) / (8.0 - a[i] - a[j]).sqrt());
        }
    }
    Ok(CondDegreeLimit {
        depth,
        label,
        distance,
    })
}

/// Sup distance between the empirical cdf of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return invalid("empty sample");
    }
    if samples.iter().any(|x| x.is_nan()) {
        return invalid("sample contains NaN");
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Sup over integers `m` of `|F_emp(m) - cdf(m)|` for an integer sample.
pub fn lattice_ks(samples: &[i64], cdf: impl Fn(i64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return invalid("empty sample");
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable();
    let m = xs.len() as f64;
    let mut d = cdf(xs[0] - 1).abs();
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        d = d.max((i as f64 / m - cdf(v)).abs());
        // Gap values between observations.
        if i < xs.len() && xs[i] > v + 1 {
            d = d.max((i as f64 / m - cdf(xs[i] - 1)).abs());
        }
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Continuity-corrected normal cdf at integers for a statistic with the
/// given normalisation.
pub fn lattice_normal_cdf(norm: Affine) -> impl Fn(i64) -> f64 {
    move |m| normal_cdf(norm.apply(m as f64 + 0.5))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("empty sample");
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Upper `1 - alpha` quantile bound for the one-sample statistic at size
/// `m`: `sqrt(-ln(alpha/2) / (2m))`.
pub fn ks_critical(m: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / (2.0 * m as f64)).sqrt()
}

/// `(x)_c = x (x - 1) ... (x - c + 1)`.
pub fn falling(x: u64, c: u32) -> f64 {
    (0..c as u64).map(|i| x as f64 - i as f64).product()
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return invalid("no values");
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            mean,
            stderr: (var / m).sqrt(),
        })
    }
}

/// Mean over replicates of `prod_k (counts[r][k])_{orders[k]}`.
pub fn factorial_moment(counts: &[Vec<u64>], orders: &[u32]) -> Result<Estimate> {
    if let Some(row) = counts.iter().find(|r| r.len() != orders.len()) {
        return invalid(format!(
            "count row of length {} for {} orders",
            row.len(),
            orders.len()
        ));
    }
    let values: Vec<f64> = counts
        .iter()
        .map(|row| {
            row.iter()
                .zip(orders)
                .map(|(&x, &c)| falling(x, c))
                .product()
        })
        .collect();
    Estimate::from_values(&values)
}

/// Sample Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("need two equal-length samples of size >= 2");
    }
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return invalid("constant sample");
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Axis-aligned rectangle `(x0, x1] x (y0, y1]`; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if [x0, x1, y0, y1].iter().any(|v| v.is_nan()) || x0 >= x1 || y0 >= y1 {
            return invalid(format!("degenerate rectangle ({x0}, {x1}] x ({y0}, {y1}]"));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn plane() -> Self {
        Self {
            x0: f64::NEG_INFINITY,
            x1: f64::INFINITY,
            y0: f64::NEG_INFINITY,
            y1: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x <= self.x1 && y > self.y0 && y <= self.y1
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }
}

/// Probability that the mark lies in `rect`, by composite Simpson
/// quadrature over the second coordinate.
pub fn mark_rect_probability(rect: &Rect) -> f64 {
    const CUT: f64 = 12.0;
    const STEPS: usize = 4000;
    let rho = mark_rho();
    let s = (1.0 - rho * rho).sqrt();
    let lo = rect.y0.max(-CUT);
    let hi = rect.y1.min(CUT);
    if lo >= hi {
        return 0.0;
    }
    let f = |m: f64| {
        let phi = (-0.5 * m * m).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let upper = if rect.x1.is_finite() {
            normal_cdf((rect.x1 - rho * m) / s)
        } else {
            1.0
        };
        let lower = if rect.x0.is_finite() {
            normal_cdf((rect.x0 - rho * m) / s)
        } else {
            0.0
        };
        phi * (upper - lower)
    };
    let h = (hi - lo) / STEPS as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..STEPS {
        acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (acc * h / 3.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn constants() {
        assert!((MU - 0.278652).abs() < 5e-7);
        assert!((SIGMA2 - 0.639326).abs() < 5e-7);
        assert!((1.0 - SIGMA2 - 1.0 / (4.0 * LN_2)).abs() < 1e-15);
        assert!((SIGMA2 - MU - 1.0 / (4.0 * LN_2)).abs() < 1e-15);
        assert!((MU / SIGMA2 - 0.43586).abs() < 1e-5);
        assert!((mark_rho() - 0.7511).abs() < 1e-4);
        assert_eq!(eps_n(1 << 16), 0.0);
        assert!((eps_n(3) - (3f64.log2() - 1.0)).abs() < 1e-15);
        assert_eq!(floor_log2(1 << 16), 16);
        assert_eq!(floor_log2(1000), 9);
    }

    #[test]
    fn scalings_agree_at_log2_degree() {
        for n in [1u64 << 10, 1 << 16, 1 << 20] {
            let ln_n = (n as f64).ln();
            let d = ln_n / LN_2;
            assert!((ln_n - d / 4.0 - SIGMA2 * ln_n).abs() < 1e-12);
            assert!((d / 4.0 - (1.0 - SIGMA2) * ln_n).abs() < 1e-12);
            assert!((ln_n - d / 2.0 - MU * ln_n).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_and_poisson() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.975002104851780).abs() < 1e-10);
        assert!((normal_cdf(-3.0) - 0.0013498980316301).abs() < 1e-10);
        let m = LN_2;
        assert!((poisson_pmf(m, 0) - 0.5).abs() < 1e-15);
        assert!((poisson_pmf(m, 1) - 0.346573590279973).abs() < 1e-12);
        assert!((poisson_pmf(m, 2) - 0.120113253479220).abs() < 1e-12);
        assert!((poisson_cdf(m, 2) - (0.5 + 0.346573590279973 + 0.120113253479220)).abs() < 1e-12);
    }

    #[test]
    fn pr_regimes() {
        assert_eq!(pr_value(0.3, RegimeSpec::Full, 0).unwrap(), 1.0);
        assert!(
            (pr_value(0.0, RegimeSpec::proportional(0.5).unwrap(), 0).unwrap() - 0.5).abs() < 1e-15
        );
        assert_eq!(pr_value(0.0, RegimeSpec::Sublinear, 0).unwrap(), 0.5);
        assert!(pr_value(0.0, RegimeSpec::Proportional { rho: 1.5 }, 0).is_err());
        assert!(RegimeSpec::proportional(0.0).is_err());
    }

    #[test]
    fn mark_law() {
        let (x, y) = mark_from(1.0, 0.0);
        assert!((x - 0.7511).abs() < 1e-4 && y == 1.0);
        let mut rng = rng_from_seed(11);
        let draws: Vec<(f64, f64)> = (0..10_000).map(|_| mark_sample(&mut rng)).collect();
        let xs: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let ys: Vec<f64> = draws.iter().map(|d| d.1).collect();
        assert!(ks_distance(&xs, normal_cdf).unwrap() <= 0.02);
        assert!(ks_distance(&ys, normal_cdf).unwrap() <= 0.02);
        assert!((correlation(&xs, &ys).unwrap() - mark_rho()).abs() <= 0.02);
        let var = Estimate::from_values(&xs.iter().map(|x| x * x).collect::<Vec<_>>())
            .unwrap()
            .mean;
        assert!((0.97..=1.03).contains(&var));
    }

    #[test]
    fn ppp_counts() {
        let mut rng = rng_from_seed(5);
        let counts: Vec<f64> = (0..10_000)
            .map(|_| ppp_sample(0.0, f64::INFINITY, &mut rng).unwrap().len() as f64)
            .collect();
        let est = Estimate::from_values(&counts).unwrap();
        assert!((est.mean - 1.0).abs() <= 0.03);
        let var = est.stderr.powi(2) * counts.len() as f64;
        assert!((0.9..=1.1).contains(&(var / est.mean)));
        let pts: Vec<f64> = (0..2000)
            .flat_map(|_| ppp_sample(2.0, 5.0, &mut rng).unwrap())
            .collect();
        assert!(pts.iter().all(|&x| (2.0..5.0).contains(&x)));
        let total: usize = (0..10_000)
            .map(|_| ppp_sample(3.0, f64::INFINITY, &mut rng).unwrap().len())
            .sum();
        assert!((total as f64 / 10_000.0 - 0.125).abs() < 0.02);
        assert!(ppp_sample(1.0, 1.0, &mut rng).is_err());
        assert!(ppp_sample(1.0, 1.0 + 1e-12, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn cond_degree_normalisation() {
        let n = 1u64 << 16;
        let ln_n = (n as f64).ln();
        let stats = [VertexStats {
            degree: 0,
            depth: 0,
            label: 1,
        }];
        let t = normalize_cond_degree(&stats, &[], n, &[0]).unwrap();
        assert!((t.per_vertex[0].depth + ln_n.sqrt()).abs() < 1e-12);
        assert_eq!(t.per_vertex[0].label, None);
        let norm = cond_degree_depth(n, 4).unwrap();
        assert!(norm.apply(ln_n - 2.0).abs() < 1e-12);
        assert!((norm.invert(norm.apply(17.0)) - 17.0).abs() < 1e-12);
        assert!(normalize_cond_degree(&stats, &[], n, &[23]).is_err());
        assert!(Affine::new(0.0, 0.0).is_err());
    }

    #[test]
    fn fixed_label_normalisation() {
        let n = 1000;
        let s = VertexStats {
            degree: 0,
            depth: 3,
            label: 1000,
        };
        let t = normalize_fixed_label(&[s], &[], n, &[1000], &[RegimeSpec::Full]).unwrap();
        assert_eq!(t.per_vertex[0].degree, 0.0);
        assert!((c_coefficient(50, 50).unwrap() - 1.0 / SQRT_2).abs() < 1e-15);
        assert!(fixed_label_depth(50).unwrap().apply((50f64).ln()).abs() < 1e-15);
        assert!(normalize_fixed_label(&[s], &[], n, &[1], &[RegimeSpec::Full]).is_err());
        assert!(c_coefficient(1, 5).is_err());
    }

    #[test]
    fn cond_degree_limit() {
        let mut rng = rng_from_seed(3);
        let t = limit_tuple_cond_degree(&[0.0], true, &mut rng).unwrap();
        assert_eq!(t.depth.len(), 1);
        assert!(limit_tuple_cond_degree(&[2.0], true, &mut rng).is_err());
        let mut dist = Vec::new();
        let (mut depth, mut label) = (Vec::new(), Vec::new());
        for _ in 0..10_000 {
            let t = limit_tuple_cond_degree(&[1.0, 0.5], true, &mut rng).unwrap();
            dist.push(t.distance[0]);
            depth.push(t.depth[0]);
            label.push(t.label[0].unwrap());
        }
        assert!(ks_distance(&dist, normal_cdf).unwrap() <= 0.02);
        assert!((correlation(&depth, &label).unwrap() - 1.0 / 3f64.sqrt()).abs() <= 0.02);
    }

    #[test]
    fn ks_examples() {
        assert!(ks_distance(&[], normal_cdf).is_err());
        assert_eq!(ks_distance(&[0.0], normal_cdf).unwrap(), 0.5);
        let c = 0.7;
        let d = ks_distance(&[c; 5], normal_cdf).unwrap();
        assert!((d - normal_cdf(c).max(1.0 - normal_cdf(c))).abs() < 1e-15);
        let mut rng = rng_from_seed(9);
        let xs: Vec<f64> = (0..10_000).map(|_| std_normal(&mut rng)).collect();
        assert!(ks_distance(&xs, normal_cdf).unwrap() <= 1.95 / 100.0);
        assert!(two_sample_ks(&xs[..5000], &xs[5000..]).unwrap() < 0.05);
        assert_eq!(two_sample_ks(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn lattice_ks_examples() {
        let pois = |m: i64| {
            if m < 0 {
                0.0
            } else {
                poisson_cdf(1.0, m as u64)
            }
        };
        assert!(lattice_ks(&[0, 0, 1, 3], pois).unwrap() > 0.0);
        assert_eq!(
            lattice_ks(&[0, 0], |m| if m < 0 { 0.0 } else { 1.0 }).unwrap(),
            0.0
        );
        let d = lattice_ks(&[0, 4], |m| {
            if m < 0 {
                0.0
            } else if m < 2 {
                0.2
            } else {
                1.0
            }
        })
        .unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn factorial_moments() {
        let counts = vec![vec![2u64, 5], vec![2, 1]];
        assert_eq!(factorial_moment(&counts, &[0, 0]).unwrap().mean, 1.0);
        assert_eq!(factorial_moment(&counts, &[2, 0]).unwrap().mean, 2.0);
        assert_eq!(factorial_moment(&counts, &[0, 1]).unwrap().mean, 3.0);
        assert!(factorial_moment(&counts, &[1]).is_err());
    }

    #[test]
    fn rect_probabilities() {
        assert!((mark_rect_probability(&Rect::plane()) - 1.0).abs() < 1e-9);
        let r = Rect::new(f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, 0.0).unwrap();
        assert!((mark_rect_probability(&r) - 0.5).abs() < 1e-9);
        let q = Rect::new(f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 0.0).unwrap();
        let expected = 0.25 + mark_rho().asin() / (2.0 * std::f64::consts::PI);
        assert!((mark_rect_probability(&q) - expected).abs() < 1e-9);
        assert!(Rect::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
