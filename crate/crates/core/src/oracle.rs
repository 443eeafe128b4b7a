//! Exact enumeration at small sizes.
//!
//! Every coalescent chain on `n <= 6` vertices is enumerated with its exact
//! weight, and the coin-flip closed forms for a single vertex and for
//! disjoint selection sets are checked against enumeration of all flip
//! assignments. All probabilities are exact rationals.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::coalescent::{stats_from_flips, CoalescentTrace, RankMerge, SelectionRecord};
use crate::error::{invalid, Error, Result};
use crate::tree::{Vertex, VertexStats};

/// Exact probability.
pub type Prob = Ratio<i128>;

/// Largest `n` for chain enumeration.
pub const MAX_CHAIN_N: usize = 6;
/// Largest `n` for conditional laws.
pub const MAX_CONDITIONAL_N: usize = 5;
/// Largest number of enumerated coin flips.
pub const MAX_FLIPS: usize = 20;

/// Finite distribution with exact weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPmf<K: Ord> {
    weights: BTreeMap<K, Prob>,
}

impl<K: Ord> Default for ExactPmf<K> {
    fn default() -> Self {
        Self {
            weights: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> ExactPmf<K> {
    pub fn add(&mut self, outcome: K, weight: Prob) {
        *self.weights.entry(outcome).or_insert_with(Prob::zero) += weight;
    }

    pub fn prob(&self, outcome: &K) -> Prob {
        self.weights
            .get(outcome)
            .copied()
            .unwrap_or_else(Prob::zero)
    }

    pub fn total(&self) -> Prob {
        self.weights.values().fold(Prob::zero(), |acc, w| acc + w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Prob)> {
        self.weights.iter()
    }

    /// Push-forward through `f`.
    pub fn map<L: Ord + Clone>(&self, f: impl Fn(&K) -> L) -> ExactPmf<L> {
        let mut out = ExactPmf::default();
        for (k, w) in &self.weights {
            out.add(f(k), *w);
        }
        out
    }

    /// Divides every weight by the total mass.
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.total();
        if total.is_zero() {
            return Err(Error::EmptyCondition("pmf has no mass".into()));
        }
        for w in self.weights.values_mut() {
            *w /= total;
        }
        Ok(self)
    }

    /// Writes `outcome,probability_num,probability_den` rows with a header.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        outcome: impl Fn(&K) -> String,
    ) -> std::io::Result<()> {
        writeln!(out, "outcome,probability_num,probability_den")?;
        for (k, w) in &self.weights {
            writeln!(
                out,
                "{},{},{}",
                csv_field(&outcome(k)),
                w.numer(),
                w.denom()
            )?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn chain_count(n: usize) -> u128 {
    (2..=n as u128).map(|i| i * (i - 1)).product()
}

/// Visits every coalescent chain on `n` vertices as its rank-merge sequence
/// and returns the number of chains. Each chain has weight `1 / count`.
pub fn enumerate_chains(n: usize, mut visit: impl FnMut(&[RankMerge])) -> Result<u64> {
    if n < 2 {
        return invalid("chain enumeration needs n >= 2");
    }
    if n > MAX_CHAIN_N {
        return Err(Error::ResourceLimit(format!(
            "n = {n} would enumerate {} chains; the limit is n = {MAX_CHAIN_N}",
            chain_count(n)
        )));
    }
    fn rec(
        step: u32,
        prefix: &mut Vec<RankMerge>,
        count: &mut u64,
        visit: &mut dyn FnMut(&[RankMerge]),
    ) {
        if step < 2 {
            *count += 1;
            visit(prefix);
            return;
        }
        for b in 2..=step {
            for a in 1..b {
                for xi in [false, true] {
                    prefix.push(RankMerge::new(step, a, b, xi));
                    rec(step - 1, prefix, count, visit);
                    prefix.pop();
                }
            }
        }
    }
    let mut count = 0;
    let mut prefix = Vec::with_capacity(n - 1);
    rec(n as u32, &mut prefix, &mut count, &mut visit);
    Ok(count)
}

fn enumerate_traces(n: usize, mut visit: impl FnMut(&CoalescentTrace)) -> Result<Prob> {
    let mut err = None;
    let count = enumerate_chains(n, |chain| {
        match CoalescentTrace::from_rank_merges(n, chain) {
            Ok(t) => visit(&t),
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Prob::new(1, count as i128))
}

/// Law of the relabelled final tree, keyed by its parent array
/// `parent[2..=n]`. Equal to the uniform law on increasing trees.
pub fn exact_rrt_law(n: usize) -> Result<ExactPmf<Vec<Vertex>>> {
    let mut pmf = ExactPmf::default();
    let weight = enumerate_traces(n, |t| {
        pmf.add(
            t.relabelled_tree().parent_array()[2..].to_vec(),
            Prob::one(),
        );
    })?;
    Ok(pmf.map(|k| k.clone()).scaled(weight))
}

impl<K: Ord + Clone> ExactPmf<K> {
    fn scaled(mut self, factor: Prob) -> Self {
        for w in self.weights.values_mut() {
            *w *= factor;
        }
        self
    }
}

/// `(n)_k = n (n - 1) ... (n - k + 1)`.
pub fn falling_factorial(n: u64, k: u64) -> u128 {
    (0..k).map(|i| (n - i) as u128).product()
}

/// `P(label(i) = labels[i - 1], i = 1..=k)` over all chains on `n` vertices.
pub fn exact_label_prob(n: usize, labels: &[Vertex]) -> Result<Prob> {
    let k = labels.len();
    if k == 0 || k > n {
        return invalid("need 1 <= k <= n labels");
    }
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k {
        return invalid(format!("labels {labels:?} are not distinct"));
    }
    if labels.iter().any(|&l| l == 0 || l as usize > n) {
        return invalid("labels must lie in [n]");
    }
    let mut hits = 0i128;
    let weight = enumerate_traces(n, |t| {
        if (1..=k).all(|i| t.label(i as Vertex) == labels[i - 1]) {
            hits += 1;
        }
    })?;
    Ok(weight * hits)
}

fn binomial(m: u32, x: u32) -> i128 {
    if x > m {
        return 0;
    }
    let x = x.min(m - x);
    (0..x).fold(1i128, |acc, i| acc * (m - i) as i128 / (i + 1) as i128)
}

fn pow2_inv(e: u32) -> Prob {
    Prob::new(1, 1i128 << e)
}

/// `P(Bin(m, 1/2) = x)`.
fn binom_pmf(m: u32, x: u32) -> Prob {
    Prob::new(binomial(m, x), 1i128 << m)
}

/// `P(Bin(m, 1/2) <= x)`; 0 for negative `x`.
fn binom_cdf(m: u32, x: i64) -> Prob {
    if x < 0 {
        return Prob::zero();
    }
    (0..=m.min(x as u32)).fold(Prob::zero(), |acc, i| acc + binom_pmf(m, i))
}

/// Event evaluated on one vertex's truncated selection set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VertexEvent {
    /// `h_{n,1} <= h`, `label >= l`, `degree >= d`.
    LabelAtLeast,
    /// `h_{n,1} <= h`, `label == l`, `degree <= d`.
    LabelExactly,
    /// `h <= h`, `degree >= d` with `J` the complete selection set; `l` unused.
    NoLabel,
}

/// Query for [`verify_probonevert`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneVertexQuery {
    pub n: u32,
    pub t_n: u32,
    /// Truncated selection set, any order.
    pub steps: Vec<u32>,
    pub degree: u32,
    pub depth: u32,
    pub label: u32,
    pub event: VertexEvent,
}

impl OneVertexQuery {
    fn validate(&self) -> Result<Vec<u32>> {
        if self.n < 2 || self.t_n < 2 || self.t_n > self.n {
            return invalid(format!(
                "need 2 <= t_n <= n, got t_n = {}, n = {}",
                self.t_n, self.n
            ));
        }
        if self.steps.len() > MAX_FLIPS {
            return Err(Error::ResourceLimit(format!(
                "|J| = {} exceeds {MAX_FLIPS}",
                self.steps.len()
            )));
        }
        let mut steps = self.steps.clone();
        steps.sort_unstable_by(|a, b| b.cmp(a));
        if steps.windows(2).any(|w| w[0] == w[1]) {
            return invalid("selection set has repeated steps");
        }
        if steps.iter().any(|&j| j < self.t_n || j > self.n) {
            return invalid(format!(
                "selection set must lie in [{}, {}]",
                self.t_n, self.n
            ));
        }
        if self.event != VertexEvent::NoLabel && (self.label < self.t_n || self.label > self.n) {
            return invalid(format!(
                "label {} must lie in [t_n, n] = [{}, {}]",
                self.label, self.t_n, self.n
            ));
        }
        Ok(steps)
    }

    /// Closed-form probability given the selection set.
    fn closed_form(&self, steps: &[u32]) -> Prob {
        let (d, h, l) = (self.degree, self.depth as i64, self.label);
        match self.event {
            VertexEvent::LabelAtLeast => {
                let upper = steps.iter().filter(|&&j| j >= l).count() as u32;
                if upper < d + 1 {
                    return Prob::zero();
                }
                let m1 = upper - d;
                let m2 = steps.iter().filter(|&&j| j < l).count() as u32;
                let joint = (1..=m1).fold(Prob::zero(), |acc, x1| {
                    acc + binom_pmf(m1, x1) * binom_cdf(m2, h - x1 as i64)
                });
                pow2_inv(d) * joint
            }
            VertexEvent::LabelExactly => {
                let above = steps.iter().filter(|&&j| j > l).count() as u32;
                if above > d || !steps.contains(&l) {
                    return Prob::zero();
                }
                let m2 = steps.iter().filter(|&&j| j < l).count() as u32;
                pow2_inv(above + 1) * binom_cdf(m2, h - 1)
            }
            VertexEvent::NoLabel => {
                let size = steps.len() as u32;
                if size < d {
                    return Prob::zero();
                }
                pow2_inv(d) * binom_cdf(size - d, h)
            }
        }
    }

    /// Whether flips `bits` (bit `m` = flip at the `m`-th largest step) realise
    /// the event, read through the degree/depth/label description of the
    /// flips.
    fn holds(&self, steps: &[u32], bits: u32) -> bool {
        let flip = |m: usize| (bits >> m) & 1 == 1;
        let len = steps.len();
        let zeros = (0..len).take_while(|&m| !flip(m)).count() as u32;
        let depth = bits.count_ones();
        let first_loss = (0..len).find(|&m| flip(m)).map(|m| steps[m]);
        match self.event {
            VertexEvent::LabelAtLeast => {
                depth <= self.depth
                    && first_loss.is_some_and(|j| j >= self.label)
                    && zeros >= self.degree
            }
            VertexEvent::LabelExactly => {
                depth <= self.depth && first_loss == Some(self.label) && zeros <= self.degree
            }
            VertexEvent::NoLabel => depth <= self.depth && zeros >= self.degree,
        }
    }
}

/// Closed-form and enumerated probability of a single-vertex event given its
/// truncated selection set, as `(closed_form, enumerated)`.
pub fn verify_probonevert(q: &OneVertexQuery) -> Result<(Prob, Prob)> {
    let steps = q.validate()?;
    let closed = q.closed_form(&steps);
    let len = steps.len() as u32;
    let hits = (0..1u32 << len)
        .filter(|&bits| q.holds(&steps, bits))
        .count() as i128;
    Ok((closed, Prob::new(hits, 1i128 << len)))
}

/// Joint probability of `LabelAtLeast` events for several vertices with
/// disjoint truncated selection sets, by enumeration over all flips, and the
/// product of the single-vertex closed forms, as `(joint, product)`.
pub fn verify_product_form(queries: &[OneVertexQuery]) -> Result<(Prob, Prob)> {
    if queries.is_empty() {
        return invalid("need at least one vertex");
    }
    let mut all_steps = Vec::new();
    let mut per_vertex = Vec::new();
    for q in queries {
        if q.event != VertexEvent::LabelAtLeast {
            return invalid("product form is stated for LabelAtLeast events");
        }
        if (q.n, q.t_n) != (queries[0].n, queries[0].t_n) {
            return invalid("all vertices must share n and t_n");
        }
        let steps = q.validate()?;
        all_steps.extend_from_slice(&steps);
        per_vertex.push(steps);
    }
    let total = all_steps.len();
    all_steps.sort_unstable();
    all_steps.dedup();
    if all_steps.len() != total {
        return invalid("selection sets are not pairwise disjoint");
    }
    if total > MAX_FLIPS {
        return Err(Error::ResourceLimit(format!(
            "{total} flips exceed {MAX_FLIPS}"
        )));
    }
    let product = queries
        .iter()
        .zip(&per_vertex)
        .fold(Prob::one(), |acc, (q, s)| acc * q.closed_form(s));
    let offsets: Vec<u32> = per_vertex
        .iter()
        .scan(0u32, |off, s| {
            let o = *off;
            *off += s.len() as u32;
            Some(o)
        })
        .collect();
    let hits = (0..1u32 << total)
        .filter(|&bits| {
            queries
                .iter()
                .zip(&per_vertex)
                .zip(&offsets)
                .all(|((q, s), &o)| {
                    let mask = if s.is_empty() {
                        0
                    } else {
                        (1u32 << s.len()) - 1
                    };
                    q.holds(s, (bits >> o) & mask)
                })
        })
        .count() as i128;
    Ok((Prob::new(hits, 1i128 << total), product))
}

/// Conditioning event on the tracked vertices `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `degree(i) >= d_i`.
    DegreeAtLeast(Vec<u32>),
    /// `label(i) = l_i`.
    Labels(Vec<Vertex>),
}

impl Condition {
    fn k(&self) -> usize {
        match self {
            Condition::DegreeAtLeast(d) => d.len(),
            Condition::Labels(l) => l.len(),
        }
    }
}

/// Statistics of the tracked vertices: `(degree, depth, label)` each, then the
/// distances of all pairs `i < j` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StatTuple {
    pub vertices: Vec<VertexStats>,
    pub distances: Vec<u32>,
}

impl StatTuple {
    /// Reads the tuple for vertices `1..=k` off a trace.
    pub fn from_trace(trace: &CoalescentTrace, k: usize) -> Result<Self> {
        let vertices = (1..=k as Vertex)
            .map(|v| trace.tree_stats(v))
            .collect::<Result<Vec<_>>>()?;
        let mut distances = Vec::new();
        for i in 1..=k as Vertex {
            for j in i + 1..=k as Vertex {
                distances.push(trace.final_tree().distance(i, j)?);
            }
        }
        Ok(Self {
            vertices,
            distances,
        })
    }
}

impl Display for StatTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .vertices
            .iter()
            .map(|s| format!("{}/{}/{}", s.degree, s.depth, s.label))
            .chain(self.distances.iter().map(|d| d.to_string()))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Exact law of the tracked statistics under the conditional measure.
pub fn exact_conditional_law(n: usize, condition: &Condition) -> Result<ExactPmf<StatTuple>> {
    if n > MAX_CONDITIONAL_N {
        return Err(Error::ResourceLimit(format!(
            "conditional laws are limited to n <= {MAX_CONDITIONAL_N}"
        )));
    }
    let k = condition.k();
    if k == 0 || k > n {
        return invalid("need 1 <= k <= n tracked vertices");
    }
    let mut pmf = ExactPmf::default();
    let mut err = None;
    let weight = enumerate_traces(n, |t| {
        let keep = match condition {
            Condition::DegreeAtLeast(d) => (1..=k).all(|i| {
                t.final_tree()
                    .in_degree(i as Vertex)
                    .is_ok_and(|x| x >= d[i - 1])
            }),
            Condition::Labels(l) => (1..=k).all(|i| t.label(i as Vertex) == l[i - 1]),
        };
        if keep {
            match StatTuple::from_trace(t, k) {
                Ok(s) => pmf.add(s, Prob::one()),
                Err(e) => err = Some(e),
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if pmf.is_empty() {
        return Err(Error::EmptyCondition(format!("{condition:?} at n = {n}")));
    }
    pmf.scaled(weight).normalized()
}

/// Selection sets of vertices `1..=k`, the group probability and the
/// conditional degree probability.
pub type SelectionGroup = (Vec<Vec<u32>>, Prob, Prob);

/// Groups all chains by the truncated selection sets of vertices `1..=k` and
/// returns, per group, `P(group)` and `P(d_n(i) >= d_i for all i | group)`.
pub fn degree_prob_by_selection(
    n: usize,
    t_n: u32,
    degrees: &[u32],
) -> Result<Vec<SelectionGroup>> {
    let k = degrees.len();
    if k == 0 || k > n {
        return invalid("need 1 <= k <= n tracked vertices");
    }
    let mut groups: BTreeMap<Vec<Vec<u32>>, (i128, i128)> = BTreeMap::new();
    let mut err = None;
    let weight = enumerate_traces(n, |t| {
        let rec = match SelectionRecord::from_trace(t, k) {
            Ok(r) => r,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let key: Vec<Vec<u32>> = (1..=k)
            .map(|i| {
                rec.selection_steps(i)
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|&j| j >= t_n)
                    .collect()
            })
            .collect();
        let hit =
            (1..=k).all(|i| stats_from_flips(&rec, i).is_ok_and(|s| s.degree >= degrees[i - 1]));
        let e = groups.entry(key).or_insert((0, 0));
        e.0 += 1;
        e.1 += hit as i128;
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(groups
        .into_iter()
        .map(|(key, (count, hits))| (key, weight * count, Prob::new(hits, count)))
        .collect())
}
