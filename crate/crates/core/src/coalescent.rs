//! The Kingman n-coalescent construction of the random recursive tree.
//!
//! A run starts from `n` singleton trees. At step `j = n, n-1, ..., 2` two of
//! the `j` current trees are chosen uniformly and their roots are joined by an
//! edge whose direction is a fair coin: with `xi = 1` the edge points to the
//! root of the tree with the smaller minimum vertex (tree `a`), otherwise to
//! the root of tree `b`. The vertex that becomes a child at step `j` receives
//! label `j` and the final root receives label 1; the relabelled tree is a
//! random recursive tree.
//!
//! Trees are identified by their smallest vertex, which is exactly the order
//! used to index them. Sampled traces therefore record tree identities; the
//! rank form `(a_j, b_j)` with `1 <= a_j < b_j <= j` is available through
//! [`CoalescentTrace::rank_merges`].

use std::io::Write;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tree::{TreeTopology, Vertex, VertexStats};

/// Rejections allowed in [`sample_conditional_degrees`] before giving up.
pub const CONDITIONAL_RETRY_BUDGET: u64 = 1_000_000;

/// One merge, with trees named by their smallest vertex (`a < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub step: u32,
    pub a: Vertex,
    pub b: Vertex,
    pub xi: bool,
}

/// One merge with trees named by their rank among the `step` current trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankMerge {
    pub step: u32,
    pub a: u32,
    pub b: u32,
    pub xi: bool,
}

impl RankMerge {
    pub fn new(step: u32, a: u32, b: u32, xi: bool) -> Self {
        Self { step, a, b, xi }
    }
}

#[derive(Debug, Clone, Serialize)]
struct TraceLine {
    step: u32,
    a: u32,
    b: u32,
    xi: u8,
}

/// Full record of one coalescent run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalescentTrace {
    merges: Vec<Merge>,
    tree: TreeTopology,
    labels: Vec<Vertex>,
}

impl CoalescentTrace {
    /// Builds a trace from merges in step order `n, n-1, ..., 2`.
    fn from_merges(n: usize, merges: Vec<Merge>) -> Self {
        let mut root_of: Vec<Vertex> = (0..=n as Vertex).collect();
        let mut parent = vec![0; n + 1];
        let mut labels = vec![0; n + 1];
        for m in &merges {
            let ra = root_of[m.a as usize];
            let rb = root_of[m.b as usize];
            let (winner, loser) = if m.xi { (ra, rb) } else { (rb, ra) };
            parent[loser as usize] = winner;
            labels[loser as usize] = m.step;
            root_of[m.a as usize] = winner;
        }
        let root = root_of[1];
        labels[root as usize] = 1;
        Self {
            merges,
            tree: TreeTopology::from_parts_unchecked(parent, root),
            labels,
        }
    }

    /// Replays an explicit sequence of rank merges, one per step
    /// `n, n-1, ..., 2` in that order.
    pub fn from_rank_merges(n: usize, merges: &[RankMerge]) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        if merges.len() != n - 1 {
            return invalid(format!("expected {} merges, got {}", n - 1, merges.len()));
        }
        let mut order: Vec<Vertex> = (1..=n as Vertex).collect();
        let mut out = Vec::with_capacity(n - 1);
        for (idx, m) in merges.iter().enumerate() {
            let step = (n - idx) as u32;
            if m.step != step {
                return invalid(format!(
                    "merge {idx} is for step {}, expected {step}",
                    m.step
                ));
            }
            if !(1 <= m.a && m.a < m.b && m.b <= step) {
                return invalid(format!(
                    "step {step}: need 1 <= a < b <= {step}, got ({}, {})",
                    m.a, m.b
                ));
            }
            let a = order[m.a as usize - 1];
            let b = order.remove(m.b as usize - 1);
            out.push(Merge {
                step,
                a,
                b,
                xi: m.xi,
            });
        }
        Ok(Self::from_merges(n, out))
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Final tree over the original vertex identities.
    pub fn final_tree(&self) -> &TreeTopology {
        &self.tree
    }

    /// Label map indexed by vertex (slot 0 unused).
    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> Vertex {
        self.labels[v as usize]
    }

    /// The final tree relabelled into an increasing tree.
    pub fn relabelled_tree(&self) -> TreeTopology {
        self.tree
            .relabel(&self.labels)
            .expect("coalescent labels form a bijection")
    }

    /// Degree, depth and label of vertex `v` read from the final tree.
    pub fn tree_stats(&self, v: Vertex) -> Result<VertexStats> {
        Ok(VertexStats {
            degree: self.tree.in_degree(v)?,
            depth: self.tree.depth(v)?,
            label: self.labels[v as usize],
        })
    }

    /// Merges in rank form.
    pub fn rank_merges(&self) -> Vec<RankMerge> {
        let mut alive = Fenwick::full(self.n());
        self.merges
            .iter()
            .map(|m| {
                let a = alive.prefix(m.a as usize);
                let b = alive.prefix(m.b as usize);
                alive.remove(m.b as usize);
                RankMerge {
                    step: m.step,
                    a,
                    b,
                    xi: m.xi,
                }
            })
            .collect()
    }

    /// Debug dump: one JSON object per merge with fields `step, a, b, xi`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for m in self.rank_merges() {
            let line = TraceLine {
                step: m.step,
                a: m.a,
                b: m.b,
                xi: m.xi as u8,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Counts of live tree identities, for converting identities to ranks.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        Self { tree }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    fn remove(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }
}

/// Uniform pair of distinct current trees for each step `n..=2`.
fn sample_pairs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(Vertex, Vertex)> {
    let mut alive: Vec<Vertex> = (1..=n as Vertex).collect();
    let mut pairs = Vec::with_capacity(n.saturating_sub(1));
    for j in (2..=n as u32).rev() {
        let p = rng.random_range(0..j) as usize;
        let mut q = rng.random_range(0..j - 1) as usize;
        if q >= p {
            q += 1;
        }
        let (x, y) = (alive[p], alive[q]);
        let (a, b, pos_b) = if x < y { (x, y, q) } else { (y, x, p) };
        alive.swap_remove(pos_b);
        pairs.push((a, b));
    }
    pairs
}

fn sample_flips<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<bool> {
    let mut flips = Vec::with_capacity(count);
    while flips.len() < count {
        let bits = rng.next_u64();
        let take = (count - flips.len()).min(64);
        flips.extend((0..take).map(|i| (bits >> i) & 1 == 1));
    }
    flips
}

fn assemble(n: usize, pairs: &[(Vertex, Vertex)], flips: &[bool]) -> Vec<Merge> {
    pairs
        .iter()
        .zip(flips)
        .enumerate()
        .map(|(idx, (&(a, b), &xi))| Merge {
            step: (n - idx) as u32,
            a,
            b,
            xi,
        })
        .collect()
}

/// Runs the coalescent on `n` vertices.
pub fn run_coalescent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoalescentTrace> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if n > u32::MAX as usize - 1 {
        return invalid("n too large");
    }
    let pairs = sample_pairs(n, rng);
    let flips = sample_flips(pairs.len(), rng);
    Ok(CoalescentTrace::from_merges(n, assemble(n, &pairs, &flips)))
}

/// A step at which a tracked vertex's tree was merged, and whether the new
/// edge pointed away from that tree's root (`flip = h_{i,j}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub step: u32,
    pub flip: bool,
}

/// Selection sets and coin flips of the tracked vertices `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    n: usize,
    /// Per tracked vertex, selections in decreasing step order.
    sets: Vec<Vec<Selection>>,
    tau: u32,
}

impl SelectionRecord {
    fn from_merges<'a>(n: usize, k: usize, merges: impl IntoIterator<Item = &'a Merge>) -> Self {
        let mut tree_of: Vec<Vertex> = (1..=k as Vertex).collect();
        let mut sets = vec![Vec::new(); k];
        let mut tau = 0;
        for m in merges {
            let mut hits = 0;
            for (i, t) in tree_of.iter_mut().enumerate() {
                if *t == m.a || *t == m.b {
                    hits += 1;
                    let lost = if m.xi { *t == m.b } else { *t == m.a };
                    sets[i].push(Selection {
                        step: m.step,
                        flip: lost,
                    });
                    *t = m.a;
                }
            }
            if hits >= 2 && tau == 0 {
                tau = m.step;
            }
        }
        Self { n, sets, tau }
    }

    /// Record for vertices `1..=k` of a trace.
    pub fn from_trace(trace: &CoalescentTrace, k: usize) -> Result<Self> {
        if k == 0 || k > trace.n() {
            return invalid(format!("need 1 <= k <= n, got k = {k}"));
        }
        Ok(Self::from_merges(trace.n(), k, trace.merges()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tracked(&self) -> usize {
        self.sets.len()
    }

    /// Selections of tracked vertex `i` (1-based), in decreasing step order.
    pub fn selections(&self, i: usize) -> Result<&[Selection]> {
        self.sets
            .get(i.wrapping_sub(1))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidState(format!("vertex {i} is not tracked")))
    }

    /// Steps of `S_n(i)` in decreasing order.
    pub fn selection_steps(&self, i: usize) -> Result<Vec<u32>> {
        Ok(self.selections(i)?.iter().map(|s| s.step).collect())
    }
}

/// Selection record for vertices `1..=k` without building the final tree.
pub fn sample_selection<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<SelectionRecord> {
    if n == 0 || k == 0 || k > n {
        return invalid(format!("need 1 <= k <= n, got n = {n}, k = {k}"));
    }
    let pairs = sample_pairs(n, rng);
    let flips = sample_flips(pairs.len(), rng);
    Ok(SelectionRecord::from_merges(
        n,
        k,
        &assemble(n, &pairs, &flips),
    ))
}

/// Degree, depth and label of tracked vertex `i` read off its coin flips:
/// the degree is the initial run of `0` flips, the depth is the number of
/// `1` flips and the label is the largest step with a `1` flip (1 if none).
pub fn stats_from_flips(rec: &SelectionRecord, i: usize) -> Result<VertexStats> {
    let sel = rec.selections(i)?;
    let degree = sel.iter().take_while(|s| !s.flip).count() as u32;
    let depth = sel.iter().filter(|s| s.flip).count() as u32;
    let label = sel.iter().find(|s| s.flip).map_or(1, |s| s.step);
    Ok(VertexStats {
        degree,
        depth,
        label,
    })
}

/// Largest step at which two tracked vertices were selected together, 0 if
/// that never happens.
pub fn tau(rec: &SelectionRecord) -> Result<u32> {
    if rec.tracked() < 2 {
        return invalid("tau needs at least two tracked vertices");
    }
    Ok(rec.tau)
}

/// Selection sets cut at a truncation step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedView {
    pub t_n: u32,
    /// Per tracked vertex, selection steps `>= t_n` in decreasing order.
    pub sets: Vec<Vec<u32>>,
    /// Depth accrued at steps `>= t_n`.
    pub h1: Vec<u32>,
    /// Depth accrued at steps `< t_n`.
    pub h2: Vec<u32>,
}

pub fn truncate(rec: &SelectionRecord, t_n: u32) -> Result<TruncatedView> {
    if t_n < 2 || t_n as usize > rec.n() {
        return invalid(format!("truncation step {t_n} not in [2, {}]", rec.n()));
    }
    let mut view = TruncatedView {
        t_n,
        sets: Vec::new(),
        h1: Vec::new(),
        h2: Vec::new(),
    };
    for sel in &rec.sets {
        let (hi, lo): (Vec<&Selection>, Vec<&Selection>) = sel.iter().partition(|s| s.step >= t_n);
        view.sets.push(hi.iter().map(|s| s.step).collect());
        view.h1.push(hi.iter().filter(|s| s.flip).count() as u32);
        view.h2.push(lo.iter().filter(|s| s.flip).count() as u32);
    }
    Ok(view)
}

fn pairwise_disjoint(sets: &[Vec<u32>]) -> bool {
    let mut all: Vec<u32> = sets.iter().flatten().copied().collect();
    let len = all.len();
    all.sort_unstable();
    all.dedup();
    all.len() == len
}

/// Truncated sets are pairwise disjoint.
pub fn predicate_disjoint(sets: &[Vec<u32>]) -> bool {
    pairwise_disjoint(sets)
}

/// Truncated sets are pairwise disjoint and each size lies within
/// `delta * ln n` of `2 ln n`.
pub fn predicate_b(sets: &[Vec<u32>], n: usize, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 2.0) {
        return invalid(format!("delta = {delta} not in (0, 2)"));
    }
    if n < 2 {
        return invalid("n must be at least 2");
    }
    let ln_n = (n as f64).ln();
    let sizes_ok = sets
        .iter()
        .all(|s| (s.len() as f64 - 2.0 * ln_n).abs() <= delta * ln_n);
    Ok(sizes_ok && pairwise_disjoint(sets))
}

/// Whether truncated selection sets leave room for `d_n(i) >= d_i` for all
/// tracked `i`: the first `d_i` steps of each set must be distinct across
/// vertices, and the shortfall of sets shorter than `d_i` must fit into the
/// `t_n - 2` steps below the truncation.
pub fn predicate_a(sets: &[Vec<u32>], degrees: &[u32], t_n: u32) -> Result<bool> {
    if sets.len() != degrees.len() {
        return invalid("one degree threshold per selection set");
    }
    let windows: Vec<Vec<u32>> = sets
        .iter()
        .zip(degrees)
        .map(|(s, &d)| s.iter().take(d as usize).copied().collect())
        .collect();
    let shortfall: u64 = sets
        .iter()
        .zip(degrees)
        .map(|(s, &d)| (d as u64).saturating_sub(s.len() as u64))
        .sum();
    Ok(pairwise_disjoint(&windows) && shortfall <= t_n.saturating_sub(2) as u64)
}

/// A trace drawn from the coalescent conditioned on `d_n(i) >= d_i` for the
/// tracked vertices `1..=k`.
#[derive(Debug, Clone)]
pub struct ConditionalSample {
    pub trace: CoalescentTrace,
    pub record: SelectionRecord,
    /// Number of merge sequences drawn, including the accepted one.
    pub attempts: u64,
}

/// Samples the coalescent conditioned on `d_n(i) >= degrees[i - 1]` for
/// `i = 1..=k`, where `k = degrees.len()`.
///
/// Selection sets depend only on which trees merge, never on edge
/// directions. Given the merges, the event holds iff the first `d_i`
/// selections of every tracked vertex are won; when those steps are distinct
/// across vertices this has probability `2^(-sum d_i)` regardless of the
/// merges, and otherwise it is impossible. Merge sequences are therefore
/// drawn until the windows are distinct, the window flips are forced and
/// every other flip stays fair.
pub fn sample_conditional_degrees<R: Rng + ?Sized>(
    n: usize,
    degrees: &[u32],
    rng: &mut R,
) -> Result<ConditionalSample> {
    let k = degrees.len();
    if n == 0 || k == 0 || k > n {
        return invalid(format!("need 1 <= k <= n, got n = {n}, k = {k}"));
    }
    let total: u64 = degrees.iter().map(|&d| d as u64).sum();
    if degrees.iter().any(|&d| d as usize >= n) || total > n as u64 - 1 {
        return Err(Error::UnsatisfiableCondition(format!(
            "degrees {degrees:?} cannot all be reached with n = {n}"
        )));
    }
    let mut forced: Vec<(usize, bool)> = Vec::with_capacity(total as usize);
    let mut tree_of: Vec<Vertex> = Vec::with_capacity(k);
    let mut wins_needed: Vec<u32> = Vec::with_capacity(k);
    for attempt in 1..=CONDITIONAL_RETRY_BUDGET {
        let pairs = sample_pairs(n, rng);
        forced.clear();
        tree_of.clear();
        tree_of.extend(1..=k as Vertex);
        wins_needed.clear();
        wins_needed.extend_from_slice(degrees);
        let mut open = degrees.iter().filter(|&&d| d > 0).count();
        let mut clash = false;
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            if open == 0 {
                break;
            }
            let mut claimed = false;
            for (t, need) in tree_of.iter_mut().zip(wins_needed.iter_mut()) {
                if *t != a && *t != b {
                    continue;
                }
                if *need > 0 {
                    if claimed {
                        clash = true;
                        break;
                    }
                    claimed = true;
                    forced.push((idx, *t == a));
                    *need -= 1;
                    if *need == 0 {
                        open -= 1;
                    }
                }
                *t = a;
            }
            if clash {
                break;
            }
        }
        if clash || open > 0 {
            continue;
        }
        let mut flips = sample_flips(pairs.len(), rng);
        for &(idx, xi) in &forced {
            flips[idx] = xi;
        }
        let trace = CoalescentTrace::from_merges(n, assemble(n, &pairs, &flips));
        let record = SelectionRecord::from_merges(n, k, trace.merges());
        return Ok(ConditionalSample {
            trace,
            record,
            attempts: attempt,
        });
    }
    Err(Error::UnsatisfiableCondition(format!(
        "no admissible merge sequence for degrees {degrees:?} at n = {n} after {CONDITIONAL_RETRY_BUDGET} attempts"
    )))
}
