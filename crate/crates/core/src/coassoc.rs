//! Weighted co-association matrix, threshold sweep and cluster-count
//! estimation, plus the evidence-accumulation baseline.
//!
//! The weighted similarity of objects `i` and `j` is
//!
//! ```text
//! Sim(i,j) = sum_p [r_i = r_j]_p * k_p  +  2 w * sum_p [r_i = r_j]_p * q_p
//! ```
//!
//! where `k_p` is the cluster count of member `p`, `q_p` its quality weight
//! (mean ARI to the other members) and `w = mean(k) / mean(q)` brings the two
//! terms onto the same scale.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::quality_weights;
use crate::model::{Clustering, ClusteringEnsemble};
use crate::par;

/// Default denominator for the first threshold, `max_weight / t`.
pub const DEFAULT_T: usize = 10;
/// Default number of thresholds in a sweep.
pub const DEFAULT_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoassocMode {
    /// Cluster-count and quality weighted.
    Weighted,
    /// Plain co-occurrence counts.
    Plain,
}

/// Symmetric `n x n` object similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoassocMatrix {
    sim: Vec<f64>,
    n: usize,
    w: f64,
    mode: CoassocMode,
}

impl WeightedCoassocMatrix {
    /// Wraps a precomputed symmetric matrix.
    pub fn from_dense(sim: Vec<f64>, n: usize, w: f64, mode: CoassocMode) -> Result<Self> {
        if sim.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for an {n}x{n} matrix, got {}",
                n * n,
                sim.len()
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = sim[i * n + j];
                if v != sim[j * n + i] || v < 0.0 || !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "similarity must be symmetric, finite and non-negative at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(WeightedCoassocMatrix { sim, n, w, mode })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Scale factor `w`; 1.0 in plain mode.
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn mode(&self) -> CoassocMode {
        self.mode
    }

    /// Similarity of objects `i` and `j` (0-based).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sim[i * self.n + j]
    }

    /// Largest off-diagonal similarity.
    pub fn max_weight(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                max = max.max(self.sim[i * self.n + j]);
            }
        }
        max
    }

    /// Off-diagonal edges `(weight, i, j)` with positive weight, `i < j`.
    fn edges(&self) -> Vec<(f64, u32, u32)> {
        let n = self.n;
        let rows = par::map_range(n, |i| {
            (i + 1..n)
                .filter_map(|j| {
                    let v = self.sim[i * n + j];
                    (v > 0.0).then_some((v, i as u32, j as u32))
                })
                .collect::<Vec<_>>()
        });
        rows.concat()
    }
}

/// `w = mean(k_p) / mean(q_p)`.
pub fn build_scale_factor(e: &ClusteringEnsemble) -> Result<f64> {
    if e.m() < 2 {
        return Err(Error::InvalidInput(
            "scale factor needs at least two members".into(),
        ));
    }
    let quality = quality_weights(e)?;
    scale_factor_from(e, &quality)
}

fn scale_factor_from(e: &ClusteringEnsemble, quality: &[f64]) -> Result<f64> {
    let m = e.m() as f64;
    let mean_k = e.members().iter().map(|c| c.k() as f64).sum::<f64>() / m;
    let mean_q = quality.iter().sum::<f64>() / m;
    if mean_q <= 0.0 {
        return Err(Error::Degenerate(format!(
            "mean member similarity is {mean_q:.4}; the ensemble is too discordant \
             to weight its co-associations"
        )));
    }
    Ok(mean_k / mean_q)
}

pub fn build_weighted_coassoc(
    e: &ClusteringEnsemble,
    mode: CoassocMode,
) -> Result<WeightedCoassocMatrix> {
    if e.m() < 2 {
        return Err(Error::InvalidInput(
            "co-association needs at least two members".into(),
        ));
    }
    let (per_member, w): (Vec<f64>, f64) = match mode {
        CoassocMode::Plain => (vec![1.0; e.m()], 1.0),
        CoassocMode::Weighted => {
            let quality = quality_weights(e)?;
            let w = scale_factor_from(e, &quality)?;
            let weights = e
                .members()
                .iter()
                .zip(&quality)
                .map(|(c, q)| c.k() as f64 + 2.0 * w * q)
                .collect();
            (weights, w)
        }
    };
    let n = e.n();
    let mut sim = vec![0.0; n * n];
    par::for_each_chunk_mut(&mut sim, n, |i, row| {
        for (c, &weight) in e.members().iter().zip(&per_member) {
            let li = c.label(i);
            for (j, &lj) in c.labels().iter().enumerate() {
                if lj == li && j != i {
                    row[j] += weight;
                }
            }
        }
    });
    Ok(WeightedCoassocMatrix { sim, n, w, mode })
}

struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (ra, rb) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (rb, ra)
        } else {
            (ra, rb)
        };
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        true
    }
}

/// Components of the graph keeping edges with `sim > threshold`.
pub fn connected_components(
    matrix: &WeightedCoassocMatrix,
    threshold: f64,
) -> Result<(usize, Clustering)> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidInput(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let n = matrix.n;
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if matrix.sim[i * n + j] > threshold {
                ds.union(i as u32, j as u32);
            }
        }
    }
    let roots: Vec<u32> = (0..n as u32).map(|i| ds.find(i)).collect();
    let components = Clustering::from_small_labels(&roots);
    Ok((components.k(), components))
}

/// Component counts along an increasing threshold schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult {
    /// `(threshold, component_count)` pairs, thresholds strictly increasing.
    pub steps: Vec<(f64, usize)>,
    /// Longest consecutive run of each component count.
    pub stability: BTreeMap<usize, usize>,
    /// Most stable count; refined by [`estimate_cluster_count`].
    pub estimated_k: usize,
}

impl ThresholdSweepResult {
    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(_, c)| c)
    }

    /// Writes `threshold,component_count` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "threshold,component_count")?;
        for &(t, c) in &self.steps {
            writeln!(out, "{t},{c}")?;
        }
        Ok(())
    }
}

/// Longest consecutive run of every value in `counts`.
pub fn run_stability(counts: &[usize]) -> BTreeMap<usize, usize> {
    let mut stability = BTreeMap::new();
    let mut i = 0;
    while i < counts.len() {
        let mut j = i;
        while j < counts.len() && counts[j] == counts[i] {
            j += 1;
        }
        let best = stability.entry(counts[i]).or_insert(0);
        *best = (*best).max(j - i);
        i = j;
    }
    stability
}

/// Sweeps `steps` evenly spaced thresholds from `max/t` up to `max`
/// inclusive, counting connected components at each.
///
/// The counts come from one maximum spanning forest: a forest edge of
/// weight `x` joins two components exactly for thresholds below `x`, so
/// the component count at `delta` is `n` minus the number of forest edges
/// heavier than `delta`.
pub fn threshold_sweep(
    matrix: &WeightedCoassocMatrix,
    t: usize,
    steps: usize,
) -> Result<ThresholdSweepResult> {
    if t < 2 {
        return Err(Error::Config(format!(
            "sweep divisor t must be >= 2, got {t}"
        )));
    }
    if steps < 2 {
        return Err(Error::Config(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    let max = matrix.max_weight();
    if max <= 0.0 {
        return Err(Error::Degenerate(
            "co-association matrix has no edges; no object pair is ever co-clustered".into(),
        ));
    }
    let mut edges = matrix.edges();
    par::sort_by(&mut edges, |a, b| b.0.total_cmp(&a.0));
    let mut ds = DisjointSet::new(matrix.n);
    let mut forest: Vec<f64> = Vec::with_capacity(matrix.n);
    for &(w, i, j) in &edges {
        if ds.union(i, j) {
            forest.push(w);
        }
    }
    // `forest` is in descending weight order.
    let lo = max / t as f64;
    let span = max - lo;
    let mut out = Vec::with_capacity(steps);
    for s in 0..steps {
        let delta = if s + 1 == steps {
            max
        } else {
            lo + span * s as f64 / (steps - 1) as f64
        };
        let kept = forest.partition_point(|&w| w > delta);
        out.push((delta, matrix.n - kept));
    }
    let counts: Vec<usize> = out.iter().map(|&(_, c)| c).collect();
    let stability = run_stability(&counts);
    let estimated_k = most_stable(&stability, |_| false);
    Ok(ThresholdSweepResult {
        steps: out,
        stability,
        estimated_k,
    })
}

/// Highest-stability count; ties go to a count accepted by `preferred`,
/// otherwise to the smallest count.
fn most_stable(stability: &BTreeMap<usize, usize>, preferred: impl Fn(usize) -> bool) -> usize {
    let top = stability.values().copied().max().unwrap_or(0);
    let tied: Vec<usize> = stability
        .iter()
        .filter(|&(_, &s)| s == top)
        .map(|(&c, _)| c)
        .collect();
    tied.iter()
        .copied()
        .find(|&c| preferred(c))
        .unwrap_or(tied[0])
}

/// Picks the number of clusters from a sweep.
///
/// Candidates are the sweep counts that some member actually has, so the
/// label refinement step always finds a reference member. They are ranked by
/// stability; ties prefer the cluster count of the highest-quality member,
/// then the smaller count. If no sweep count matches a member, the
/// highest-quality member's count is returned.
pub fn estimate_cluster_count(
    e: &ClusteringEnsemble,
    sweep: &ThresholdSweepResult,
) -> Result<usize> {
    if sweep.steps.is_empty() {
        return Err(Error::InvalidInput("empty threshold sweep".into()));
    }
    let best_k = best_member(e)?.k();
    let member_ks: Vec<usize> = e.members().iter().map(Clustering::k).collect();
    let candidates: BTreeMap<usize, usize> = sweep
        .stability
        .iter()
        .filter(|(c, _)| member_ks.contains(c))
        .map(|(&c, &s)| (c, s))
        .collect();
    if candidates.is_empty() {
        return Ok(best_k);
    }
    Ok(most_stable(&candidates, |c| c == best_k))
}

/// Member with the highest quality weight, ties to the lowest index.
pub fn best_member(e: &ClusteringEnsemble) -> Result<&Clustering> {
    if e.m() == 1 {
        return Ok(e.member(0));
    }
    let quality = quality_weights(e)?;
    let mut best = 0;
    for (p, &q) in quality.iter().enumerate() {
        if q > quality[best] {
            best = p;
        }
    }
    Ok(e.member(best))
}

/// Evidence-accumulation baseline: average-linkage agglomeration on
/// `m - co-occurrence` distances, cut at `k` clusters.
pub fn eac_baseline(e: &ClusteringEnsemble, k: usize) -> Result<Clustering> {
    let n = e.n();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "baseline cluster count must be in 1..={n}, got {k}"
        )));
    }
    let m = e.m() as f64;
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let together = e
                .members()
                .iter()
                .filter(|c| c.label(i) == c.label(j))
                .count() as f64;
            condensed.push(m - together);
        }
    }
    average_linkage_cut(condensed, n, k)
}

/// Average-linkage clustering of a condensed distance matrix (row-major
/// upper triangle), stopped once `k` clusters remain.
pub fn average_linkage_cut(mut condensed: Vec<f64>, n: usize, k: usize) -> Result<Clustering> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "cluster count must be in 1..={n}, got {k}"
        )));
    }
    if condensed.len() != n * (n - 1) / 2 {
        return Err(Error::InvalidInput(format!(
            "condensed matrix for {n} objects needs {} entries, got {}",
            n * (n - 1) / 2,
            condensed.len()
        )));
    }
    if n == 1 {
        return Clustering::single(1);
    }
    let dendrogram = kodama::linkage(&mut condensed, n, kodama::Method::Average);
    // kodama labels the cluster created by step s as n + s.
    let mut ds = DisjointSet::new(2 * n - 1);
    for (s, step) in dendrogram.steps().iter().take(n - k).enumerate() {
        let merged = (n + s) as u32;
        ds.union(merged, step.cluster1 as u32);
        ds.union(merged, step.cluster2 as u32);
    }
    let roots: Vec<u32> = (0..n as u32).map(|i| ds.find(i)).collect();
    Ok(Clustering::from_small_labels(&roots))
}
