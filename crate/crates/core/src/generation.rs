//! Base ensemble generation: stratified subsampling and k-means over
//! random feature subspaces.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, ClusteringEnsemble, DataMatrix, RandomSeed};
use crate::par;
use crate::scaling::{Scaler, Scaling};

/// Hard cap on Lloyd iterations.
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratificationPlan {
    pub bins_per_feature: usize,
    pub sample_size: usize,
    /// Columns defining the strata; empty means the first (up to) three.
    pub features: Vec<usize>,
    /// Strata smaller than this are merged into their nearest neighbour.
    pub min_stratum_size: usize,
}

impl StratificationPlan {
    pub fn new(sample_size: usize) -> Self {
        StratificationPlan {
            bins_per_feature: 4,
            sample_size,
            features: Vec::new(),
            min_stratum_size: 2,
        }
    }

    fn resolved_features(&self, d: usize) -> Result<Vec<usize>> {
        if self.features.is_empty() {
            return Ok((0..d.min(3)).collect());
        }
        if let Some(&bad) = self.features.iter().find(|&&j| j >= d) {
            return Err(Error::Config(format!(
                "stratification feature {bad} out of range for {d} columns"
            )));
        }
        Ok(self.features.clone())
    }
}

/// Equal-width bin index of every object along the selected columns.
fn bin_keys(data: &DataMatrix, features: &[usize], bins: usize) -> Vec<Vec<usize>> {
    let ranges: Vec<(f64, f64)> = features
        .iter()
        .map(|&j| {
            let col = data.column(j);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    data.rows()
        .map(|row| {
            features
                .iter()
                .zip(&ranges)
                .map(|(&j, &(lo, hi))| {
                    if hi > lo {
                        (((row[j] - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Groups objects into strata, folding undersized strata into the nearest
/// (L1 over bin indices, then smallest key) adequately sized one.
fn build_strata(keys: Vec<Vec<usize>>, min_size: usize) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut strata: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.into_iter().enumerate() {
        strata.entry(key).or_default().push(i);
    }
    let (sparse, dense): (Vec<_>, Vec<_>) = strata
        .keys()
        .cloned()
        .partition(|k| strata[k].len() < min_size);
    if dense.is_empty() {
        return strata;
    }
    for key in sparse {
        let target = dense
            .iter()
            .min_by_key(|d| {
                d.iter()
                    .zip(&key)
                    .map(|(a, b)| a.abs_diff(*b))
                    .sum::<usize>()
            })
            .unwrap()
            .clone();
        let moved = strata.remove(&key).unwrap();
        let dest = strata.get_mut(&target).unwrap();
        dest.extend(moved);
        dest.sort_unstable();
    }
    strata
}

/// Proportional allocation with largest-remainder rounding. Ties in the
/// remainder go to the earlier stratum.
pub fn allocate(sizes: &[usize], sample_size: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quota: Vec<usize> = sizes.iter().map(|&s| s * sample_size / total).collect();
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = sizes[a] * sample_size % total;
        let rb = sizes[b] * sample_size % total;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &s in order.iter().take(sample_size - assigned) {
        quota[s] += 1;
    }
    quota
}

/// Row indices (ascending) of a stratified sample without replacement.
pub fn stratified_sample_indices<R: Rng + ?Sized>(
    data: &DataMatrix,
    plan: &StratificationPlan,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if plan.sample_size > data.n() {
        return Err(Error::Config(format!(
            "sample size {} exceeds the {} available rows",
            plan.sample_size,
            data.n()
        )));
    }
    if plan.sample_size == 0 || plan.bins_per_feature == 0 {
        return Err(Error::Config(
            "sample size and bins per feature must be positive".into(),
        ));
    }
    let features = plan.resolved_features(data.d())?;
    let strata = build_strata(
        bin_keys(data, &features, plan.bins_per_feature),
        plan.min_stratum_size,
    );
    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let quota = allocate(&sizes, plan.sample_size);
    let mut picked = Vec::with_capacity(plan.sample_size);
    for (members, q) in strata.values().zip(quota) {
        picked.extend(
            sample(rng, members.len(), q)
                .into_iter()
                .map(|i| members[i]),
        );
    }
    picked.sort_unstable();
    Ok(picked)
}

pub fn stratified_sample<R: Rng + ?Sized>(
    data: &DataMatrix,
    plan: &StratificationPlan,
    rng: &mut R,
) -> Result<DataMatrix> {
    let rows = stratified_sample_indices(data, plan, rng)?;
    data.select_rows(&rows)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = points[next].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Moves, for each empty cluster, the point farthest from its centroid
/// (taken from clusters with more than one member) into it.
fn repair_empty(points: &[Vec<f64>], labels: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[labels[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let Some((i, _)) = far else { break };
        sizes[labels[i]] -= 1;
        labels[i] = empty;
        sizes[empty] = 1;
        centroids[empty] = points[i].clone();
    }
}

fn update_centroids(points: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    for ((c, s), &cnt) in centroids.iter_mut().zip(sums).zip(&counts) {
        if cnt > 0 {
            *c = s.into_iter().map(|v| v / cnt as f64).collect();
        }
    }
}

/// Lloyd's algorithm with k-means++ seeding on the given feature subset,
/// after scaling the columns with `scaling`.
pub fn kmeans_scaled<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    feature_subset: &[usize],
    scaling: Scaling,
    rng: &mut R,
) -> Result<Clustering> {
    let n = data.n();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k-means needs 1 <= k <= n ({n}), got k = {k}"
        )));
    }
    if feature_subset.is_empty() {
        return Err(Error::InvalidInput("empty feature subset".into()));
    }
    if let Some(&bad) = feature_subset.iter().find(|&&j| j >= data.d()) {
        return Err(Error::InvalidInput(format!(
            "feature {bad} out of range for {} columns",
            data.d()
        )));
    }
    let scaled = Scaler::fit(data, scaling).transform(data)?;
    let points: Vec<Vec<f64>> = scaled
        .rows()
        .map(|r| feature_subset.iter().map(|&j| r[j]).collect())
        .collect();

    let mut centroids = plus_plus_seeds(&points, k, rng);
    let mut labels: Vec<usize> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = par::map_slice(&points, |p| nearest(p, &centroids).0);
        repair_empty(&points, &mut next, &mut centroids);
        if next == labels {
            break;
        }
        labels = next;
        update_centroids(&points, &labels, &mut centroids);
    }
    let labels: Vec<u32> = labels.into_iter().map(|l| l as u32).collect();
    Ok(Clustering::from_small_labels(&labels))
}

/// [`kmeans_scaled`] on min-max normalized columns.
pub fn kmeans<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    feature_subset: &[usize],
    rng: &mut R,
) -> Result<Clustering> {
    kmeans_scaled(data, k, feature_subset, Scaling::MinMax, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleProtocol {
    /// Requested cluster count for each run; its length is the number of runs.
    pub k_schedule: Vec<usize>,
    pub subspace_fraction: f64,
    pub scaling: Scaling,
    pub seed: RandomSeed,
}

impl EnsembleProtocol {
    pub fn new(k_schedule: Vec<usize>, seed: RandomSeed) -> Self {
        EnsembleProtocol {
            k_schedule,
            subspace_fraction: 0.7,
            scaling: Scaling::MinMax,
            seed,
        }
    }

    pub fn runs(&self) -> usize {
        self.k_schedule.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_schedule.is_empty() {
            return Err(Error::Config("k schedule is empty".into()));
        }
        if let Some(&k) = self.k_schedule.iter().find(|&&k| k < 2) {
            return Err(Error::Config(format!(
                "every scheduled k must be at least 2, got {k}"
            )));
        }
        if !(self.subspace_fraction > 0.0 && self.subspace_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "subspace fraction must be in (0, 1], got {}",
                self.subspace_fraction
            )));
        }
        Ok(())
    }

    /// Features used by a run: `ceil(fraction * d)` columns, sorted.
    fn subspace_size(&self, d: usize) -> usize {
        ((self.subspace_fraction * d as f64).ceil() as usize).clamp(1, d)
    }
}

/// Parameters and outcome of one generated member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRun {
    pub k_requested: usize,
    pub k: usize,
    pub features: Vec<usize>,
    pub seed: u64,
}

/// Runs one schedule entry: draws the feature subspace and clusters on it,
/// both from the run's own sub-seed.
pub fn generate_member(
    data: &DataMatrix,
    protocol: &EnsembleProtocol,
    run: usize,
) -> Result<(Clustering, MemberRun)> {
    let k = protocol.k_schedule[run];
    let seed = protocol.seed.child(run as u64);
    let mut rng = seed.rng();
    let mut features = sample(&mut rng, data.d(), protocol.subspace_size(data.d())).into_vec();
    features.sort_unstable();
    let clustering = kmeans_scaled(data, k, &features, protocol.scaling, &mut rng)?;
    let info = MemberRun {
        k_requested: k,
        k: clustering.k(),
        features,
        seed: seed.value(),
    };
    Ok((clustering, info))
}

/// Runs every schedule entry (in parallel when enabled).
pub fn generate_ensemble(
    data: &DataMatrix,
    protocol: &EnsembleProtocol,
) -> Result<(ClusteringEnsemble, Vec<MemberRun>)> {
    protocol.validate()?;
    let results = par::map_range(protocol.runs(), |r| generate_member(data, protocol, r));
    let mut members = Vec::with_capacity(results.len());
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        let (c, info) = r?;
        members.push(c);
        runs.push(info);
    }
    Ok((ClusteringEnsemble::new(members)?, runs))
}
