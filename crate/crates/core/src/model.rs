//! Datasets, partitions, ensembles and seeded randomness.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;

/// Real-valued feature matrix, one row per object, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    feature_names: Vec<String>,
    n: usize,
    d: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values. Rejects empty shapes and
    /// non-finite cells (missing values are not imputed).
    pub fn new(values: Vec<f64>, n: usize, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix needs at least one row and one column, got {n}x{d}"
            )));
        }
        if values.len() != n * d {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {n}x{d} matrix, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "missing or non-finite value at row {}, column {}",
                pos / d + 1,
                feature_names[pos % d]
            )));
        }
        Ok(DataMatrix {
            values,
            feature_names,
            n,
            d,
        })
    }

    /// Builds a matrix from rows, naming the features `f1..fd`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rows[bad].len(),
            });
        }
        let names = (1..=d).map(|j| format!("f{j}")).collect();
        DataMatrix::new(rows.concat(), rows.len(), names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range for {} rows",
                    self.n
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        DataMatrix::new(values, indices.len(), self.feature_names.clone())
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }
}

/// A partition of `n` objects, stored with dense labels `1..=k` numbered in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<u32>,
    k: usize,
}

impl Clustering {
    /// Canonicalizes arbitrary integer labels.
    pub fn new<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("empty label vector".into()));
        }
        let mut map: HashMap<L, u32> = HashMap::new();
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = map.len() as u32 + 1;
            out.push(*map.entry(l).or_insert(next));
        }
        Ok(Clustering {
            k: map.len(),
            labels: out,
        })
    }

    /// Canonicalizes labels known to be small non-negative integers. Faster
    /// than [`Clustering::new`] because it avoids hashing.
    pub(crate) fn from_small_labels(labels: &[u32]) -> Self {
        debug_assert!(!labels.is_empty());
        let max = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut map = vec![0u32; max + 1];
        let mut k = 0u32;
        let out = labels
            .iter()
            .map(|&l| {
                let slot = &mut map[l as usize];
                if *slot == 0 {
                    k += 1;
                    *slot = k;
                }
                *slot
            })
            .collect();
        Clustering {
            labels: out,
            k: k as usize,
        }
    }

    /// Single-cluster partition of `n` objects.
    pub fn single(n: usize) -> Result<Self> {
        Clustering::new(&vec![1u32; n])
    }

    /// Every object in its own cluster.
    pub fn singletons(n: usize) -> Result<Self> {
        let labels: Vec<u32> = (1..=n as u32).collect();
        Clustering::new(&labels)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of objects in each cluster, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l as usize - 1] += 1;
        }
        sizes
    }
}

impl std::fmt::Display for Clustering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Renumbers labels `1..=k` in order of first appearance.
pub fn canonicalize(labels: &[u32]) -> Result<Clustering> {
    Clustering::new(labels)
}

/// True iff both clusterings induce the same co-membership relation.
pub fn partition_equal(a: &Clustering, b: &Clustering) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            expected: a.n(),
            actual: b.n(),
        });
    }
    // Both sides are canonical, so equivalence is plain equality.
    Ok(a.labels == b.labels)
}

/// Ordered collection of clusterings over the same objects, with the
/// pairwise ARI matrix computed once at construction.
#[derive(Debug, Clone)]
pub struct ClusteringEnsemble {
    members: Vec<Clustering>,
    similarity: Option<Vec<f64>>,
}

impl ClusteringEnsemble {
    pub fn new(members: Vec<Clustering>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidInput("ensemble has no members".into()));
        };
        let n = first.n();
        if let Some(bad) = members.iter().find(|c| c.n() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: bad.n(),
            });
        }
        let similarity = if members.len() >= 2 && n >= 2 {
            Some(metrics::pairwise_ari(&members)?)
        } else {
            None
        };
        Ok(ClusteringEnsemble {
            members,
            similarity,
        })
    }

    pub fn members(&self) -> &[Clustering] {
        &self.members
    }

    pub fn member(&self, p: usize) -> &Clustering {
        &self.members[p]
    }

    /// Ensemble size.
    pub fn m(&self) -> usize {
        self.members.len()
    }

    /// Number of objects.
    pub fn n(&self) -> usize {
        self.members[0].n()
    }

    /// Cached `ARI(c_p, c_q)`, or `None` for single-member ensembles.
    pub fn similarity(&self, p: usize, q: usize) -> Option<f64> {
        self.similarity
            .as_ref()
            .map(|s| s[p * self.members.len() + q])
    }

    /// Row-major `m x m` similarity matrix, when available.
    pub fn similarity_matrix(&self) -> Option<&[f64]> {
        self.similarity.as_deref()
    }

    pub fn into_members(self) -> Vec<Clustering> {
        self.members
    }
}

/// Root of the deterministic randomness hierarchy. Every stochastic step
/// derives a child seed from a fixed tag, so components can be rerun in
/// isolation and parallel tasks never share a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn new(seed: u64) -> Self {
        RandomSeed(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Independent seed for sub-stream `tag`.
    pub fn child(self, tag: u64) -> RandomSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(tag.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RandomSeed(z ^ (z >> 31))
    }

    /// Seed for a named sub-stream.
    pub fn named(self, name: &str) -> RandomSeed {
        // FNV-1a: stable across platforms and releases, unlike std's hasher.
        let tag = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        });
        self.child(tag)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
