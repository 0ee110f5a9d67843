//! Pair-counting agreement between partitions.
//!
//! All pair counts are accumulated as exact 128-bit integers; the only
//! floating-point step in [`adjusted_rand_index`] is the final ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, ClusteringEnsemble};
use crate::par;

/// Co-occurrence counts between the clusters of two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// `n_ij`, with 1-based labels as in the partitions.
    pub fn count(&self, i: u32, j: u32) -> u64 {
        self.counts[(i as usize - 1) * self.cols + (j as usize - 1)]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Counts as nested rows, mostly for display and tests.
    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.cols).map(<[u64]>::to_vec).collect()
    }
}

pub fn contingency(a: &Clustering, b: &Clustering) -> Result<ContingencyTable> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            expected: a.n(),
            actual: b.n(),
        });
    }
    let (rows, cols) = (a.k(), b.k());
    let mut counts = vec![0u64; rows * cols];
    let mut row_sums = vec![0u64; rows];
    let mut col_sums = vec![0u64; cols];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        let (i, j) = (la as usize - 1, lb as usize - 1);
        counts[i * cols + j] += 1;
        row_sums[i] += 1;
        col_sums[j] += 1;
    }
    Ok(ContingencyTable {
        counts,
        rows,
        cols,
        row_sums,
        col_sums,
        total: a.n() as u64,
    })
}

#[inline]
fn pairs(x: u64) -> u128 {
    let x = u128::from(x);
    x * x.saturating_sub(1) / 2
}

/// Hubert-Arabie adjusted Rand index.
///
/// When the chance-corrected denominator vanishes (both partitions are all
/// singletons or both are a single cluster) the index is 1.0 for equal
/// partitions and 0.0 otherwise.
pub fn adjusted_rand_index(a: &Clustering, b: &Clustering) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            expected: a.n(),
            actual: b.n(),
        });
    }
    if a.n() < 2 {
        return Err(Error::InvalidInput(
            "adjusted Rand index needs at least two objects".into(),
        ));
    }
    let table = contingency(a, b)?;
    let index: u128 = table.counts.iter().map(|&c| pairs(c)).sum();
    let sum_a: u128 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_b: u128 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let total = pairs(table.total);

    // ARI = (index - sum_a*sum_b/total) / ((sum_a+sum_b)/2 - sum_a*sum_b/total).
    // Multiplying through by 2*total keeps numerator and denominator integral.
    let prod = sum_a * sum_b;
    let num = 2 * (index * total) as i128 - 2 * prod as i128;
    let den = ((sum_a + sum_b) * total) as i128 - 2 * prod as i128;
    if den == 0 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

/// Row-major `m x m` matrix of member-to-member ARI, computed in parallel
/// over the upper triangle.
pub(crate) fn pairwise_ari(members: &[Clustering]) -> Result<Vec<f64>> {
    let m = members.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let values = par::map_slice(&pairs, |&(i, j)| {
        adjusted_rand_index(&members[i], &members[j])
    });
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        out[i * m + i] = 1.0;
    }
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        out[i * m + j] = v;
        out[j * m + i] = v;
    }
    Ok(out)
}

/// `M[i][j] = ARI(c_i, c_j)` over the whole ensemble.
pub fn ensemble_similarity_matrix(e: &ClusteringEnsemble) -> Result<Vec<Vec<f64>>> {
    let m = e.m();
    let flat = match e.similarity_matrix() {
        Some(s) => s.to_vec(),
        None if m >= 2 => pairwise_ari(e.members())?,
        None => {
            return Err(Error::InvalidInput(
                "similarity matrix needs at least two members".into(),
            ))
        }
    };
    Ok(flat.chunks(m).map(<[f64]>::to_vec).collect())
}

/// Mean ARI of member `p` against every other member.
pub fn quality_weight(e: &ClusteringEnsemble, p: usize) -> Result<f64> {
    let m = e.m();
    if m < 2 {
        return Err(Error::InvalidInput(
            "quality weight needs at least two members".into(),
        ));
    }
    if p >= m {
        return Err(Error::InvalidInput(format!(
            "member index {p} out of range for ensemble of {m}"
        )));
    }
    let row = match e.similarity_matrix() {
        Some(s) => s[p * m..(p + 1) * m].to_vec(),
        None => ensemble_similarity_matrix(e)?.swap_remove(p),
    };
    let sum: f64 = row
        .iter()
        .enumerate()
        .filter(|&(q, _)| q != p)
        .map(|(_, v)| v)
        .sum();
    Ok(sum / (m - 1) as f64)
}

/// Quality weight of every member, in member order.
pub fn quality_weights(e: &ClusteringEnsemble) -> Result<Vec<f64>> {
    (0..e.m()).map(|p| quality_weight(e, p)).collect()
}

/// The two consensus objectives: mean ARI to the ensemble (maximized) and
/// its population standard deviation (minimized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub mean_ari: f64,
    pub std_ari: f64,
}

impl ObjectiveVector {
    pub fn new(mean_ari: f64, std_ari: f64) -> Self {
        ObjectiveVector { mean_ari, std_ari }
    }

    /// Mean and population standard deviation of `values`.
    pub fn from_values(values: &[f64]) -> Self {
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
        ObjectiveVector {
            mean_ari: mean,
            std_ari: var.sqrt(),
        }
    }
}

/// Per-member ARI of `candidate` against every ensemble member.
pub fn member_similarities(candidate: &Clustering, e: &ClusteringEnsemble) -> Result<Vec<f64>> {
    e.members()
        .iter()
        .map(|c| adjusted_rand_index(candidate, c))
        .collect()
}

pub fn objectives(candidate: &Clustering, e: &ClusteringEnsemble) -> Result<ObjectiveVector> {
    if candidate.n() != e.n() {
        return Err(Error::SizeMismatch {
            expected: e.n(),
            actual: candidate.n(),
        });
    }
    if e.m() < 2 {
        return Err(Error::InvalidInput(
            "objectives need an ensemble of at least two members".into(),
        ));
    }
    Ok(ObjectiveVector::from_values(&member_similarities(
        candidate, e,
    )?))
}
