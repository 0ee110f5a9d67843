//! Nearest-centroid mapping of new points onto a consensus partition, and
//! the k-nearest-neighbour alternative.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, DataMatrix};
use crate::scaling::{Scaler, Scaling};

/// Version written to and accepted from model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Training rows kept in the model so it can also answer kNN queries.
/// Rows are stored already scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub k: usize,
    pub d: usize,
    pub scaler: Scaler,
    /// Cluster means in scaled space; row `l - 1` belongs to label `l`.
    pub centroids: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingSet>,
}

/// Per-cluster means of `data` (already in the space they are used in).
fn cluster_means(data: &DataMatrix, consensus: &Clustering) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; data.d()]; consensus.k()];
    let sizes = consensus.sizes();
    for (row, &l) in data.rows().zip(consensus.labels()) {
        for (s, x) in sums[l as usize - 1].iter_mut().zip(row) {
            *s += x;
        }
    }
    for (sum, &size) in sums.iter_mut().zip(&sizes) {
        sum.iter_mut().for_each(|v| *v /= size as f64);
    }
    sums
}

/// Fits the cluster means after scaling the columns with `scaling`; the
/// scaling parameters are stored so new points are mapped into the same
/// space.
pub fn fit_centroids(
    data: &DataMatrix,
    consensus: &Clustering,
    scaling: Scaling,
) -> Result<CentroidModel> {
    if consensus.n() != data.n() {
        return Err(Error::SizeMismatch {
            expected: data.n(),
            actual: consensus.n(),
        });
    }
    let scaler = Scaler::fit(data, scaling);
    let scaled = scaler.transform(data)?;
    Ok(CentroidModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: data.feature_names().to_vec(),
        k: consensus.k(),
        d: data.d(),
        centroids: cluster_means(&scaled, consensus),
        scaler,
        training: None,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_label(centroids: &[Vec<f64>], x: &[f64]) -> u32 {
    let mut best = (0, f64::INFINITY);
    for (l, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (l, d);
        }
    }
    best.0 as u32 + 1
}

/// Majority label among the `k_nn` nearest rows. Distance ties go to the
/// lower row index; vote ties go to the label of the nearest tied row.
fn knn_vote<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    labels: &[u32],
    x: &[f64],
    k_nn: usize,
) -> u32 {
    let mut dist: Vec<(f64, usize)> = rows.enumerate().map(|(i, r)| (sq_dist(r, x), i)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbours = &dist[..k_nn];
    let max_label = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut votes = vec![0usize; max_label + 1];
    for &(_, i) in neighbours {
        votes[labels[i] as usize] += 1;
    }
    let top = votes.iter().copied().max().unwrap_or(0);
    neighbours
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|&l| votes[l as usize] == top)
        .unwrap()
}

impl CentroidModel {
    /// Centroid of label `l` in the original feature units.
    pub fn centroid_raw(&self, l: u32) -> Vec<f64> {
        let c = &self.centroids[l as usize - 1];
        c.iter()
            .zip(self.scaler.offset.iter().zip(&self.scaler.scale))
            .map(|(v, (o, s))| v * s + o)
            .collect()
    }

    /// Label of the nearest centroid (Euclidean, scaled space); ties go to
    /// the smallest label.
    pub fn assign(&self, x: &[f64]) -> Result<u32> {
        let scaled = self.scaler.transform_row(x)?;
        Ok(nearest_label(&self.centroids, &scaled))
    }

    /// Keeps the (scaled) training set for [`CentroidModel::knn_assign`].
    pub fn with_training(mut self, data: &DataMatrix, consensus: &Clustering) -> Result<Self> {
        if consensus.n() != data.n() {
            return Err(Error::SizeMismatch {
                expected: data.n(),
                actual: consensus.n(),
            });
        }
        let rows = data
            .rows()
            .map(|r| self.scaler.transform_row(r))
            .collect::<Result<_>>()?;
        self.training = Some(TrainingSet {
            rows,
            labels: consensus.labels().to_vec(),
        });
        Ok(self)
    }

    /// kNN vote against the stored training set, in scaled space.
    pub fn knn_assign(&self, x: &[f64], k_nn: usize) -> Result<u32> {
        let training = self.training.as_ref().ok_or_else(|| {
            Error::Config("model has no training rows; kNN assignment is unavailable".into())
        })?;
        let n = training.rows.len();
        if k_nn == 0 || k_nn > n {
            return Err(Error::Config(format!(
                "k-nn must be in 1..={n}, got {k_nn}"
            )));
        }
        let scaled = self.scaler.transform_row(x)?;
        Ok(knn_vote(
            training.rows.iter().map(Vec::as_slice),
            &training.labels,
            &scaled,
            k_nn,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize model: {e}")))
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let model: CentroidModel =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::parse(
                path,
                format!(
                    "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                    model.format_version
                ),
            ));
        }
        let consistent = model.centroids.len() == model.k
            && model.centroids.iter().all(|c| c.len() == model.d)
            && model.scaler.d() == model.d
            && model.feature_names.len() == model.d
            && model.centroids.iter().flatten().all(|v| v.is_finite());
        if !consistent || model.k == 0 {
            return Err(Error::parse(path, "model dimensions are inconsistent"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CentroidModel::from_json(&text, path)
    }
}

/// Majority label among the `k_nn` training rows nearest to `x`.
pub fn knn_assign(
    data: &DataMatrix,
    consensus: &Clustering,
    x: &[f64],
    k_nn: usize,
) -> Result<u32> {
    if consensus.n() != data.n() {
        return Err(Error::SizeMismatch {
            expected: data.n(),
            actual: consensus.n(),
        });
    }
    if x.len() != data.d() {
        return Err(Error::DimensionMismatch {
            expected: data.d(),
            actual: x.len(),
        });
    }
    if k_nn == 0 || k_nn > data.n() {
        return Err(Error::InvalidInput(format!(
            "k-nn must be in 1..={}, got {k_nn}",
            data.n()
        )));
    }
    Ok(knn_vote(data.rows(), consensus.labels(), x, k_nn))
}
