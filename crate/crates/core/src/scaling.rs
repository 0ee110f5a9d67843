//! Per-column feature scaling shared by k-means and the mapping model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    None,
    /// Maps each column onto `[0, 1]`.
    #[default]
    MinMax,
    /// Zero mean, unit population standard deviation.
    ZScore,
}

impl std::str::FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Scaling::None),
            "min-max" | "minmax" => Ok(Scaling::MinMax),
            "z-score" | "zscore" => Ok(Scaling::ZScore),
            other => Err(Error::Config(format!(
                "unknown scaling '{other}' (expected none, min-max or z-score)"
            ))),
        }
    }
}

/// Fitted affine transform `(x - offset) / scale` per column. Constant
/// columns get scale 1 so they map to zero instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub method: Scaling,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(data: &DataMatrix, method: Scaling) -> Self {
        let d = data.d();
        let n = data.n() as f64;
        let (offset, scale) = match method {
            Scaling::None => (vec![0.0; d], vec![1.0; d]),
            Scaling::MinMax => {
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for row in data.rows() {
                    for j in 0..d {
                        lo[j] = lo[j].min(row[j]);
                        hi[j] = hi[j].max(row[j]);
                    }
                }
                let scale = lo.iter().zip(&hi).map(|(l, h)| nonzero(h - l)).collect();
                (lo, scale)
            }
            Scaling::ZScore => {
                let mut mean = vec![0.0; d];
                for row in data.rows() {
                    for j in 0..d {
                        mean[j] += row[j];
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n);
                let mut var = vec![0.0; d];
                for row in data.rows() {
                    for j in 0..d {
                        var[j] += (row[j] - mean[j]).powi(2);
                    }
                }
                let scale = var.iter().map(|v| nonzero((v / n).sqrt())).collect();
                (mean, scale)
            }
        };
        Scaler {
            method,
            offset,
            scale,
        }
    }

    pub fn d(&self) -> usize {
        self.offset.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| (x - o) / s)
            .collect())
    }

    pub fn transform(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: data.d(),
            });
        }
        let mut values = Vec::with_capacity(data.values().len());
        for row in data.rows() {
            values.extend(self.transform_row(row)?);
        }
        DataMatrix::new(values, data.n(), data.feature_names().to_vec())
    }
}

fn nonzero(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        1.0
    }
}
