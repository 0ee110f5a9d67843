//! CSV features and labels, and the ensemble manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generation::MemberRun;
use crate::model::{Clustering, ClusteringEnsemble, DataMatrix};

fn open_csv(path: &Path, has_headers: bool) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Header plus numeric rows. An empty file yields no header and no rows.
pub fn read_points_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = open_csv(path, true)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let mut row = Vec::with_capacity(header.len());
        for (j, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::parse(
                    path,
                    format!("missing value at row {}, column '{}'", r + 1, header[j]),
                ));
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!(
                        "non-numeric value '{cell}' at row {}, column '{}'",
                        r + 1,
                        header[j]
                    ),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    format!("non-finite value at row {}, column '{}'", r + 1, header[j]),
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Feature matrix from a CSV with a header row of feature names.
pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    let (header, rows) = read_points_csv(path)?;
    if rows.is_empty() {
        return Err(Error::parse(path, "dataset has no rows"));
    }
    let n = rows.len();
    DataMatrix::new(rows.concat(), n, header).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_data_csv<W: Write>(data: &DataMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::InvalidInput(format!("cannot write CSV: {e}"));
    w.write_record(data.feature_names()).map_err(fail)?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(fail)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("cannot write CSV: {e}")))
}

/// Single-column integer labels, with an optional `label` header.
pub fn read_labels_csv(path: &Path) -> Result<Clustering> {
    let mut reader = open_csv(path, false)?;
    let mut labels: Vec<i64> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let cell = record.get(0).unwrap_or("");
        if r == 0 && cell.eq_ignore_ascii_case("label") {
            continue;
        }
        let label = cell
            .parse()
            .map_err(|_| Error::parse(path, format!("invalid label '{cell}' on line {}", r + 1)))?;
        labels.push(label);
    }
    Clustering::new(&labels).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_labels_csv<W: Write>(labels: &[u32], mut out: W) -> std::io::Result<()> {
    writeln!(out, "label")?;
    for l in labels {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMember {
    /// Labels file, relative to the manifest.
    pub file: String,
    pub k_requested: usize,
    pub k: usize,
    /// 0-based feature columns used by the run.
    pub features: Vec<usize>,
    pub seed: u64,
}

/// Index of an ensemble on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub format_version: u32,
    pub seed: u64,
    pub subspace_fraction: f64,
    pub scaling: String,
    /// Data the members cluster (relative to the manifest), if written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    pub members: Vec<ManifestMember>,
}

impl EnsembleManifest {
    pub fn from_runs(
        seed: u64,
        subspace_fraction: f64,
        scaling: String,
        data: Option<String>,
        runs: &[MemberRun],
    ) -> Self {
        let width = runs.len().to_string().len().max(2);
        let members = runs
            .iter()
            .enumerate()
            .map(|(i, r)| ManifestMember {
                file: format!("member_{:0width$}.csv", i + 1),
                k_requested: r.k_requested,
                k: r.k,
                features: r.features.clone(),
                seed: r.seed,
            })
            .collect();
        EnsembleManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            seed,
            subspace_fraction,
            scaling,
            data,
            members,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: EnsembleManifest =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported manifest version {}", manifest.format_version),
            ));
        }
        Ok(manifest)
    }

    /// Directory relative paths are resolved against.
    pub fn base_dir(path: &Path) -> PathBuf {
        path.parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Writes the member label files and the manifest into `dir`.
    pub fn write(&self, dir: &Path, ensemble: &ClusteringEnsemble) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (m, c) in self.members.iter().zip(ensemble.members()) {
            let path = dir.join(&m.file);
            write_file(&path, |buf| write_labels_csv(c.labels(), buf))?;
        }
        let path = dir.join("manifest.toml");
        let text = self.to_toml()?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Reads a manifest and every member it lists.
pub fn load_ensemble(manifest_path: &Path) -> Result<(EnsembleManifest, ClusteringEnsemble)> {
    let manifest = EnsembleManifest::load(manifest_path)?;
    let dir = EnsembleManifest::base_dir(manifest_path);
    let members = manifest
        .members
        .iter()
        .map(|m| read_labels_csv(&dir.join(&m.file)))
        .collect::<Result<Vec<_>>>()?;
    if members.is_empty() {
        return Err(Error::parse(manifest_path, "manifest lists no members"));
    }
    let ensemble =
        ClusteringEnsemble::new(members).map_err(|e| Error::parse(manifest_path, e.to_string()))?;
    Ok((manifest, ensemble))
}
