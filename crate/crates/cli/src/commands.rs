use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use consensus_core::generation::{generate_ensemble, stratified_sample_indices};
use consensus_core::io::{
    load_ensemble, read_data_csv, read_points_csv, write_data_csv, write_file, write_labels_csv,
    EnsembleManifest,
};
use consensus_core::mapping::{fit_centroids, CentroidModel};
use consensus_core::metrics::quality_weights;
use consensus_core::pipeline::run_consensus;
use consensus_core::scaling::Scaling;
use consensus_core::{Error, RandomSeed};

use crate::config::{Config, ReportFormat};
use crate::report::{member_table, Report};
use crate::{AssignArgs, AssignMethod, Cli, CliError, Command, ConsensusArgs, GenerateArgs};

pub const DATA_FILE: &str = "data.csv";
pub const MODEL_FILE: &str = "model.json";

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => generate(&args, out),
        Command::Consensus(args) => consensus(&args, out),
        Command::Assign(args) => assign(&args, out),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(())
}

pub fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = Config::load(&args.config)?;
    let seed = args.seed.unwrap_or(config.seed);
    let dir = match (&args.output_dir, &config.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => config.resolve(d),
        (None, None) => config.base_dir.join("ensemble"),
    };
    let data = read_data_csv(&config.dataset_path()?)?;
    let data = match config.sample_size {
        Some(size) => {
            let plan = config.stratification(size, data.feature_names())?;
            let mut rng = RandomSeed(seed).named("sample").rng();
            let rows = stratified_sample_indices(&data, &plan, &mut rng)?;
            data.select_rows(&rows)?
        }
        None => data,
    };
    let protocol = config.protocol(seed);
    let (ensemble, runs) = generate_ensemble(&data, &protocol)?;

    create_dir(&dir)?;
    let data_path = dir.join(DATA_FILE);
    write_file(&data_path, |buf| {
        write_data_csv(&data, buf).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    let scaling = scaling_name(config.scaling);
    let manifest = EnsembleManifest::from_runs(
        seed,
        protocol.subspace_fraction,
        scaling,
        Some(DATA_FILE.to_string()),
        &runs,
    );
    let manifest_path = manifest.write(&dir, &ensemble)?;

    let k: Vec<usize> = ensemble.members().iter().map(|c| c.k()).collect();
    let quality = if ensemble.m() >= 2 {
        quality_weights(&ensemble)?
    } else {
        vec![1.0]
    };
    write!(out, "{}", member_table(&k, &quality))?;
    writeln!(
        out,
        "wrote {} members over {} rows to {}",
        ensemble.m(),
        ensemble.n(),
        manifest_path.display()
    )?;
    Ok(())
}

fn scaling_name(s: Scaling) -> String {
    match s {
        Scaling::None => "none",
        Scaling::MinMax => "min-max",
        Scaling::ZScore => "z-score",
    }
    .to_string()
}

pub fn consensus(args: &ConsensusArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (manifest, base) = load_ensemble(&args.manifest)?;
    let config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config {
            seed: manifest.seed,
            ..Config::default()
        },
    };
    let seed = args.seed.unwrap_or(config.seed);
    let mut opts = config.consensus_options(seed);
    if let Some(g) = args.generations {
        opts.ga.generations = g;
    }
    if args.population.is_some() {
        opts.ga.population_size = args.population;
    }
    let format = args.format.unwrap_or(config.format);
    let manifest_dir = EnsembleManifest::base_dir(&args.manifest);
    let dir: PathBuf = args
        .output_dir
        .clone()
        .unwrap_or_else(|| manifest_dir.clone());

    let outcome = run_consensus(&base, &opts)?;
    let report = Report::new(&base, &outcome)?;

    create_dir(&dir)?;
    write_file(&dir.join("consensus_labels.csv"), |buf| {
        write_labels_csv(outcome.consensus.labels(), buf)
    })?;
    write_file(&dir.join("pareto_front.csv"), |buf| {
        outcome.front.write_csv(buf)
    })?;
    if args.emit_sweep {
        write_file(&dir.join("sweep.csv"), |buf| outcome.sweep.write_csv(buf))?;
    }
    if args.emit_trace {
        write_file(&dir.join("trace.csv"), |buf| outcome.trace.write_csv(buf))?;
    }
    if let Some(data_file) = &manifest.data {
        let data = read_data_csv(&manifest_dir.join(data_file))?;
        if data.n() != base.n() {
            return Err(Error::SizeMismatch {
                expected: base.n(),
                actual: data.n(),
            }
            .into());
        }
        let scaling: Scaling = manifest.scaling.parse()?;
        let model = fit_centroids(&data, &outcome.consensus, scaling)?
            .with_training(&data, &outcome.consensus)?;
        model.save(&dir.join(MODEL_FILE))?;
    }
    let text = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    let name = match format {
        ReportFormat::Text => "report.txt",
        ReportFormat::Json => "report.json",
    };
    let report_path = dir.join(name);
    fs::write(&report_path, &text).map_err(|e| Error::io(&report_path, e))?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn assign(args: &AssignArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = CentroidModel::load(&args.model)?;
    let (header, rows) = read_points_csv(&args.data)?;
    let mut buf = Vec::new();
    if !header.is_empty() {
        if header.len() != model.d {
            return Err(Error::DimensionMismatch {
                expected: model.d,
                actual: header.len(),
            }
            .into());
        }
        let labels = rows
            .iter()
            .map(|row| match args.method {
                AssignMethod::Centroid => model.assign(row),
                AssignMethod::Knn => model.knn_assign(row, args.k_nn),
            })
            .collect::<consensus_core::Result<Vec<u32>>>()?;
        write_labels_csv(&labels, &mut buf)?;
    }
    match &args.output {
        Some(path) => fs::write(path, &buf).map_err(|e| Error::io(path, e))?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}
