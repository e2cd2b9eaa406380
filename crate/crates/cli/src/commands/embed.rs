//! The embed subcommand: dataset in, coordinate and trace files out.

use std::fs;
use std::path::{Path, PathBuf};

use fuzzydr_core::embed::{train, EmbedMode, InitStrategy, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::args::{parse_scale, EmbedArgs, InitFlag, ModeFlag};
use crate::dataset::{load_input, write_file, write_labels_csv, write_matrix_csv};
use crate::jsonio::write_json;
use crate::svg::SvgScatter;
use crate::CliError;

/// Config-file form of the embed flags; flags override these values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "in")]
    input: Option<String>,
    mode: Option<String>,
    init: Option<String>,
    k: Option<usize>,
    d_o: Option<usize>,
    epochs: Option<usize>,
    batch: Option<usize>,
    neg_rate: Option<usize>,
    alpha0: Option<f64>,
    #[serde(rename = "phiX")]
    phi_x: Option<String>,
    #[serde(rename = "phiY")]
    phi_y: Option<String>,
    seed: Option<u64>,
    out: Option<String>,
    svg: Option<String>,
    has_header: Option<bool>,
    label_col: Option<String>,
}

pub(crate) fn load_file_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Run settings after merging defaults, config file, and flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub input: String,
    pub mode: String,
    pub init: String,
    pub k: usize,
    pub output_dim: usize,
    pub epochs: usize,
    pub batch: usize,
    pub neg_rate: usize,
    pub alpha0: f64,
    pub phi_x: String,
    pub phi_y: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub n: usize,
    pub input_dim: usize,
    pub labeled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputFiles {
    pub embedding: String,
    pub loss: String,
    pub labels: Option<String>,
    pub svg: Option<String>,
}

/// Everything needed to reproduce a run byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub app_version: String,
    pub seed: u64,
    pub config: RunSettings,
    pub dataset: DatasetSummary,
    pub outputs: OutputFiles,
    pub explained_variance: Vec<f64>,
    pub final_loss: Option<f64>,
}

fn parse_mode(raw: &str) -> Result<EmbedMode, CliError> {
    match raw {
        "edge" => Ok(EmbedMode::Edge),
        "triplet" => Ok(EmbedMode::Triplet),
        other => Err(CliError::Usage(format!("unknown mode `{other}`; expected edge or triplet"))),
    }
}

fn parse_init(raw: &str) -> Result<InitStrategy, CliError> {
    match raw {
        "pca" => Ok(InitStrategy::Pca),
        "random" => Ok(InitStrategy::Random),
        other => Err(CliError::Usage(format!("unknown init `{other}`; expected pca or random"))),
    }
}

struct Resolved {
    settings: RunSettings,
    out: PathBuf,
    svg: Option<PathBuf>,
    has_header: bool,
    label_col: Option<String>,
}

fn resolve(args: &EmbedArgs) -> Result<Resolved, CliError> {
    let file: FileConfig = load_file_config(args.config.as_deref())?;
    let input = args
        .input
        .clone()
        .or(file.input)
        .ok_or_else(|| CliError::Usage("--in is required (a CSV path or a generator spec)".into()))?;
    let mode = match args.mode {
        Some(ModeFlag::Edge) => "edge".to_string(),
        Some(ModeFlag::Triplet) => "triplet".to_string(),
        None => file.mode.unwrap_or_else(|| "edge".to_string()),
    };
    let init = match args.init {
        Some(InitFlag::Pca) => "pca".to_string(),
        Some(InitFlag::Random) => "random".to_string(),
        None => file.init.unwrap_or_else(|| "pca".to_string()),
    };
    let out = args
        .out
        .clone()
        .or(file.out.map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("--out is required (an output directory)".into()))?;
    let settings = RunSettings {
        input,
        mode,
        init,
        k: args.k.or(file.k).unwrap_or(15),
        output_dim: args.d_o.or(file.d_o).unwrap_or(2),
        epochs: args.epochs.or(file.epochs).unwrap_or(200),
        batch: args.batch.or(file.batch).unwrap_or(64),
        neg_rate: args.neg_rate.or(file.neg_rate).unwrap_or(5),
        alpha0: file.alpha0.unwrap_or(1.0),
        phi_x: args.phi_x.clone().or(file.phi_x).unwrap_or_else(|| "exponential:nu=1".into()),
        phi_y: args.phi_y.clone().or(file.phi_y).unwrap_or_else(|| "loglogistic:a=1,b=1".into()),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    Ok(Resolved {
        settings,
        out,
        svg: args.svg.clone().or(file.svg.map(PathBuf::from)),
        has_header: args.has_header || file.has_header.unwrap_or(false),
        label_col: args.label_col.clone().or(file.label_col),
    })
}

pub fn run(args: &EmbedArgs) -> Result<(), CliError> {
    let resolved = resolve(args)?;
    let s = &resolved.settings;

    // Fail on bad flag values and unwritable paths before any real work.
    let train_config = TrainConfig {
        mode: parse_mode(&s.mode)?,
        init: parse_init(&s.init)?,
        output_dim: s.output_dim,
        k: s.k,
        epochs: s.epochs,
        batch: s.batch,
        neg_rate: s.neg_rate,
        alpha0: s.alpha0,
        phi_x: parse_scale(&s.phi_x)?,
        phi_y: parse_scale(&s.phi_y)?,
        seed: s.seed,
    };
    fs::create_dir_all(&resolved.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", resolved.out.display())))?;
    if let Some(svg) = &resolved.svg {
        if let Some(parent) = svg.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.is_dir() {
                return Err(CliError::Data(format!(
                    "SVG directory {} does not exist",
                    parent.display()
                )));
            }
        }
    }

    let data = load_input(&s.input, resolved.has_header, resolved.label_col.as_deref(), s.seed)?;
    let result = train(&data.points, &train_config)?;

    write_matrix_csv(&resolved.out.join("embedding.csv"), &result.coords)?;
    let mut loss = String::from("epoch,loss\n");
    for (epoch, value) in result.loss_history.iter().enumerate() {
        loss.push_str(&format!("{epoch},{value}\n"));
    }
    write_file(&resolved.out.join("loss.csv"), loss.as_bytes())?;
    if let Some(labels) = &data.labels {
        write_labels_csv(&resolved.out.join("labels.csv"), labels)?;
    }
    if let Some(svg_path) = &resolved.svg {
        let doc = SvgScatter::default().render(&result.coords, data.labels.as_deref());
        write_file(svg_path, doc.as_bytes())?;
    }

    let manifest = Manifest {
        command: "embed".into(),
        app_version: env!("CARGO_PKG_VERSION").into(),
        seed: s.seed,
        config: resolved.settings.clone(),
        dataset: DatasetSummary {
            n: data.points.rows(),
            input_dim: data.points.cols(),
            labeled: data.labels.is_some(),
        },
        outputs: OutputFiles {
            embedding: "embedding.csv".into(),
            loss: "loss.csv".into(),
            labels: data.labels.as_ref().map(|_| "labels.csv".into()),
            svg: resolved.svg.as_ref().map(|p| p.display().to_string()),
        },
        explained_variance: result.explained_variance.clone(),
        final_loss: result.loss_history.last().copied(),
    };
    write_json(&resolved.out.join("manifest.json"), &manifest)?;

    println!(
        "embedded {} points into {} dims over {} epochs; wrote embedding.csv, loss.csv, manifest.json to {}",
        data.points.rows(),
        s.output_dim,
        s.epochs,
        resolved.out.display()
    );
    Ok(())
}
