//! Flag definitions and the small string formats used by flag values.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use fuzzydr_core::scale::ScaleDistribution;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fuzzydr",
    version,
    about = "Fuzzy simplicial embeddings: synthetic data, training, metrics, and exact law checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a dataset; writes coordinate, loss-trace, and manifest files.
    Embed(EmbedArgs),
    /// Score an embedding against its source points.
    Eval(EvalArgs),
    /// Run the exact verification suite over the measure laws.
    PosetLab(PosetLabArgs),
    /// Dump filtration scales, and optionally fuzzy weights, as JSON.
    Filtration(FiltrationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeFlag {
    Edge,
    Triplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitFlag {
    Pca,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FiltrationKind {
    /// Simplices enter at their diameter.
    Vr,
    /// Simplices enter at their intrinsic covering radius.
    Cech,
    /// Edges enter at unit scale, triangles at their comparison ratio.
    Curvature,
}

#[derive(Debug, Parser)]
pub struct EmbedArgs {
    /// Input: a CSV path, or a generator spec `blobs`, `circle`, or
    /// `swiss_lite`, each with optional `:key=value,...` parameters.
    #[arg(long = "in")]
    pub input: Option<String>,
    /// Loss mode: pairwise edge weights or enclosing-ball triplet weights.
    #[arg(long, value_enum)]
    pub mode: Option<ModeFlag>,
    /// Starting coordinates: principal components or seeded Gaussian noise.
    #[arg(long, value_enum)]
    pub init: Option<InitFlag>,
    /// Neighbors per point.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output dimension.
    #[arg(long = "d_o")]
    pub d_o: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Positive triples per batch (triplet mode only).
    #[arg(long)]
    pub batch: Option<usize>,
    /// Negative samples per positive term.
    #[arg(long = "neg-rate")]
    pub neg_rate: Option<usize>,
    /// Input-side scale distribution, e.g. `exponential:nu=1`,
    /// `weibull:lambda=1,k=0.5`, `loglogistic:a=1,b=1`.
    #[arg(long = "phiX")]
    pub phi_x: Option<String>,
    /// Output-side scale distribution; same format as --phiX.
    #[arg(long = "phiY")]
    pub phi_y: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; receives embedding.csv, loss.csv, manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the embedding as an SVG scatter at this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// JSON config file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Treat the first CSV row as column names.
    #[arg(long = "has-header")]
    pub has_header: bool,
    /// Label column, by header name or zero-based index.
    #[arg(long = "label-col")]
    pub label_col: Option<String>,
}

#[derive(Debug, Parser)]
pub struct EvalArgs {
    /// Source points CSV.
    pub original: PathBuf,
    /// Embedding coordinates CSV.
    pub embedding: PathBuf,
    /// Neighbors for the trustworthiness score.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Metrics JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the embedding as an SVG scatter at this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// JSON config file with keys k, subsample, repeats, seed; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Treat the first row of both CSVs as column names.
    #[arg(long = "has-header")]
    pub has_header: bool,
    /// Label column of the source CSV, used to color the scatter.
    #[arg(long = "label-col")]
    pub label_col: Option<String>,
}

#[derive(Debug, Parser)]
pub struct PosetLabArgs {
    /// Run a single law by name instead of the whole suite.
    #[arg(long)]
    pub law: Option<String>,
    /// Seed for the randomized law instances.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report the marginal weights of a measure loaded from JSON before
    /// running any laws.
    #[arg(long)]
    pub measure: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct FiltrationArgs {
    /// Scale assignment for the dump.
    #[arg(value_enum, default_value = "vr")]
    pub kind: FiltrationKind,
    /// Input: a CSV path or a generator spec, as for embed.
    #[arg(long = "in")]
    pub input: Option<String>,
    /// Scale distribution; adds fuzzy weights to the dump. Required for the
    /// curvature kind.
    #[arg(long = "phiX")]
    pub phi_x: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "has-header")]
    pub has_header: bool,
    #[arg(long = "label-col")]
    pub label_col: Option<String>,
}

/// Parses a scale-distribution spec of the form `family:key=value,...`.
///
/// Families: `exponential:nu=…`, `weibull:lambda=…,k=…`,
/// `loglogistic:a=…,b=…`. Every key is required exactly once.
pub fn parse_scale(spec: &str) -> Result<ScaleDistribution, CliError> {
    let (family, params) = match spec.split_once(':') {
        Some((f, p)) => (f, p),
        None => (spec, ""),
    };
    let pairs = parse_kv(params)?;
    let take = |key: &str| -> Result<f64, CliError> {
        let mut found = None;
        for (k, v) in &pairs {
            if k == key {
                if found.is_some() {
                    return Err(CliError::Usage(format!("duplicate key `{key}` in `{spec}`")));
                }
                found = Some(*v);
            }
        }
        found.ok_or_else(|| CliError::Usage(format!("missing key `{key}` in `{spec}`")))
    };
    let expect_keys = |allowed: &[&str]| -> Result<(), CliError> {
        for (k, _) in &pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("unknown key `{k}` in `{spec}`")));
            }
        }
        Ok(())
    };
    let dist = match family {
        "exponential" => {
            expect_keys(&["nu"])?;
            ScaleDistribution::exponential(take("nu")?)
        }
        "weibull" => {
            expect_keys(&["lambda", "k"])?;
            ScaleDistribution::weibull(take("lambda")?, take("k")?)
        }
        "loglogistic" => {
            expect_keys(&["a", "b"])?;
            ScaleDistribution::log_logistic(take("a")?, take("b")?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown scale family `{other}`; expected exponential, weibull, or loglogistic"
            )))
        }
    };
    dist.map_err(|e| CliError::Usage(format!("invalid parameters in `{spec}`: {e}")))
}

/// Splits `key=value,key=value` into parsed pairs. Empty input is allowed.
pub fn parse_kv(params: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    if params.is_empty() {
        return Ok(out);
    }
    for piece in params.split(',') {
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{piece}`")))?;
        let parsed: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("cannot parse `{value}` as a number")))?;
        out.push((key.to_string(), parsed));
    }
    Ok(out)
}

/// Reads the worker cap from FUZZYDR_THREADS; unset means one worker.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("FUZZYDR_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Usage(format!("FUZZYDR_THREADS must be a positive integer, got `{raw}`"))
            })?;
            if n == 0 {
                return Err(CliError::Usage(
                    "FUZZYDR_THREADS must be a positive integer, got `0`".into(),
                ));
            }
            Ok(n)
        }
        Err(_) => Ok(1),
    }
}
