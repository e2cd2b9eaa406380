//! The eval subcommand: scores an embedding CSV against its source CSV.

use fuzzydr_core::eval::{evaluate, EvalConfig};
use serde::Deserialize;

use crate::args::{thread_cap, EvalArgs};
use crate::dataset::{ingest_csv, write_file};
use crate::jsonio::{to_json_bytes, write_json};
use crate::svg::SvgScatter;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<usize>,
    subsample: Option<usize>,
    repeats: Option<usize>,
    seed: Option<u64>,
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let file: FileConfig = super::embed::load_file_config(args.config.as_deref())?;
    let config = EvalConfig {
        neighbors: args.k.or(file.k).unwrap_or(15),
        subsample: file.subsample.unwrap_or(120),
        repeats: file.repeats.unwrap_or(10),
        seed: args.seed.or(file.seed).unwrap_or(0),
        threads: thread_cap()?,
    };

    let original = ingest_csv(&args.original, args.has_header, args.label_col.as_deref())?;
    let embedding = ingest_csv(&args.embedding, args.has_header, None)?;
    if original.points.rows() != embedding.points.rows() {
        return Err(CliError::Data(format!(
            "row counts differ: {} source rows vs {} embedded rows",
            original.points.rows(),
            embedding.points.rows()
        )));
    }

    let report = evaluate(&original.points, &embedding.points, &config)?;

    match &args.out {
        Some(path) => write_json(path, &report)?,
        None => {
            let bytes = to_json_bytes(&report)?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    if let Some(svg_path) = &args.svg {
        let doc = SvgScatter::default().render(&embedding.points, original.labels.as_deref());
        write_file(svg_path, doc.as_bytes())?;
    }
    Ok(())
}
