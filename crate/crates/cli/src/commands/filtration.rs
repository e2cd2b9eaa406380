//! The filtration subcommand: appearance scales, and optionally fuzzy
//! weights, for small point sets as JSON.

use fuzzydr_core::filtration::{
    curvature_rho3, curvature_weights, fuzzy_from_filtration, intrinsic_cech_radius, vr_scale,
    CandidateSet, DistanceMatrix,
};
use fuzzydr_core::scale::ScaleDistribution;
use fuzzydr_core::simplicial::{all_simplices, FuzzyComplex, SimplexKey};
use serde_json::{json, Value};

use crate::args::{parse_scale, FiltrationArgs, FiltrationKind};
use crate::dataset::{load_input, write_file};
use crate::jsonio::fuzzy_to_json;
use crate::CliError;

/// The dump enumerates every simplex up to maxdim 2, so n is kept small.
const DUMP_POINT_CAP: usize = 32;

pub fn run(args: &FiltrationArgs) -> Result<(), CliError> {
    let input = args
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--in is required (a CSV path or a generator spec)".into()))?;
    let seed = args.seed.unwrap_or(0);
    let phi = args.phi_x.as_deref().map(parse_scale).transpose()?;

    let data = load_input(input, args.has_header, args.label_col.as_deref(), seed)?;
    let n = data.points.rows();
    if n > DUMP_POINT_CAP {
        return Err(CliError::Data(format!(
            "filtration dumps are capped at {DUMP_POINT_CAP} points, got {n}"
        )));
    }
    if n == 0 {
        return Err(CliError::Data("the input has no points".into()));
    }
    let dm = DistanceMatrix::from_points(&data.points);
    let maxdim = 2.min(n - 1);

    let mut entries: Vec<(SimplexKey, f64)> = Vec::new();
    for s in all_simplices(n as u32, maxdim) {
        let scale = scale_of(&dm, &s, args.kind)?;
        entries.push((s, scale));
    }
    entries.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));

    let fuzzy = match &phi {
        None => Value::Null,
        Some(dist) => fuzzy_to_json(&fuzzy_of(&dm, maxdim, args.kind, dist, &entries)?),
    };
    let dump = json!({
        "kind": kind_name(args.kind),
        "vertices": n,
        "maxdim": maxdim,
        "entries": entries
            .iter()
            .map(|(s, scale)| json!([s.vertices(), scale]))
            .collect::<Vec<_>>(),
        "fuzzy": fuzzy,
    });

    let mut bytes = serde_json::to_vec_pretty(&dump)
        .map_err(|e| CliError::Data(format!("cannot serialize the dump: {e}")))?;
    bytes.push(b'\n');
    match &args.out {
        Some(path) => write_file(path, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

pub(crate) fn kind_name(kind: FiltrationKind) -> &'static str {
    match kind {
        FiltrationKind::Vr => "vr",
        FiltrationKind::Cech => "cech",
        FiltrationKind::Curvature => "curvature",
    }
}

fn scale_of(dm: &DistanceMatrix, s: &SimplexKey, kind: FiltrationKind) -> Result<f64, CliError> {
    let value = match kind {
        FiltrationKind::Vr => vr_scale(dm, s),
        FiltrationKind::Cech => intrinsic_cech_radius(dm, s, CandidateSet::AllPoints, None),
        FiltrationKind::Curvature => match s.dim() {
            0 => Ok(0.0),
            1 => Ok(1.0),
            _ => curvature_rho3(dm, s),
        },
    };
    value.map_err(|e| CliError::Data(format!("cannot assign a scale to {:?}: {e}", s.vertices())))
}

fn fuzzy_of(
    dm: &DistanceMatrix,
    maxdim: usize,
    kind: FiltrationKind,
    dist: &ScaleDistribution,
    entries: &[(SimplexKey, f64)],
) -> Result<FuzzyComplex, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Data(format!("cannot build fuzzy weights: {e}"));
    match kind {
        FiltrationKind::Vr => fuzzy_from_filtration(dm, maxdim, dist).map_err(|e| bad(&e)),
        FiltrationKind::Curvature => curvature_weights(dm, dist, maxdim).map_err(|e| bad(&e)),
        // Covering radii grow from faces to cofaces, so survival weights
        // stay monotone.
        FiltrationKind::Cech => {
            let mut f = FuzzyComplex::new(dm.len() as u32, maxdim);
            for (s, scale) in entries {
                let w = dist.survival(*scale).map_err(|e| bad(&e))?;
                f.set_weight(s.clone(), w).map_err(|e| bad(&e))?;
            }
            Ok(f)
        }
    }
}
