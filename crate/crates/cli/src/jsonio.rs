//! JSON forms for the structures the CLI reads and writes.
//!
//! Weighted complexes serialize as `{"vertices", "maxdim", "weights":
//! [[vertex-list, w], ...]}` and measures as `{"vertices", "maxdim",
//! "complexes": [{"simplices": [...], "p": x}, ...]}`. Readers reject
//! unknown keys.

use std::path::Path;

use fuzzydr_core::measures::ComplexMeasure;
use fuzzydr_core::simplicial::{simplex, CrispComplex, FuzzyComplex, SimplexKey};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dataset::write_file;
use crate::CliError;

pub fn fuzzy_to_json(f: &FuzzyComplex) -> Value {
    let weights: Vec<Value> = f
        .support()
        .map(|(s, w)| json!([s.vertices(), w]))
        .collect();
    json!({
        "vertices": f.vertex_count(),
        "maxdim": f.maxdim(),
        "weights": weights,
    })
}

pub fn fuzzy_from_json(v: &Value) -> Result<FuzzyComplex, CliError> {
    let map = expect_object(v, &["vertices", "maxdim", "weights"])?;
    let vertices = expect_u64(&map["vertices"], "vertices")? as u32;
    let maxdim = expect_u64(&map["maxdim"], "maxdim")? as usize;
    let mut f = FuzzyComplex::new(vertices, maxdim);
    for entry in expect_array(&map["weights"], "weights")? {
        let pair = expect_array(entry, "weights entry")?;
        if pair.len() != 2 {
            return Err(CliError::Data("weights entries must be [vertex-list, weight] pairs".into()));
        }
        let key = vertex_list(&pair[0])?;
        let weight = pair[1]
            .as_f64()
            .ok_or_else(|| CliError::Data("weight must be a number".into()))?;
        f.set_weight(key, weight)
            .map_err(|e| CliError::Data(format!("invalid weight entry: {e}")))?;
    }
    f.check_monotone()
        .is_ok()
        .then_some(())
        .ok_or_else(|| CliError::Data("weights are not monotone under faces".into()))?;
    Ok(f)
}

pub fn measure_to_json(m: &ComplexMeasure) -> Value {
    let complexes: Vec<Value> = m
        .support()
        .map(|(c, p)| {
            let simplices: Vec<&[u32]> = c.simplices().map(|s| s.vertices()).collect();
            json!({ "simplices": simplices, "p": p })
        })
        .collect();
    json!({
        "vertices": m.vertex_count(),
        "maxdim": m.maxdim(),
        "complexes": complexes,
    })
}

pub fn measure_from_json(v: &Value) -> Result<ComplexMeasure, CliError> {
    let map = expect_object(v, &["vertices", "maxdim", "complexes"])?;
    let vertices = expect_u64(&map["vertices"], "vertices")? as u32;
    let maxdim = expect_u64(&map["maxdim"], "maxdim")? as usize;
    let mut support = Vec::new();
    for entry in expect_array(&map["complexes"], "complexes")? {
        let obj = expect_object(entry, &["simplices", "p"])?;
        let mut generators: Vec<SimplexKey> = Vec::new();
        for s in expect_array(&obj["simplices"], "simplices")? {
            generators.push(vertex_list(s)?);
        }
        let p = obj["p"]
            .as_f64()
            .ok_or_else(|| CliError::Data("`p` must be a number".into()))?;
        let complex = CrispComplex::closure(vertices, maxdim, generators)
            .map_err(|e| CliError::Data(format!("invalid complex: {e}")))?;
        support.push((complex, p));
    }
    ComplexMeasure::new(support).map_err(|e| CliError::Data(format!("invalid measure: {e}")))
}

fn vertex_list(v: &Value) -> Result<SimplexKey, CliError> {
    let raw = expect_array(v, "vertex list")?;
    let mut vertices = Vec::with_capacity(raw.len());
    for item in raw {
        vertices.push(expect_u64(item, "vertex")? as u32);
    }
    vertices.sort_unstable();
    vertices.dedup();
    Ok(simplex(&vertices))
}

fn expect_object<'a>(
    v: &'a Value,
    allowed: &[&str],
) -> Result<&'a Map<String, Value>, CliError> {
    let map = v
        .as_object()
        .ok_or_else(|| CliError::Data("expected a JSON object".into()))?;
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::Data(format!("unknown key `{key}`")));
        }
    }
    for key in allowed {
        if !map.contains_key(*key) {
            return Err(CliError::Data(format!("missing key `{key}`")));
        }
    }
    Ok(map)
}

fn expect_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Data(format!("{what} must be an array")))
}

fn expect_u64(v: &Value, what: &str) -> Result<u64, CliError> {
    v.as_u64()
        .ok_or_else(|| CliError::Data(format!("{what} must be a nonnegative integer")))
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Data(format!("cannot serialize: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, &to_json_bytes(value)?)
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Data(format!("{} is not valid JSON: {e}", path.display())))
}
