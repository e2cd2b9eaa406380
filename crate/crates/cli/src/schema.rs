//! Validator for the subset of JSON Schema used by the files in `schemas/`:
//! type, properties, required, additionalProperties, items, prefixItems,
//! enum, minItems, maxItems.

use serde_json::Value;

/// Checks `value` against `schema`; the error names the failing path.
pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    check(schema, value, "$")
}

fn check(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let schema = match schema {
        Value::Bool(true) => return Ok(()),
        Value::Bool(false) => return Err(format!("{path}: disallowed by schema")),
        Value::Object(map) => map,
        _ => return Err(format!("{path}: schema node must be an object or bool")),
    };

    if let Some(expected) = schema.get("type") {
        let names: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => return Err(format!("{path}: malformed `type` in schema")),
        };
        if !names.iter().any(|n| type_matches(n, value)) {
            return Err(format!("{path}: expected type {names:?}, got {}", type_name(value)));
        }
    }

    if let Some(allowed) = schema.get("enum") {
        let options = allowed
            .as_array()
            .ok_or_else(|| format!("{path}: malformed `enum` in schema"))?;
        if !options.contains(value) {
            return Err(format!("{path}: value not in enum"));
        }
    }

    if let Value::Object(obj) = value {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required key `{key}`"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (key, item) in obj {
            let child_path = format!("{path}.{key}");
            match props.and_then(|p| p.get(key)) {
                Some(sub) => check(sub, item, &child_path)?,
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        return Err(format!("{path}: unexpected key `{key}`"))
                    }
                    Some(sub) => check(sub, item, &child_path)?,
                    None => {}
                },
            }
        }
    }

    if let Value::Array(items) = value {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                return Err(format!("{path}: fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > max {
                return Err(format!("{path}: more than {max} items"));
            }
        }
        let prefix = schema
            .get("prefixItems")
            .and_then(Value::as_array)
            .map(|p| p.as_slice())
            .unwrap_or(&[]);
        for (i, item) in items.iter().enumerate() {
            let child_path = format!("{path}[{i}]");
            if let Some(sub) = prefix.get(i) {
                check(sub, item, &child_path)?;
            } else if let Some(sub) = schema.get("items") {
                check(sub, item, &child_path)?;
            }
        }
    }

    Ok(())
}

fn type_matches(name: &str, value: &Value) -> bool {
    match name {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        "number" => value.is_number(),
        // Floats with zero fraction count as integers, as in the standard.
        "integer" => {
            value.is_i64() || value.is_u64() || value.as_f64().is_some_and(|f| f.fract() == 0.0)
        }
        _ => false,
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
