//! Validator for the JSON-schema subset used by tool descriptors.
//!
//! Supported keywords: `type`, `properties`, `required`,
//! `additionalProperties: false`, `minProperties`, `maxProperties`, `enum`,
//! `minimum`, `maximum`, `exclusiveMinimum`, `minLength`, `items`,
//! `minItems`, `maxItems`, and the volume-dependent `x-bound`:
//!
//! * `slice_index`: integer below the slice count along the sibling `axis`
//!   (default axial);
//! * `voxel_point`: each coordinate below the matching dimension.
//!
//! Volume-dependent bounds are skipped while no volume is loaded.

use std::fmt;

use ctflow_core::render::Axis;
use ctflow_core::Dims;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgsViolation {
    /// JSON path of the offending value, e.g. `$.roi.box.lo[2]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ArgsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

type Check = Result<(), ArgsViolation>;

fn fail(path: &str, message: impl Into<String>) -> Check {
    Err(ArgsViolation { path: path.to_string(), message: message.into() })
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn has_type(v: &Value, ty: &str) -> bool {
    match ty {
        "number" => v.is_number(),
        other => type_name(v) == other,
    }
}

/// Validates `value` against `schema`; `dims` enables the volume bounds.
pub fn validate(schema: &Value, value: &Value, dims: Option<Dims>) -> Check {
    check(schema, value, "$", None, dims)
}

fn check(schema: &Value, value: &Value, path: &str, parent: Option<&Map<String, Value>>, dims: Option<Dims>) -> Check {
    let Some(s) = schema.as_object() else { return Ok(()) };
    if let Some(ty) = s.get("type").and_then(Value::as_str) {
        if !has_type(value, ty) {
            return fail(path, format!("expected {ty}, got {}", type_name(value)));
        }
    }
    if let Some(options) = s.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            let list: Vec<String> = options.iter().map(Value::to_string).collect();
            return fail(path, format!("must be one of {}", list.join(", ")));
        }
    }
    if let Some(x) = value.as_f64() {
        if let Some(min) = s.get("minimum").and_then(Value::as_f64) {
            if x < min {
                return fail(path, format!("{value} is below the minimum {min}"));
            }
        }
        if let Some(min) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= min {
                return fail(path, format!("{value} must be greater than {min}"));
            }
        }
        if let Some(max) = s.get("maximum").and_then(Value::as_f64) {
            if x > max {
                return fail(path, format!("{value} exceeds the maximum {max}"));
            }
        }
    }
    if let (Some(text), Some(min)) = (value.as_str(), s.get("minLength").and_then(Value::as_u64)) {
        if (text.chars().count() as u64) < min || text.trim().is_empty() {
            return fail(path, format!("must be a non-blank string of at least {min} characters"));
        }
    }
    if let Some(items) = value.as_array() {
        let n = items.len() as u64;
        if let Some(min) = s.get("minItems").and_then(Value::as_u64) {
            if n < min {
                return fail(path, format!("needs at least {min} items, got {n}"));
            }
        }
        if let Some(max) = s.get("maxItems").and_then(Value::as_u64) {
            if n > max {
                return fail(path, format!("allows at most {max} items, got {n}"));
            }
        }
        if let Some(item_schema) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item_schema, item, &format!("{path}[{i}]"), None, dims)?;
            }
        }
    }
    if let Some(obj) = value.as_object() {
        check_object(s, obj, path, dims)?;
    }
    match (s.get("x-bound").and_then(Value::as_str), dims) {
        (Some(bound), Some(dims)) => check_bound(bound, value, path, parent, dims),
        _ => Ok(()),
    }
}

fn check_object(s: &Map<String, Value>, obj: &Map<String, Value>, path: &str, dims: Option<Dims>) -> Check {
    let empty = Map::new();
    let props = s.get("properties").and_then(Value::as_object).unwrap_or(&empty);
    if let Some(required) = s.get("required").and_then(Value::as_array) {
        for name in required.iter().filter_map(Value::as_str) {
            if !obj.contains_key(name) {
                return fail(path, format!("missing required field '{name}'"));
            }
        }
    }
    if s.get("additionalProperties") == Some(&Value::Bool(false)) {
        if let Some(extra) = obj.keys().find(|k| !props.contains_key(*k)) {
            return fail(path, format!("unexpected field '{extra}'"));
        }
    }
    let n = obj.len() as u64;
    if let Some(min) = s.get("minProperties").and_then(Value::as_u64) {
        if n < min {
            return fail(path, format!("needs at least {min} field(s)"));
        }
    }
    if let Some(max) = s.get("maxProperties").and_then(Value::as_u64) {
        if n > max {
            return fail(path, format!("allows at most {max} field(s)"));
        }
    }
    for (name, sub) in props {
        if let Some(v) = obj.get(name) {
            check(sub, v, &format!("{path}.{name}"), Some(obj), dims)?;
        }
    }
    Ok(())
}

fn check_bound(bound: &str, value: &Value, path: &str, parent: Option<&Map<String, Value>>, dims: Dims) -> Check {
    match bound {
        "slice_index" => {
            let axis = parent
                .and_then(|p| p.get("axis"))
                .and_then(Value::as_str)
                .and_then(|a| a.parse::<Axis>().ok())
                .unwrap_or(Axis::Axial);
            let len = dims[axis.dim()] as u64;
            match value.as_u64() {
                Some(i) if i < len => Ok(()),
                _ => fail(path, format!("{value} is out of range: {} has {len} slices", axis.name())),
            }
        }
        "voxel_point" => {
            let coords = value.as_array().map(Vec::as_slice).unwrap_or_default();
            for (a, c) in coords.iter().enumerate().take(3) {
                if c.as_u64().is_none_or(|c| c >= dims[a] as u64) {
                    return fail(&format!("{path}[{a}]"), format!("{c} is out of range: axis {a} has {} voxels", dims[a]));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::descriptor;
    use serde_json::json;

    fn schema(tool: &str) -> &'static Value {
        &descriptor(tool).unwrap().input_schema
    }

    #[test]
    fn slice_bound_follows_axis() {
        let s = schema("view_slice");
        let dims = Some([64, 48, 32]);
        assert!(validate(s, &json!({"index": 31}), dims).is_ok());
        let err = validate(s, &json!({"index": 9999}), dims).unwrap_err();
        assert_eq!(err.path, "$.index");
        assert!(validate(s, &json!({"index": 40, "axis": "coronal"}), dims).is_ok());
        assert!(validate(s, &json!({"index": 48, "axis": "coronal"}), dims).is_err());
        // without a volume only the static part applies
        assert!(validate(s, &json!({"index": 9999}), None).is_ok());
    }

    #[test]
    fn structural_violations() {
        let s = schema("measure_distance");
        assert!(validate(s, &json!({"p1": [0, 0, 0]}), None).unwrap_err().message.contains("'p2'"));
        assert_eq!(validate(s, &json!({"p1": [0, 0], "p2": [0, 0, 0]}), None).unwrap_err().path, "$.p1");
        assert_eq!(validate(s, &json!({"p1": [0, 0, "x"], "p2": [0, 0, 0]}), None).unwrap_err().path, "$.p1[2]");
        assert_eq!(validate(s, &json!({"p1": [0, 0, 0], "p2": [0, 0, 5]}), Some([4, 4, 4])).unwrap_err().path, "$.p2[2]");
        assert!(validate(s, &json!({"p1": [0, 0, 0], "p2": [0, 0, 0], "p3": 1}), None).is_err());
        assert!(validate(s, &json!([1]), None).is_err());
    }

    #[test]
    fn roi_takes_exactly_one_selector() {
        let s = schema("analyze_hu_distribution");
        assert!(validate(s, &json!({"roi": {"label": 1}}), None).is_ok());
        assert!(validate(s, &json!({"roi": {}}), None).is_err());
        assert!(validate(s, &json!({"roi": {"label": 1, "box": {"lo": [0, 0, 0], "hi": [1, 1, 1]}}}), None).is_err());
        assert!(validate(s, &json!({"roi": {"label": 0}}), None).is_err());
        assert!(validate(s, &json!({"roi": {"box": {"lo": [0, 0, 0], "hi": [1, 1, 1]}}}), None).is_ok());
    }

    #[test]
    fn numbers_enums_and_strings() {
        let s = schema("edit_geometry");
        assert!(validate(s, &json!({"label": 1, "op": "dilate", "radius_mm": 2.5}), None).is_ok());
        assert!(validate(s, &json!({"label": 1, "op": "grow", "radius_mm": 2.5}), None).is_err());
        assert!(validate(s, &json!({"label": 1, "op": "dilate", "radius_mm": 0}), None).is_err());
        assert!(validate(s, &json!({"label": 1.5, "op": "dilate", "radius_mm": 1}), None).is_err());
        assert!(validate(schema("search_anatomy_names"), &json!({"query": "  "}), None).is_err());
    }
}
