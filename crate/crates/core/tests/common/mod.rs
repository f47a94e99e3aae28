//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use cogkernel::dsl::{self, parse_env, EnvScript, Model};
use cogkernel::runtime::Runtime;
use serde_json::Value as Json;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn model(src: &str) -> Model {
    let (m, diags) = dsl::load(src);
    m.unwrap_or_else(|| panic!("model rejected: {diags:?}\n{src}"))
}

pub fn runtime(src: &str) -> Runtime {
    Runtime::new(&model(src), None).unwrap()
}

pub fn bundled(name: &str) -> (Model, Option<EnvScript>) {
    let dir = repo_root().join("models");
    let src = std::fs::read_to_string(dir.join(format!("{name}.cogm"))).unwrap();
    let m = model(&src);
    let env = m.env.as_ref().map(|e| parse_env(&std::fs::read_to_string(dir.join(e)).unwrap()).unwrap());
    (m, env)
}

pub const BUNDLED: [&str; 3] = ["count", "bandit", "tie"];

pub fn schema() -> Json {
    let text = std::fs::read_to_string(repo_root().join("schema/trace.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Checks `v` against the subset of JSON Schema the trace schema uses:
/// `type`, `required`, `properties`, `additionalProperties`, `items`,
/// `enum` and `minimum`.
pub fn conforms(schema: &Json, v: &Json, path: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type").and_then(Json::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            _ => false,
        };
        if !ok {
            return Err(format!("{path}: expected {t}, got {v}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Json::as_array) {
        if !options.contains(v) {
            return Err(format!("{path}: {v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(n)) = (schema.get("minimum").and_then(Json::as_f64), v.as_f64()) {
        if n < min {
            return Err(format!("{path}: {n} below {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in schema.get("required").and_then(Json::as_array).into_iter().flatten() {
            let key = r.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing `{key}`"));
            }
        }
        let props = schema.get("properties").and_then(Json::as_object);
        for (k, val) in obj {
            let sub = format!("{path}.{k}");
            match props.and_then(|p| p.get(k)) {
                Some(s) => conforms(s, val, &sub)?,
                None => match schema.get("additionalProperties") {
                    Some(Json::Bool(false)) => return Err(format!("{sub}: not allowed")),
                    Some(s @ Json::Object(_)) => conforms(s, val, &sub)?,
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            conforms(items, x, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

/// Every line of a JSON Lines trace against the shipped schema.
pub fn trace_conforms(jsonl: &str) -> Result<(), String> {
    let s = schema();
    for (i, line) in jsonl.lines().enumerate() {
        let v: Json = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        conforms(&s, &v, &format!("line {}", i + 1))?;
    }
    Ok(())
}
