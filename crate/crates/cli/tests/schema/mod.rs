//! A checker for the subset of JSON Schema used under docs/schemas: `type`,
//! `const`, `enum`, `oneOf`, local `$ref`, `required`, `properties`,
//! `additionalProperties`, `items`, `prefixItems`, `minItems`, `maxItems` and
//! `minimum`. `pattern` and `propertyNames` are not checked.

use serde_json::Value as Json;
use std::path::PathBuf;

pub fn load(name: &str) -> Json {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

pub fn validate(root: &Json, doc: &Json) -> Result<(), String> {
    check(root, root, doc, "$")
}

fn type_ok(t: &str, v: &Json) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

fn check(root: &Json, s: &Json, v: &Json, at: &str) -> Result<(), String> {
    let fail = |m: &str| Err(format!("{at}: {m}"));
    if let Some(r) = s.get("$ref").and_then(Json::as_str) {
        let name = r.strip_prefix("#/$defs/").expect("local refs only");
        return check(root, &root["$defs"][name], v, at);
    }
    match s.get("type") {
        Some(Json::String(t)) if !type_ok(t, v) => return fail(&format!("expected {t}")),
        Some(Json::Array(ts)) if !ts.iter().any(|t| type_ok(t.as_str().unwrap(), v)) => return fail("type mismatch"),
        _ => {}
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return fail(&format!("expected {c}"));
        }
    }
    if let Some(Json::Array(e)) = s.get("enum") {
        if !e.contains(v) {
            return fail(&format!("{v} not in enum"));
        }
    }
    if let Some(Json::Array(alts)) = s.get("oneOf") {
        let n = alts.iter().filter(|a| check(root, a, v, at).is_ok()).count();
        if n != 1 {
            return fail(&format!("{n} oneOf branches match {v}"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Json::as_i64), v.as_i64()) {
        if x < min {
            return fail("below minimum");
        }
    }
    if let Json::Object(m) = v {
        if let Some(Json::Array(req)) = s.get("required") {
            for k in req {
                if !m.contains_key(k.as_str().unwrap()) {
                    return fail(&format!("missing {k}"));
                }
            }
        }
        let props = s.get("properties").and_then(Json::as_object);
        for (k, x) in m {
            let sub = format!("{at}.{k}");
            match props.and_then(|p| p.get(k)) {
                Some(ps) => check(root, ps, x, &sub)?,
                None => match s.get("additionalProperties") {
                    Some(Json::Bool(false)) if props.is_some() => return fail(&format!("unexpected key {k}")),
                    Some(ap @ Json::Object(_)) => check(root, ap, x, &sub)?,
                    _ => {}
                },
            }
        }
    }
    if let Json::Array(a) = v {
        if let Some(n) = s.get("minItems").and_then(Json::as_u64) {
            if (a.len() as u64) < n {
                return fail("too few items");
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Json::as_u64) {
            if a.len() as u64 > n {
                return fail("too many items");
            }
        }
        let prefix = s.get("prefixItems").and_then(Json::as_array);
        for (i, x) in a.iter().enumerate() {
            let sub = format!("{at}[{i}]");
            match prefix.and_then(|p| p.get(i)) {
                Some(ps) => check(root, ps, x, &sub)?,
                None => {
                    if let Some(is) = s.get("items") {
                        check(root, is, x, &sub)?;
                    }
                }
            }
        }
    }
    Ok(())
}
