use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Wraps a report with the tool identity, effective config and input digest.
/// Report fields are flattened next to the envelope fields.
pub fn wrap(command: &str, config: Value, input_digest: &str, report: impl Serialize) -> Value {
    let mut out = Map::new();
    out.insert("tool".into(), json!("pebms"));
    out.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    out.insert("command".into(), json!(command));
    out.insert("config".into(), config);
    out.insert("input_digest".into(), json!(input_digest));
    match serde_json::to_value(report).expect("reports serialize") {
        Value::Object(fields) => {
            for (k, v) in fields {
                out.entry(k).or_insert(v);
            }
        }
        other => {
            out.insert("report".into(), other);
        }
    }
    Value::Object(out)
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
