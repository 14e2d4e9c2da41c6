//! Result files. Each embeds the resolved config and a SHA-256 content hash
//! so reruns with the same config can be compared byte for byte.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// A float with 17 significant digits.
pub fn sig(v: f64) -> String {
    format!("{v:.16e}")
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON document. The hash covers the compact serialization of every
/// other field.
pub fn json_document(config: &Value, result: &Value, verdict: bool) -> String {
    let body = json!({ "config": config, "verdict": verdict, "result": result });
    let hash = sha256_hex(serde_json::to_string(&body).expect("JSON values serialize").as_bytes());
    let mut doc = Map::new();
    doc.insert("content_hash".into(), Value::String(format!("sha256:{hash}")));
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    out.push('\n');
    out
}

/// CSV with `#` comment lines carrying the config and a hash of the config
/// line plus the table.
pub fn csv_document(config: &Value, table: &str) -> String {
    let config_line = serde_json::to_string(config).expect("JSON values serialize");
    let hash = sha256_hex(format!("{config_line}\n{table}").as_bytes());
    format!("# config: {config_line}\n# content_hash: sha256:{hash}\n{table}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = sig(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.trim_start_matches('-').split('e').next().unwrap().replace('.', "").len(), 17);
        }
    }

    #[test]
    fn hash_tracks_content() {
        let c = json!({ "experiment": "bounds" });
        let a = json_document(&c, &json!([1, 2]), true);
        assert_eq!(a, json_document(&c, &json!([1, 2]), true));
        assert_ne!(a, json_document(&c, &json!([1, 3]), true));
        let doc: Value = serde_json::from_str(&a).unwrap();
        let body = json!({ "config": c, "verdict": true, "result": [1, 2] });
        let want = sha256_hex(serde_json::to_string(&body).unwrap().as_bytes());
        assert_eq!(doc["content_hash"], format!("sha256:{want}"));
    }

    #[test]
    fn csv_header_lines() {
        let out = csv_document(&json!({ "k": 1 }), "a,b\n1,2\n");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "# config: {\"k\":1}");
        assert!(lines[1].starts_with("# content_hash: sha256:") && lines[1].len() == 23 + 64);
        assert_eq!(&lines[2..], ["a,b", "1,2"]);
    }
}
