use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The self-describing envelope every command emits.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub version: &'static str,
    pub passed: bool,
    pub result: Value,
    /// Wall time and pool size; the only part allowed to differ between reruns.
    pub runtime: Runtime,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Runtime {
    pub wall_time_s: f64,
    pub workers: usize,
}

/// Tabular payload for CSV output; reports without one are flattened to key,value rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// `# ` metadata line, a header row, then data rows. The runtime goes on a
    /// trailing `# runtime` comment so the rest stays byte-stable.
    pub fn to_csv(&self, table: Option<&Table>) -> String {
        let mut out = String::new();
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let _ = writeln!(
            out,
            "# schema={} command={} version={} seed={} passed={} config={}",
            self.schema, self.command, self.version, self.seed, self.passed, config
        );
        match table {
            Some(t) => {
                out.push_str(&t.header.join(","));
                out.push('\n');
                for row in &t.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            None => {
                out.push_str("key,value\n");
                let mut flat = Vec::new();
                flatten("", &self.result, &mut flat);
                for (k, v) in flat {
                    let _ = writeln!(out, "{k},{v}");
                }
            }
        }
        let _ = writeln!(out, "# runtime wall_time_s={} workers={}", self.runtime.wall_time_s, self.runtime.workers);
        out
    }
}

/// Dotted-path flattening; arrays use numeric path segments.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), csv_field(s))),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Removes the `runtime` object so two JSON reports can be compared byte for byte.
pub fn strip_runtime_json(text: &str) -> Option<String> {
    let mut v: Value = serde_json::from_str(text).ok()?;
    v.as_object_mut()?.remove("runtime");
    serde_json::to_string_pretty(&v).ok()
}

/// Drops `# runtime` comment lines from CSV output.
pub fn strip_runtime_csv(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("# runtime")).map(|l| format!("{l}\n")).collect()
}

pub fn object(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        Report {
            schema: SCHEMA,
            command: "verify binom".into(),
            config: json!({"n": 3}),
            seed: 7,
            version: VERSION,
            passed: true,
            result: json!({"a": {"b": [1, 2.5]}, "s": "x,y", "z": null}),
            runtime: Runtime { wall_time_s: 0.25, workers: 4 },
        }
    }

    #[test]
    fn flattening() {
        let csv = sample().to_csv(None);
        let lines: Vec<_> = csv.lines().collect();
        assert!(lines[0].starts_with("# schema=1 command=verify binom"));
        assert!(lines[0].contains("seed=7"));
        assert_eq!(lines[1], "key,value");
        assert_eq!(&lines[2..6], &["a.b.0,1", "a.b.1,2.5", "s,\"x,y\"", "z,"]);
        assert!(lines[6].starts_with("# runtime"));
    }

    #[test]
    fn stripping_runtime() {
        let mut a = sample();
        let mut b = sample();
        b.runtime = Runtime { wall_time_s: 9.0, workers: 1 };
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(strip_runtime_json(&a.to_json()), strip_runtime_json(&b.to_json()));
        assert_eq!(strip_runtime_csv(&a.to_csv(None)), strip_runtime_csv(&b.to_csv(None)));
        a.seed = 8;
        assert_ne!(strip_runtime_json(&a.to_json()), strip_runtime_json(&b.to_json()));
    }
}
