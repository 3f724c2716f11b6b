use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::commands::{Assertion, Output};

/// The full output: resolved config, result rows and assertion outcomes.
///
/// The config echo leaves out the output path and worker count, so that runs
/// differing only in those produce identical bytes.
#[derive(Debug, Serialize)]
pub struct Document {
    pub config: Value,
    pub rows: Vec<Map<String, Value>>,
    pub assertions: Vec<Assertion>,
}

impl Document {
    pub fn new(command: &str, seed: u64, format: Format, out: Output) -> Self {
        let config = serde_json::json!({
            "command": command,
            "parameters": out.parameters,
            "seed": seed,
            "format": format,
        });
        let rows = out.rows.into_iter().map(flatten).collect();
        Self {
            config,
            rows,
            assertions: out.assertions,
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(self)?;
                v.push(b'\n');
                Ok(v)
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut buf = format!("# config: {}\n", serde_json::to_string(&self.config)?).into_bytes();
        for a in &self.assertions {
            buf.extend(
                format!(
                    "# assertion: {} {} {}\n",
                    a.name,
                    if a.passed { "PASS" } else { "FAIL" },
                    a.detail
                )
                .bytes(),
            );
        }
        let mut header: Vec<&String> = Vec::new();
        for row in &self.rows {
            for k in row.keys() {
                if !header.contains(&k) {
                    header.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header.iter().map(|s| s.as_str()))?;
        for row in &self.rows {
            w.write_record(
                header
                    .iter()
                    .map(|k| row.get(*k).map_or_else(String::new, cell)),
            )?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Nested objects become dotted keys so every row is flat.
fn flatten(row: Map<String, Value>) -> Map<String, Value> {
    fn go(prefix: &str, v: Value, out: &mut Map<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    go(&format!("{prefix}.{k}"), v, out);
                }
            }
            other => {
                out.insert(prefix.to_string(), other);
            }
        }
    }
    let mut out = Map::new();
    for (k, v) in row {
        go(&k, v, &mut out);
    }
    out
}
