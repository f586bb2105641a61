//! Output document assembly: one JSON object or CSV stream per run.
//!
//! JSON goes through `serde_json::Value` with sorted keys, so parsing the
//! emitted document and re-rendering it reproduces the bytes exactly. All
//! probabilities are strings: `p/q` in exact mode, 15 significant digits in
//! float mode. CSV is a bare header row plus data rows on the data stream;
//! the run metadata goes to stderr.

use std::io::Write;

use serde_json::{json, Map, Value};

use hardcore_poisson::Error;

/// Everything a subcommand produces.
pub struct Payload {
    pub method: String,
    pub mode: String,
    pub params: Map<String, Value>,
    rows: Vec<Value>,
    csv_rows: Vec<String>,
    pub csv_header: String,
    pub sum: Option<String>,
    pub diagnostics: Vec<String>,
}

impl Payload {
    pub fn new(method: &str, mode: &str) -> Self {
        Self {
            method: method.into(),
            mode: mode.into(),
            params: Map::new(),
            rows: Vec::new(),
            csv_rows: Vec::new(),
            csv_header: String::new(),
            sum: None,
            diagnostics: Vec::new(),
        }
    }

    /// Add a row whose CSV form is the field values joined by commas.
    pub fn push_row(&mut self, fields: Vec<(&str, Value)>) {
        let csv = fields
            .iter()
            .map(|(_, v)| match v {
                Value::String(s) => csv_escape_free(s.clone()),
                other => other.to_string(),
            })
            .collect::<Vec<_>>()
            .join(",");
        self.push_row_with_csv(fields, csv);
    }

    /// Add a row with an explicit CSV rendering (used when the JSON shape
    /// is not flat, e.g. joint-count vectors).
    pub fn push_row_with_csv(&mut self, fields: Vec<(&str, Value)>, csv: String) {
        let mut obj = Map::new();
        for (k, v) in fields {
            obj.insert(k.into(), v);
        }
        self.rows.push(Value::Object(obj));
        self.csv_rows.push(csv);
    }

    pub fn to_json(&self) -> Value {
        json!({
            "params": Value::Object(self.params.clone()),
            "method": self.method,
            "mode": self.mode,
            "rows": self.rows,
            "sum": self.sum,
            "diagnostics": self.diagnostics,
        })
    }

    fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.csv_rows.len());
        out.push_str(&self.csv_header);
        out.push('\n');
        for row in &self.csv_rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }

    fn metadata_line(&self) -> String {
        let mut parts = vec![
            format!("method={}", self.method),
            format!("mode={}", self.mode),
        ];
        for (k, v) in &self.params {
            parts.push(format!("{k}={}", value_plain(v)));
        }
        if let Some(sum) = &self.sum {
            parts.push(format!("sum={sum}"));
        }
        parts.join(" ")
    }
}

fn value_plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A probability string never contains commas or quotes, so CSV needs no
/// quoting; this asserts that invariant in debug builds.
pub fn csv_escape_free(s: String) -> String {
    debug_assert!(!s.contains(',') && !s.contains('"'));
    s
}

/// Where and how to write the payload.
pub struct Sink {
    json: bool,
    out: Option<std::path::PathBuf>,
}

impl Sink {
    pub fn new(json: bool, out: Option<std::path::PathBuf>) -> Self {
        Self { json, out }
    }

    pub fn emit(&self, payload: &Payload) -> Result<(), Error> {
        let body = if self.json {
            let mut s = serde_json::to_string_pretty(&payload.to_json())
                .expect("document serialization cannot fail");
            s.push('\n');
            s
        } else {
            // CSV keeps the data stream clean; metadata goes to stderr.
            eprintln!("{}", payload.metadata_line());
            for d in &payload.diagnostics {
                eprintln!("# {d}");
            }
            payload.to_csv()
        };
        match &self.out {
            Some(path) => std::fs::write(path, body).map_err(|e| {
                Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(body.as_bytes())
                    .and_then(|()| stdout.flush())
                    .map_err(|e| Error::InvalidParameter(format!("cannot write stdout: {e}")))
            }
        }
    }
}
