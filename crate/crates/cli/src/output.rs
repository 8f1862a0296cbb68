//! Result tables in CSV or JSON.

use std::io::{self, Write};

use serde::Serialize;

use crate::config::Format;

pub const CSV_HEADER: &str = "quantity,value,error_bound,tail_bound,evaluations,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    pub error_bound: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
    pub wall_ms: u64,
}

impl Row {
    pub fn new(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            error_bound: 0.0,
            tail_bound: 0.0,
            evaluations: 0,
            wall_ms: 0,
        }
    }

    pub fn error(mut self, e: f64) -> Self {
        self.error_bound = e;
        self
    }

    pub fn tail(mut self, t: f64) -> Self {
        self.tail_bound = t;
        self
    }

    pub fn evals(mut self, n: usize) -> Self {
        self.evaluations = n;
        self
    }
}

/// Shortest representation that reads back to the same `f64`.
fn number(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_table(out: &mut dyn Write, rows: &[Row], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    csv_field(&r.quantity),
                    number(r.value),
                    number(r.error_bound),
                    number(r.tail_bound),
                    r.evaluations,
                    r.wall_ms
                )?;
            }
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(io::Error::other)?;
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![Row::new("integral", 1.0 / 3.0).error(1e-12).evals(21)];
        let mut buf = Vec::new();
        write_table(&mut buf, &rows, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "quantity,value,error_bound,tail_bound,evaluations,wall_ms\nintegral,0.3333333333333333,1e-12,0.0,21,0\n"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2f64.powi(-32), 1e300, -0.0, 123456789.0] {
            assert_eq!(number(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn json_is_an_array_of_rows() {
        let rows = vec![Row::new("kp_norm", 0.5).tail(0.25)];
        let mut buf = Vec::new();
        write_table(&mut buf, &rows, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["quantity"], "kp_norm");
        assert_eq!(v[0]["tail_bound"], 0.25);
        assert_eq!(v.as_array().unwrap().len(), 1);
    }
}
