use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Version of the CSV/JSON layouts written by [`ExperimentReport`].
pub const SCHEMA_VERSION: u32 = 1;

/// A named pass/fail assertion recorded by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Rows of one experiment plus its configuration echo, summary and checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub schema: u32,
    pub config: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            schema: SCHEMA_VERSION,
            config: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
            checks: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.config.insert(key.to_string(), to_value(value));
        self
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.summary.insert(key.to_string(), to_value(value));
        self
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// A numeric column as doubles; exact `a/2^b` strings are converted.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column(name)
            .ok_or_else(|| Error::Domain(format!("no column {name:?}")))?;
        self.rows.iter().map(|r| value_f64(&r[i])).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Header comment, column row, data rows, then one comment line per check.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# dyadic-walsh {} schema v{}", self.experiment, self.schema)?;
        {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&self.columns).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row.iter().map(cell)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        for c in &self.checks {
            writeln!(
                out,
                "# check {}: {}",
                c.name,
                if c.passed { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub(crate) fn value_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("non-finite number {n}"))),
        Value::String(s) => Ok(s.parse::<crate::dyadic::Dyadic>()?.to_f64()),
        other => Err(Error::Parse(format!("not numeric: {other}"))),
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// JSON for a float that may be infinite or NaN (written as a string).
pub(crate) fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
        assert!(slope(&[1.0], &[2.0]).is_none());
        assert!(slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("demo", &["n", "value"]);
        r.push_row(vec![json!(3), json!("3/2^1")]);
        r.check("bound", true, "");
        let text = r.to_csv().unwrap();
        assert_eq!(text, "# dyadic-walsh demo schema v1\nn,value\n3,3/2^1\n# check bound: pass\n");
        assert_eq!(r.column_f64("value").unwrap(), vec![1.5]);
    }
}
