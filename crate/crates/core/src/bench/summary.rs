use std::io::Write;

use serde_json::{json, Value};

use super::experiment::RepRecord;
use crate::error::{Error, Result};

/// Min, quartiles (type-7 interpolation), mean and max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl SixNumber {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Size("cannot summarize an empty sample".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(SixNumber {
            min: v[0],
            q1: type7_quantile(&v, 0.25),
            median: type7_quantile(&v, 0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q3: type7_quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }

    fn as_array(&self) -> [f64; 6] {
        [self.min, self.q1, self.median, self.mean, self.q3, self.max]
    }
}

/// Linear interpolation between order statistics at position `(n−1)p`.
/// Infinite order statistics propagate instead of producing NaN.
pub fn type7_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        return sorted[lo];
    }
    let (a, b) = (sorted[lo], sorted[lo + 1]);
    if a == b {
        a
    } else if b.is_infinite() || a.is_infinite() {
        if a.is_infinite() {
            a
        } else {
            b
        }
    } else {
        a + frac * (b - a)
    }
}

/// One row of the per-method summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub coverage: SixNumber,
    pub width: SixNumber,
    /// Replications whose mean width was infinite.
    pub unbounded_widths: usize,
    /// Replications where the method failed; excluded from the statistics.
    pub failures: usize,
}

/// Six-number summaries per method, in order of first appearance.
pub fn summarize(records: &[RepRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::Size("no records to summarize".into()));
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let ok: Vec<&RepRecord> = records
                .iter()
                .filter(|r| r.method == method && r.failure.is_none())
                .collect();
            let failures = records
                .iter()
                .filter(|r| r.method == method && r.failure.is_some())
                .count();
            let cov: Vec<f64> = ok.iter().map(|r| r.coverage).collect();
            let width: Vec<f64> = ok.iter().map(|r| r.width).collect();
            if ok.is_empty() {
                return Err(Error::Numerical(format!("method {method} failed in every replication")));
            }
            Ok(SummaryRow {
                method: method.to_string(),
                coverage: SixNumber::of(&cov)?,
                width: SixNumber::of(&width)?,
                unbounded_widths: width.iter().filter(|w| w.is_infinite()).count(),
                failures,
            })
        })
        .collect()
}

const STATS: [&str; 6] = ["min", "q1", "median", "mean", "q3", "max"];

/// Summary CSV: one row per method, six coverage then six width columns.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["method".to_string()];
    header.extend(STATS.iter().map(|s| format!("coverage_{s}")));
    header.extend(STATS.iter().map(|s| format!("width_{s}")));
    header.push("unbounded_widths".into());
    header.push("failures".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.method.clone()];
        rec.extend(r.coverage.as_array().iter().map(|v| format_stat(*v)));
        rec.extend(r.width.as_array().iter().map(|v| format_stat(*v)));
        rec.push(r.unbounded_widths.to_string());
        rec.push(r.failures.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub(crate) fn format_stat(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn stat_json(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format_stat(v)))
}

/// Summary JSON: an array of objects with `coverage` and `width` maps.
pub fn summary_json(rows: &[SummaryRow]) -> Value {
    let six = |s: &SixNumber| {
        let mut m = serde_json::Map::new();
        for (k, v) in STATS.iter().zip(s.as_array()) {
            m.insert(k.to_string(), stat_json(v));
        }
        Value::Object(m)
    };
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "method": r.method,
                    "coverage": six(&r.coverage),
                    "width": six(&r.width),
                    "unbounded_widths": r.unbounded_widths,
                    "failures": r.failures,
                })
            })
            .collect(),
    )
}
