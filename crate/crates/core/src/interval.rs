//! Closed intervals over the extended real line and finite unions of them.
//!
//! A [`PredictionSet`] is always stored in canonical form: intervals sorted
//! by lower endpoint, pairwise disjoint, and with touching intervals merged.
//! Two sets describing the same subset of the reals therefore compare equal.

use std::cmp::Ordering;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`; `lo` may be `-inf` and `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::Numerical("interval endpoint is NaN".into()));
        }
        if lo > hi {
            return Err(Error::Format(format!(
                "interval lower endpoint {lo} exceeds upper endpoint {hi}"
            )));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::Format(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(Interval { lo, hi })
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn point(y: f64) -> Result<Self> {
        Interval::new(y, y)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of disjoint closed intervals, possibly empty or unbounded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    intervals: Vec<Interval>,
}

impl PredictionSet {
    pub fn empty() -> Self {
        PredictionSet::default()
    }

    pub fn real_line() -> Self {
        PredictionSet {
            intervals: vec![Interval::real_line()],
        }
    }

    pub fn from_interval(interval: Interval) -> Self {
        PredictionSet {
            intervals: vec![interval],
        }
    }

    /// Builds the canonical form of the union of `intervals`.
    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        PredictionSet { intervals: merged }
    }

    /// `[lo, hi]`, or the empty set when `lo > hi`.
    pub fn from_bounds(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::Numerical("set endpoint is NaN".into()));
        }
        if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            Ok(PredictionSet::empty())
        } else {
            Ok(PredictionSet::from_interval(Interval { lo, hi }))
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_interval(&self) -> bool {
        self.intervals.len() == 1
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, y: f64) -> bool {
        // intervals are sorted by lo; find the last one starting at or before y
        let idx = self
            .intervals
            .partition_point(|iv| iv.lo.partial_cmp(&y) != Some(Ordering::Greater));
        idx > 0 && self.intervals[idx - 1].contains(y)
    }

    /// Total Lebesgue measure; `+inf` if any component is unbounded.
    pub fn width(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// Smallest lower endpoint and largest upper endpoint, if non-empty.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval {
            lo: first.lo,
            hi: last.hi,
        })
    }

    /// True if every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &PredictionSet) -> bool {
        self.intervals
            .iter()
            .all(|iv| other.intervals.iter().any(|o| o.lo <= iv.lo && iv.hi <= o.hi))
    }

    pub fn union(&self, other: &PredictionSet) -> PredictionSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        PredictionSet::from_intervals(all)
    }

    pub fn intersection(&self, other: &PredictionSet) -> PredictionSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo <= hi {
                out.push(Interval { lo, hi });
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        PredictionSet::from_intervals(out)
    }

    /// JSON form: an array of `[lo, hi]` pairs, with `"-inf"`/`"inf"` for
    /// unbounded endpoints.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.intervals
                .iter()
                .map(|iv| Value::Array(vec![endpoint_to_json(iv.lo), endpoint_to_json(iv.hi)]))
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let pairs = value
            .as_array()
            .ok_or_else(|| Error::Format("prediction set must be a JSON array".into()))?;
        let mut intervals = Vec::with_capacity(pairs.len());
        for pair in pairs {
            match pair.as_array().map(Vec::as_slice) {
                Some([lo, hi]) => intervals.push(Interval::new(endpoint_from_json(lo)?, endpoint_from_json(hi)?)?),
                _ => return Err(Error::Format(format!("interval must be a [lo, hi] pair, got {pair}"))),
            }
        }
        Ok(PredictionSet::from_intervals(intervals))
    }
}

impl fmt::Display for PredictionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

fn endpoint_to_json(x: f64) -> Value {
    if x == f64::INFINITY {
        Value::String("inf".into())
    } else if x == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}

fn endpoint_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Format(format!("endpoint {n} is not a real number"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        other => Err(Error::Format(format!("invalid interval endpoint {other}"))),
    }
}
