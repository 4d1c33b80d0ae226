//! Tabulated sequences read from two-column text.
//!
//! Each non-blank line holds an index and a value separated by whitespace
//! or a comma; `#` starts a comment. Indices must be strictly increasing.
//! With [`Columns::Term`] the value is `a_n` and a ratio is formed only
//! between rows `n` and `n+1` that are both present; with
//! [`Columns::Ratio`] the value is `a_n / a_{n+1}` itself. No interpolation
//! is ever done: sampling is restricted to the indices that carry a ratio.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convergence::RatioSpec;
use crate::error::{Error, Result};
use crate::iterlog::MAX_EXACT_INDEX;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Columns {
    /// `n, a_n`
    Term,
    /// `n, a_n / a_{n+1}`
    Ratio,
}

impl std::str::FromStr for Columns {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "term" | "n,a" => Ok(Columns::Term),
            "ratio" | "n,ratio" => Ok(Columns::Ratio),
            _ => Err(Error::InvalidArgument(format!(
                "unknown column layout '{s}' (expected 'term' or 'ratio')"
            ))),
        }
    }
}

/// Ratios `a_n / a_{n+1}` at the indices where the table defines them.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Columns,
    rows: usize,
    /// `(n, num, den)` with `ratio(n) = num / den`; term layouts keep both
    /// terms so that the division happens at the working precision.
    entries: Vec<(u64, f64, f64)>,
}

fn parse_index(field: &str, line: usize) -> Result<u64> {
    if let Ok(n) = field.parse::<u64>() {
        return Ok(n);
    }
    match field.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v >= 0.0 && v < MAX_EXACT_INDEX as f64 => Ok(v as u64),
        _ => Err(Error::Table(format!(
            "line {line}: index '{field}' is not a non-negative integer"
        ))),
    }
}

impl Table {
    pub fn parse(text: &str, columns: Columns) -> Result<Self> {
        let mut rows: Vec<(u64, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Table(format!(
                    "line {line}: expected 2 columns, found {}",
                    fields.len()
                )));
            }
            let n = parse_index(fields[0], line)?;
            if n == 0 {
                return Err(Error::Table(format!("line {line}: indices start at 1")));
            }
            let v: f64 = fields[1].parse().map_err(|_| {
                Error::Table(format!(
                    "line {line}: value '{}' is not a number",
                    fields[1]
                ))
            })?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Table(format!(
                    "line {line}: value must be positive and finite, got {v}"
                )));
            }
            if let Some(&(prev, _)) = rows.last() {
                if n <= prev {
                    return Err(Error::Table(format!(
                        "line {line}: index {n} does not increase (previous {prev})"
                    )));
                }
            }
            rows.push((n, v));
        }
        if rows.is_empty() {
            return Err(Error::Table("no data rows".into()));
        }
        let entries: Vec<(u64, f64, f64)> = match columns {
            Columns::Ratio => rows.iter().map(|&(n, r)| (n, r, 1.0)).collect(),
            Columns::Term => rows
                .windows(2)
                .filter(|w| w[1].0 == w[0].0 + 1)
                .map(|w| (w[0].0, w[0].1, w[1].1))
                .collect(),
        };
        if entries.is_empty() {
            return Err(Error::Table(
                "no two consecutive indices; no ratio can be formed".into(),
            ));
        }
        Ok(Table {
            columns,
            rows: rows.len(),
            entries,
        })
    }

    pub fn from_path(path: impl AsRef<Path>, columns: Columns) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, columns)
    }

    pub fn columns(&self) -> Columns {
        self.columns
    }

    /// Number of data rows read.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Indices carrying a ratio.
    pub fn support(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Ratio supplier restricted to [`Self::support`]; the data carry 53
    /// significand bits whatever the working precision.
    pub fn ratio_spec<R: Real>(&self) -> RatioSpec<R> {
        let entries = Arc::new(self.entries.clone());
        let first = entries[0].0;
        RatioSpec::new(first, move |n| {
            let i = entries
                .binary_search_by_key(&n, |e| e.0)
                .map_err(|_| Error::Domain(format!("table has no ratio at n={n}")))?;
            let (_, num, den) = entries[i];
            Ok(R::from_f64(num) / R::from_f64(den))
        })
        .with_support(self.support())
        .with_input_bits(f64::MANTISSA_DIGITS)
    }
}
