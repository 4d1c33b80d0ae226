//! Builtin parametric series with known convergence behaviour.
//!
//! Every family supplies `ln(a_n / a_{n+1})` as a sum of cancellation-free
//! increments of iterated logarithms, so both the ratio and its excess over
//! one come out accurate to working precision even at `n = 10^7`.

use serde::{Deserialize, Serialize};

use crate::convergence::RatioSpec;
use crate::error::{Error, Result};
use crate::iterlog::{self, index_to_real, Level, K_MAX_NUMERIC};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SeriesFamily {
    /// `a_n = 1 / n^p`
    PSeries { p: f64 },
    /// `a_n = 1 / (n (ln n)^r)`
    LogPower { r: f64 },
    /// `a_n = 1 / (n prod_{k=1}^{depth} ln_(k) n (ln_(depth+1) n)^r)`
    IterlogPower { depth: u32, r: f64 },
    /// `a_n = x^n`
    Geometric { x: f64 },
}

/// Textual form of a family in the expression language.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpressionForm {
    /// Expression for the term `a_n`.
    Term(String),
    /// Expression for `a_n/a_{n+1} - 1`.
    Delta(String),
}

impl SeriesFamily {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be finite")))
            }
        };
        match *self {
            SeriesFamily::PSeries { p } => finite("p", p),
            SeriesFamily::LogPower { r } => finite("r", r),
            SeriesFamily::IterlogPower { depth, r } => {
                finite("r", r)?;
                if depth == 0 || depth >= K_MAX_NUMERIC {
                    return Err(Error::InvalidArgument(format!(
                        "iterlog-power depth must be in 1..={}, got {depth}",
                        K_MAX_NUMERIC - 1
                    )));
                }
                Ok(())
            }
            SeriesFamily::Geometric { x } => {
                if x > 0.0 && x.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "geometric ratio must be positive, got {x}"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeriesFamily::PSeries { .. } => "p-series",
            SeriesFamily::LogPower { .. } => "log-power",
            SeriesFamily::IterlogPower { .. } => "iterlog-power",
            SeriesFamily::Geometric { .. } => "geometric",
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SeriesFamily::PSeries { p } => format!("p-series(p={p})"),
            SeriesFamily::LogPower { r } => format!("log-power(r={r})"),
            SeriesFamily::IterlogPower { depth, r } => {
                format!("iterlog-power(depth={depth}, r={r})")
            }
            SeriesFamily::Geometric { x } => format!("geometric(x={x})"),
        }
    }

    /// Smallest index at which the ratio is defined.
    pub fn first_index(&self) -> u64 {
        match *self {
            SeriesFamily::PSeries { .. } | SeriesFamily::Geometric { .. } => 1,
            SeriesFamily::LogPower { .. } => 2,
            SeriesFamily::IterlogPower { depth, .. } => {
                iterlog::min_domain(Level::new(depth + 1).expect("depth >= 1")).unwrap_or(u64::MAX)
            }
        }
    }

    /// Analytic ground truth.
    pub fn converges(&self) -> bool {
        match *self {
            SeriesFamily::PSeries { p } => p > 1.0,
            SeriesFamily::LogPower { r } => r > 1.0,
            SeriesFamily::IterlogPower { r, .. } => r > 1.0,
            SeriesFamily::Geometric { x } => x < 1.0,
        }
    }

    /// Shallowest level at which `s_n` has a limit different from 1.
    pub fn decisive_level(&self) -> u32 {
        match *self {
            SeriesFamily::PSeries { .. } | SeriesFamily::Geometric { .. } => 1,
            SeriesFamily::LogPower { r } => {
                if r == 1.0 {
                    2
                } else {
                    1
                }
            }
            SeriesFamily::IterlogPower { depth, r } => {
                if r == 1.0 {
                    depth + 2
                } else {
                    depth + 1
                }
            }
        }
    }

    /// Finite limit of `s_n` at [`Self::decisive_level`], if there is one.
    pub fn limit_s(&self) -> Option<f64> {
        match *self {
            SeriesFamily::PSeries { p } => (p == 1.0).then_some(0.0),
            SeriesFamily::LogPower { r } | SeriesFamily::IterlogPower { r, .. } => {
                Some(if r == 1.0 { 0.0 } else { r })
            }
            SeriesFamily::Geometric { .. } => None,
        }
    }

    /// `ln(a_n / a_{n+1})` assembled from increments `D_j` of `ln_(j)`.
    pub fn log_ratio<R: Real>(&self, n: u64) -> Result<R> {
        if n < self.first_index() {
            return Err(Error::Domain(format!(
                "{} undefined at n={n}",
                self.label()
            )));
        }
        match *self {
            SeriesFamily::PSeries { p } => {
                let nr: R = index_to_real(n)?;
                Ok(R::from_f64(p) * nr.recip().ln_1p())
            }
            SeriesFamily::LogPower { r } => {
                let d = iterlog::iterlog_increments::<R>(2, n)?;
                Ok(d[0] + R::from_f64(r) * d[1])
            }
            SeriesFamily::IterlogPower { depth, r } => {
                let d = iterlog::iterlog_increments::<R>(depth + 2, n)?;
                let (last, rest) = d.split_last().expect("non-empty");
                let head = rest.iter().fold(R::zero(), |acc, &v| acc + v);
                Ok(head + R::from_f64(r) * *last)
            }
            SeriesFamily::Geometric { x } => Ok(-R::from_f64(x).ln()),
        }
    }

    /// The term `a_n` itself (may under- or overflow for large `n`).
    pub fn term<R: Real>(&self, n: u64) -> Result<R> {
        let nr: R = index_to_real(n)?;
        match *self {
            SeriesFamily::PSeries { p } => Ok(nr.powf(R::from_f64(-p))),
            SeriesFamily::LogPower { r } => {
                let l = iterlog::ladder::<R>(1, n)?[0];
                Ok((nr * l.powf(R::from_f64(r))).recip())
            }
            SeriesFamily::IterlogPower { depth, r } => {
                let logs = iterlog::ladder::<R>(depth + 1, n)?;
                let (last, rest) = logs.split_last().expect("non-empty");
                let prod = rest.iter().fold(nr, |acc, &l| acc * l);
                Ok((prod * last.powf(R::from_f64(r))).recip())
            }
            SeriesFamily::Geometric { x } => Ok((nr * R::from_f64(x).ln()).exp()),
        }
    }

    pub fn ratio_spec<R: Real>(&self) -> Result<RatioSpec<R>> {
        self.validate()?;
        let fam = *self;
        Ok(RatioSpec::with_delta(
            self.first_index(),
            move |n| Ok(fam.log_ratio::<R>(n)?.exp()),
            move |n| Ok(fam.log_ratio::<R>(n)?.exp_m1()),
        ))
    }

    /// Equivalent input for the expression language.
    pub fn expression(&self) -> ExpressionForm {
        match *self {
            SeriesFamily::PSeries { p } => ExpressionForm::Term(format!("1/n^{p:?}")),
            SeriesFamily::LogPower { r } => ExpressionForm::Term(format!("1/(n*ln(n)^{r:?})")),
            SeriesFamily::IterlogPower { depth, r } => {
                let mut s = String::from("1/(n");
                for k in 1..=depth {
                    s.push_str(&format!("*iterlog({k},n)"));
                }
                s.push_str(&format!("*iterlog({},n)^{r:?})", depth + 1));
                ExpressionForm::Term(s)
            }
            // x^n leaves the float range long before n = 10^7
            SeriesFamily::Geometric { x } => ExpressionForm::Delta(format!("1/{x:?}-1")),
        }
    }
}

/// The twelve-member reference catalog.
pub fn catalog() -> Vec<SeriesFamily> {
    let mut out = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        out.push(SeriesFamily::PSeries { p });
    }
    for r in [0.5, 1.0, 2.0] {
        out.push(SeriesFamily::LogPower { r });
    }
    for depth in [1, 2] {
        for r in [0.5, 2.0] {
            out.push(SeriesFamily::IterlogPower { depth, r });
        }
    }
    for x in [0.5, 2.0] {
        out.push(SeriesFamily::Geometric { x });
    }
    out
}
