//! Recurrence of birth-and-death processes.
//!
//! A chain with birth rates `lambda_n` and death rates `mu_n` is recurrent
//! iff `sum_n prod_{k<=n} mu_k/lambda_k` diverges. With
//! `a_n = prod_{k<=n} mu_k/lambda_k` the term ratio is
//! `a_n/a_{n+1} = lambda_{n+1}/mu_{n+1}`, so the question reduces to the
//! series tests in [`crate::convergence`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convergence::{adaptive_classify, ClassifyConfig, Decision, RatioSpec, SeqFn, Verdict};
use crate::error::{Error, Result};
use crate::iterlog::{self, index_to_real, Level};
use crate::real::Real;

/// Birth rates `lambda(n)` and death rates `mu(n)`, both in `(0, inf)`.
#[derive(Clone)]
pub struct BirthDeathRates<R> {
    lambda: SeqFn<R>,
    mu: SeqFn<R>,
    ratio_delta: Option<SeqFn<R>>,
    first_index: u64,
}

impl<R: Real> BirthDeathRates<R> {
    pub fn new(
        first_index: u64,
        lambda: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
        mu: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
    ) -> Self {
        Self {
            lambda: Arc::new(lambda),
            mu: Arc::new(mu),
            ratio_delta: None,
            first_index: first_index.max(1),
        }
    }

    /// Attaches a cancellation-free form of `lambda_n/mu_n - 1`.
    pub fn with_ratio_delta(
        mut self,
        delta: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
    ) -> Self {
        self.ratio_delta = Some(Arc::new(delta));
        self
    }

    /// `lambda_n = mu_n = 1/2`.
    pub fn symmetric() -> Self {
        let half = || R::from_f64(0.5);
        Self::new(1, move |_| Ok(half()), move |_| Ok(half())).with_ratio_delta(|_| Ok(R::zero()))
    }

    /// `lambda_n / mu_n = 1 + c/n` with `mu_n = 1`.
    pub fn power_ratio(c: f64) -> Result<Self> {
        if !(c > -1.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need c > -1 for positive rates, got {c}"
            )));
        }
        let cr = R::from_f64(c);
        Ok(Self::new(
            1,
            move |n| Ok(R::one() + cr / index_to_real::<R>(n)?),
            |_| Ok(R::one()),
        )
        .with_ratio_delta(move |n| Ok(cr / index_to_real::<R>(n)?)))
    }

    /// Rates sitting exactly on the level-K boundary with coefficient `c`:
    /// `lambda_n/mu_n = 1 + 1/n + (1/n) sum_{i<K} 1/prod_{j<=i} ln_(j) n
    /// + c / (n prod_{j<=K} ln_(j) n)`, `mu_n = 1`, for `n >= min_domain(K)`.
    pub fn threshold(level: Level, c: f64) -> Result<Self> {
        let level = Level::numeric(level.get())?;
        if !c.is_finite() {
            return Err(Error::InvalidArgument("c must be finite".into()));
        }
        // start where the ratio is positive (matters only for very negative c)
        let first = (iterlog::min_domain(level)?..)
            .find(|&n| threshold_excess::<f64>(level, c, n).is_ok_and(|d| d > -1.0))
            .expect("the excess tends to zero");
        Ok(Self::new(
            first,
            move |n| Ok(R::one() + threshold_excess::<R>(level, c, n)?),
            |_| Ok(R::one()),
        )
        .with_ratio_delta(move |n| threshold_excess::<R>(level, c, n)))
    }

    /// Multiplies both rates by the same positive factor `g(n)`.
    pub fn scaled(self, g: impl Fn(u64) -> Result<R> + Send + Sync + 'static) -> Self {
        let g: SeqFn<R> = Arc::new(g);
        let (lambda, mu) = (self.lambda.clone(), self.mu.clone());
        let (g1, g2) = (g.clone(), g);
        Self {
            lambda: Arc::new(move |n| Ok(lambda(n)? * g1(n)?)),
            mu: Arc::new(move |n| Ok(mu(n)? * g2(n)?)),
            ratio_delta: self.ratio_delta,
            first_index: self.first_index,
        }
    }

    pub fn first_index(&self) -> u64 {
        self.first_index
    }

    fn positive(&self, what: &str, v: R, n: u64) -> Result<R> {
        if v > R::zero() && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "{what} rate must lie in (0, inf), got {:e} at n={n}",
                v.to_f64()
            )))
        }
    }

    pub fn lambda(&self, n: u64) -> Result<R> {
        self.check_index(n)?;
        self.positive("birth", (self.lambda)(n)?, n)
    }

    pub fn mu(&self, n: u64) -> Result<R> {
        self.check_index(n)?;
        self.positive("death", (self.mu)(n)?, n)
    }

    pub fn ratio_delta(&self, n: u64) -> Option<Result<R>> {
        self.ratio_delta.as_ref().map(|d| {
            self.check_index(n)?;
            d(n)
        })
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.first_index {
            return Err(Error::Domain(format!(
                "rates undefined at n={n} (first index {})",
                self.first_index
            )));
        }
        Ok(())
    }
}

fn threshold_excess<R: Real>(level: Level, c: f64, n: u64) -> Result<R> {
    let logs = iterlog::ladder::<R>(level.get(), n)?;
    let nr: R = index_to_real(n)?;
    let mut sum = R::one();
    let mut prod = R::one();
    for &l in &logs[..logs.len() - 1] {
        prod *= l;
        sum += prod.recip();
    }
    prod *= logs[logs.len() - 1];
    Ok((sum + R::from_f64(c) / prod) / nr)
}

/// Term ratio of `a_n = prod_{k<=n} mu_k/lambda_k`:
/// `ratio(n) = lambda(n+1)/mu(n+1)`.
pub fn recurrence_ratio<R: Real>(rates: &BirthDeathRates<R>) -> RatioSpec<R> {
    let first = rates.first_index().saturating_sub(1).max(1);
    let r1 = rates.clone();
    let ratio = move |n: u64| Ok(r1.lambda(n + 1)? / r1.mu(n + 1)?);
    if rates.ratio_delta.is_some() {
        let r2 = rates.clone();
        RatioSpec::with_delta(first, ratio, move |n| {
            r2.lambda(n + 1)?;
            r2.mu(n + 1)?;
            r2.ratio_delta(n + 1).expect("delta present")
        })
    } else {
        RatioSpec::new(first, ratio)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recurrence {
    Recurrent,
    Transient,
    Inconclusive,
}

impl Recurrence {
    /// Convergent series means transient, divergent means recurrent.
    pub fn from_series(decision: Decision) -> Self {
        match decision {
            Decision::Converges => Recurrence::Transient,
            Decision::Diverges => Recurrence::Recurrent,
            Decision::Inconclusive => Recurrence::Inconclusive,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Recurrence::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub decision: Recurrence,
    pub evidence: Verdict,
}

pub fn bdp_classify<R: Real>(
    rates: &BirthDeathRates<R>,
    config: &ClassifyConfig,
) -> Result<Classification> {
    let evidence = adaptive_classify(&recurrence_ratio(rates), config)?;
    Ok(Classification {
        decision: Recurrence::from_series(evidence.decision),
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::extract_sn;
    use crate::real::Dd;

    #[test]
    fn symmetric_chain_has_unit_ratio() {
        let spec = recurrence_ratio(&BirthDeathRates::<f64>::symmetric());
        for n in [1, 10, 1000] {
            assert_eq!(spec.ratio(n).unwrap(), 1.0);
        }
    }

    #[test]
    fn index_shift() {
        let spec = recurrence_ratio(&BirthDeathRates::<f64>::power_ratio(2.0).unwrap());
        for n in [1u64, 9, 500] {
            let expected = 1.0 + 2.0 / (n + 1) as f64;
            assert!((spec.ratio(n).unwrap() - expected).abs() < 1e-15);
            assert!((spec.delta(n).unwrap().unwrap() - 2.0 / (n + 1) as f64).abs() < 1e-18);
        }
    }

    #[test]
    fn drift_rates_ratio_at_ten() {
        let rates = BirthDeathRates::<f64>::new(
            1,
            |n| Ok(0.5 + 0.4 / n as f64),
            |n| Ok(0.5 - 0.4 / n as f64),
        );
        let r = recurrence_ratio(&rates).ratio(10).unwrap();
        assert!((r - 59.0 / 51.0).abs() < 1e-14, "{r}");
    }

    #[test]
    fn rejects_nonpositive_rates() {
        let rates =
            BirthDeathRates::<f64>::new(1, |_| Ok(1.0), |n| Ok(if n > 5 { 0.0 } else { 1.0 }));
        assert!(rates.mu(6).is_err());
        assert!(matches!(
            recurrence_ratio(&rates).ratio(5),
            Err(Error::Domain(_))
        ));
        assert!(BirthDeathRates::<f64>::power_ratio(-1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let cfg = ClassifyConfig::default();
        let c = bdp_classify(&BirthDeathRates::<Dd>::power_ratio(2.0).unwrap(), &cfg).unwrap();
        assert_eq!(c.decision, Recurrence::Transient);
        let c = bdp_classify(&BirthDeathRates::<Dd>::symmetric(), &cfg).unwrap();
        assert_eq!(c.decision, Recurrence::Recurrent);
        let c = bdp_classify(&BirthDeathRates::<Dd>::power_ratio(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(c.decision, Recurrence::Recurrent);
    }

    #[test]
    fn threshold_rates_recover_c() {
        for k in 1..=3u32 {
            let level = Level::new(k).unwrap();
            for c in [0.5, 2.0] {
                let spec = recurrence_ratio(&BirthDeathRates::<Dd>::threshold(level, c).unwrap());
                for n in [1_000_000u64, 3_000_000, 10_000_000] {
                    let s = extract_sn(level, &spec, n).unwrap().s;
                    assert!((s - c).abs() <= 0.1, "K={k} c={c} n={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn scaling_both_rates_keeps_ratio() {
        let base = BirthDeathRates::<f64>::new(1, |n| Ok(1.0 + 2.0 / n as f64), |_| Ok(1.0));
        let scaled = base.clone().scaled(|n| Ok(3.0 + (n as f64).sqrt()));
        let (a, b) = (recurrence_ratio(&base), recurrence_ratio(&scaled));
        for n in [1u64, 17, 4096] {
            let (x, y) = (a.ratio(n).unwrap(), b.ratio(n).unwrap());
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * x);
        }
    }
}
