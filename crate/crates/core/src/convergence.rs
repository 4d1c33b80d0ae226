//! Ratio tests for positive series: Kummer's test with arbitrary weights,
//! extraction of the coefficient `s_n` of the iterated-logarithm expansion
//!
//! ```text
//! a_n / a_{n+1} = 1 + 1/n + (1/n) sum_{i=1}^{K-1} 1 / prod_{k<=i} ln_(k) n
//!                 + s_n / (n prod_{k<=K} ln_(k) n)
//! ```
//!
//! the level-K verdict derived from it, and adaptive escalation of `K`.
//!
//! `liminf`/`limsup` cannot be observed from finitely many samples, so every
//! test looks at the extrema of its statistic over the tail of a geometric
//! sample grid and demands a margin `eps` around the critical value. Anything
//! closer than that is reported as [`Decision::Inconclusive`].

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterlog::{self, index_to_real, Level, K_MAX_NUMERIC};
use crate::real::Real;

/// A sequence indexed by `n`, possibly undefined at some indices.
pub type SeqFn<R> = Arc<dyn Fn(u64) -> Result<R> + Send + Sync>;

/// Supplier of the term ratio `a_n / a_{n+1}`.
#[derive(Clone)]
pub struct RatioSpec<R> {
    ratio: SeqFn<R>,
    delta: Option<SeqFn<R>>,
    first_index: u64,
    support: Option<Arc<Vec<u64>>>,
    input_bits: u32,
}

impl<R: Real> RatioSpec<R> {
    pub fn new(first_index: u64, ratio: impl Fn(u64) -> Result<R> + Send + Sync + 'static) -> Self {
        Self {
            ratio: Arc::new(ratio),
            delta: None,
            first_index,
            support: None,
            input_bits: R::MANTISSA_BITS,
        }
    }

    /// Ratio with an accompanying cancellation-free `a_n/a_{n+1} - 1`.
    pub fn with_delta(
        first_index: u64,
        ratio: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
        delta: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
    ) -> Self {
        Self {
            delta: Some(Arc::new(delta)),
            ..Self::new(first_index, ratio)
        }
    }

    /// Ratio defined through its excess over one; `ratio = 1 + delta`.
    pub fn from_delta(
        first_index: u64,
        delta: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
    ) -> Self {
        let delta: SeqFn<R> = Arc::new(delta);
        let d = delta.clone();
        Self {
            ratio: Arc::new(move |n| Ok(R::one() + d(n)?)),
            delta: Some(delta),
            first_index,
            support: None,
            input_bits: R::MANTISSA_BITS,
        }
    }

    /// Restricts sampling to the listed indices (tabulated data).
    pub fn with_support(mut self, mut indices: Vec<u64>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        self.support = Some(Arc::new(indices));
        self
    }

    /// Declares how many significand bits the underlying data carry, which
    /// may be fewer than `R` holds (e.g. `f64` table values in extended runs).
    pub fn with_input_bits(mut self, bits: u32) -> Self {
        self.input_bits = bits.min(R::MANTISSA_BITS);
        self
    }

    pub fn first_index(&self) -> u64 {
        self.first_index
    }

    pub fn has_delta(&self) -> bool {
        self.delta.is_some()
    }

    pub fn support(&self) -> Option<&[u64]> {
        self.support.as_deref().map(Vec::as_slice)
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.first_index {
            return Err(Error::Domain(format!(
                "ratio undefined at n={n} (first index {})",
                self.first_index
            )));
        }
        Ok(())
    }

    pub fn ratio(&self, n: u64) -> Result<R> {
        self.check_index(n)?;
        let r = (self.ratio)(n)?;
        if !(r > R::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "ratio a_n/a_(n+1) must be positive and finite, got {:e} at n={n}",
                r.to_f64()
            )));
        }
        Ok(r)
    }

    pub fn delta(&self, n: u64) -> Option<Result<R>> {
        self.delta.as_ref().map(|d| {
            self.check_index(n)?;
            let v = d(n)?;
            if !v.is_finite() || !(v > -R::one()) {
                return Err(Error::Domain(format!(
                    "delta must be finite and > -1, got {:e} at n={n}",
                    v.to_f64()
                )));
            }
            Ok(v)
        })
    }
}

impl<R> std::fmt::Debug for RatioSpec<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RatioSpec")
            .field("first_index", &self.first_index)
            .field("has_delta", &self.delta.is_some())
            .field("support_len", &self.support.as_ref().map(|s| s.len()))
            .finish()
    }
}

/// Positive weights `zeta_n` for Kummer's test.
#[derive(Clone)]
pub struct KummerWeight<R> {
    zeta: SeqFn<R>,
    increment: Option<SeqFn<R>>,
    reciprocal_sum_diverges: bool,
    first_index: u64,
    level: Option<Level>,
}

impl<R: Real> KummerWeight<R> {
    /// `zeta_n = n prod_{k<=K} ln_(k) n`; its reciprocal sum diverges.
    pub fn iterlog(level: Level) -> Result<Self> {
        let level = Level::numeric(level.get())?;
        Ok(Self {
            zeta: Arc::new(move |n| iterlog::zeta_weight(level, n)),
            increment: Some(Arc::new(move |n| iterlog::zeta_increment(level.get(), n))),
            reciprocal_sum_diverges: true,
            first_index: iterlog::min_domain(level)?,
            level: Some(level),
        })
    }

    /// `zeta_n = n` (Raabe's test).
    pub fn raabe() -> Self {
        Self {
            zeta: Arc::new(index_to_real),
            increment: Some(Arc::new(|_| Ok(R::one()))),
            reciprocal_sum_diverges: true,
            first_index: 1,
            level: None,
        }
    }

    /// `zeta_n = 1` (d'Alembert's test).
    pub fn unit() -> Self {
        Self {
            zeta: Arc::new(|_| Ok(R::one())),
            increment: Some(Arc::new(|_| Ok(R::zero()))),
            reciprocal_sum_diverges: true,
            first_index: 1,
            level: None,
        }
    }

    /// Arbitrary weights. `reciprocal_sum_diverges` must be asserted by the
    /// caller; without it the test can only conclude convergence.
    pub fn custom(
        first_index: u64,
        zeta: impl Fn(u64) -> Result<R> + Send + Sync + 'static,
        reciprocal_sum_diverges: bool,
    ) -> Self {
        Self {
            zeta: Arc::new(zeta),
            increment: None,
            reciprocal_sum_diverges,
            first_index,
            level: None,
        }
    }

    pub fn reciprocal_sum_diverges(&self) -> bool {
        self.reciprocal_sum_diverges
    }

    pub fn level(&self) -> Option<Level> {
        self.level
    }

    pub fn zeta(&self, n: u64) -> Result<R> {
        if n < self.first_index {
            return Err(Error::Domain(format!(
                "weight undefined at n={n} (first index {})",
                self.first_index
            )));
        }
        let z = (self.zeta)(n)?;
        if !(z > R::zero()) {
            return Err(Error::Domain(format!(
                "Kummer weight must be positive, got {:e} at n={n}",
                z.to_f64()
            )));
        }
        Ok(z)
    }

    /// `zeta_{n+1} - zeta_n`.
    pub fn increment(&self, n: u64) -> Result<R> {
        match &self.increment {
            Some(inc) => {
                self.zeta(n)?;
                inc(n)
            }
            None => Ok(self.zeta(n + 1)? - self.zeta(n)?),
        }
    }
}

/// `rho_n = zeta_n a_n/a_{n+1} - zeta_{n+1}`.
///
/// With a delta form this is evaluated as
/// `zeta_n delta_n - (zeta_{n+1} - zeta_n)`, which avoids cancellation.
pub fn kummer_rho<R: Real>(weight: &KummerWeight<R>, ratio: &RatioSpec<R>, n: u64) -> Result<R> {
    let z = weight.zeta(n)?;
    match ratio.delta(n) {
        Some(delta) => Ok(z * delta? - weight.increment(n)?),
        None => Ok(z * ratio.ratio(n)? - weight.zeta(n + 1)?),
    }
}

/// One extracted coefficient `s_n` (at `K = 1` this is Bertrand's `r_n`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSample {
    pub n: u64,
    pub s: f64,
    /// Set when `ratio - 1` lost more than half of the available significand.
    pub precision_warning: bool,
}

/// `(1/n) * (1 + sum_{i=1}^{K-1} 1/prod_{k<=i} ln_(k) n)`: the part of the
/// expansion that precedes the `s_n` term.
fn leading_terms<R: Real>(logs: &[R], n: R) -> R {
    let mut sum = R::one();
    let mut prod = R::one();
    for &l in &logs[..logs.len() - 1] {
        prod *= l;
        sum += prod.recip();
    }
    sum / n
}

/// Extracts `s_n` at level `K`, returning it in the working precision `R`.
pub fn extract_sn_in<R: Real>(level: Level, ratio: &RatioSpec<R>, n: u64) -> Result<(R, bool)> {
    let logs = iterlog::ladder::<R>(level.get(), n)?;
    let nr: R = index_to_real(n)?;
    let (delta, reference) = match ratio.delta(n) {
        Some(d) => {
            let d = d?;
            (d, None)
        }
        None => {
            let r = ratio.ratio(n)?;
            (r - R::one(), Some(r))
        }
    };
    let bracket = delta - leading_terms(&logs, nr);
    let zeta = logs.iter().fold(nr, |acc, &l| acc * l);
    let s = bracket * zeta;
    let warning = match reference {
        // bits of `ratio` cancelled in forming `ratio - 1`; the second
        // subtraction only costs absolute accuracy of order ulp(ratio) * zeta
        Some(r) => {
            let lost = (r.to_f64() / delta.to_f64().abs()).log2();
            !(lost <= f64::from(ratio.input_bits) / 2.0)
        }
        None => false,
    };
    if !s.is_finite() {
        return Err(Error::Domain(format!("s_n is not finite at n={n}")));
    }
    Ok((s, warning))
}

/// Solves the level-K expansion for `s_n`.
pub fn extract_sn<R: Real>(level: Level, ratio: &RatioSpec<R>, n: u64) -> Result<ExtractionSample> {
    let (s, precision_warning) = extract_sn_in(level, ratio, n)?;
    Ok(ExtractionSample {
        n,
        s: s.to_f64(),
        precision_warning,
    })
}

/// Right-hand side of the level-K expansion for a given `s`.
pub fn reconstruct_ratio<R: Real>(level: Level, n: u64, s: R) -> Result<R> {
    let logs = iterlog::ladder::<R>(level.get(), n)?;
    let nr: R = index_to_real(n)?;
    let zeta = logs.iter().fold(nr, |acc, &l| acc * l);
    Ok(R::one() + (leading_terms(&logs, nr) + s / zeta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Converges,
    Diverges,
    Inconclusive,
}

impl Decision {
    pub fn is_decisive(self) -> bool {
        self != Decision::Inconclusive
    }
}

/// Closed index range `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if hi <= lo || lo == 0 {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }
}

pub const DEFAULT_GRID_POINTS: usize = 64;
pub const DEFAULT_MARGIN: f64 = 0.2;
pub const DEFAULT_NEAR_ONE_BAND: f64 = 0.5;
pub const DEFAULT_WINDOW_LO: u64 = 100;
pub const DEFAULT_WINDOW_HI: u64 = 10_000_000;

/// Geometrically spaced integers from `lo` to `hi` inclusive, deduplicated.
pub fn geometric_grid(window: Window, points: usize) -> Vec<u64> {
    let points = points.max(2);
    let (lo, hi) = (window.lo as f64, window.hi as f64);
    let ratio = hi / lo;
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            ((lo * ratio.powf(t)).round() as u64).clamp(window.lo, window.hi)
        })
        .collect();
    grid[0] = window.lo;
    grid[points - 1] = window.hi;
    grid.dedup();
    grid
}

/// Grid snapped onto a finite support: each geometric target maps to the
/// first supported index at or above it.
fn support_grid(window: Window, points: usize, support: &[u64]) -> Vec<u64> {
    let inside: Vec<u64> = support
        .iter()
        .copied()
        .filter(|&n| n >= window.lo && n <= window.hi)
        .collect();
    if inside.len() <= points {
        return inside;
    }
    let mut grid: Vec<u64> = geometric_grid(window, points)
        .into_iter()
        .filter_map(|t| inside.get(inside.partition_point(|&n| n < t)).copied())
        .collect();
    grid.dedup();
    grid
}

fn sample_grid<R: Real>(ratio: &RatioSpec<R>, window: Window, points: usize) -> Vec<u64> {
    match ratio.support() {
        Some(support) => support_grid(window, points, support),
        None => geometric_grid(window, points),
    }
}

/// Number of trailing grid points treated as the tail (last quarter).
pub fn tail_len(grid_len: usize) -> usize {
    grid_len.div_ceil(4).max(1).min(grid_len)
}

/// A sampled value of a test statistic (`s_n` or `rho_n`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: u64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_warning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Statistic `rho_n`, critical value 0.
    Kummer,
    /// Statistic `s_n`, critical value 1.
    ExtendedBdm,
}

/// Next-level check of a decisive candidate verdict.
///
/// `s^(K+1)_n = (s^(K)_n - 1) ln_(K+1) n` holds identically. If `s^(K)`
/// really stays away from 1, `s^(K+1)` must move in the same direction by
/// roughly `(mean s^(K) - 1) * change of ln_(K+1)` across the tail; if
/// instead `s^(K)` is creeping back to 1 (a family decided only at a deeper
/// level), `s^(K+1)` stays flat or drifts the other way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corroboration {
    pub next_level: Level,
    pub points: usize,
    pub observed_change: f64,
    pub predicted_change: f64,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    Accepted,
    Escalated,
    Stopped,
}

/// One level visited by [`adaptive_classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscalationStep {
    pub level: Level,
    pub window: Window,
    pub candidate: Decision,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub in_band: bool,
    pub corroboration: Option<Corroboration>,
    pub outcome: StepOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub test: TestKind,
    /// Level of the iterated-logarithm weight; `None` for other Kummer weights.
    pub level: Option<Level>,
    pub window: Window,
    pub threshold: f64,
    pub margin: f64,
    /// Tail minimum of the statistic over usable samples.
    pub s_min: Option<f64>,
    /// Tail maximum of the statistic over usable samples.
    pub s_max: Option<f64>,
    pub samples: Vec<Sample>,
    /// Index into `samples` where the tail begins.
    pub tail_start: usize,
    /// Tail samples excluded because of a precision warning.
    pub dropped: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub escalation: Vec<EscalationStep>,
}

impl Verdict {
    pub fn tail(&self) -> &[Sample] {
        &self.samples[self.tail_start..]
    }

    /// Tail samples that enter the extrema.
    pub fn usable_tail(&self) -> impl Iterator<Item = &Sample> {
        self.tail().iter().filter(|s| !s.precision_warning)
    }
}

fn check_margin(margin: f64) -> Result<()> {
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "margin must be positive, got {margin}"
        )));
    }
    Ok(())
}

/// Evaluates `f` over the grid. Samples may run concurrently; the first
/// failing index in grid order determines the error.
fn collect_samples<F>(grid: &[u64], f: F) -> Result<Vec<Sample>>
where
    F: Fn(u64) -> Result<Sample> + Sync,
{
    let results: Vec<Result<Sample>> = grid.par_iter().map(|&n| f(n)).collect();
    results.into_iter().collect()
}

fn decide(
    samples: Vec<Sample>,
    test: TestKind,
    level: Option<Level>,
    window: Window,
    threshold: f64,
    margin: f64,
    allow_divergence: bool,
) -> Verdict {
    let tail_start = samples.len() - tail_len(samples.len());
    let usable: Vec<f64> = samples[tail_start..]
        .iter()
        .filter(|s| !s.precision_warning)
        .map(|s| s.value)
        .collect();
    let dropped = samples.len() - tail_start - usable.len();
    let s_min = usable.iter().copied().reduce(f64::min);
    let s_max = usable.iter().copied().reduce(f64::max);
    let decision = match (s_min, s_max) {
        (Some(lo), _) if lo > threshold + margin => Decision::Converges,
        (_, Some(hi)) if hi < threshold - margin && allow_divergence => Decision::Diverges,
        _ => Decision::Inconclusive,
    };
    Verdict {
        decision,
        test,
        level,
        window,
        threshold,
        margin,
        s_min,
        s_max,
        samples,
        tail_start,
        dropped,
        escalation: Vec::new(),
    }
}

/// Kummer's test over the tail of a geometric grid on `window`.
pub fn kummer_test<R: Real>(
    weight: &KummerWeight<R>,
    ratio: &RatioSpec<R>,
    window: Window,
    margin: f64,
) -> Result<Verdict> {
    let window = Window::new(window.lo, window.hi)?;
    check_margin(margin)?;
    let grid = sample_grid(ratio, window, DEFAULT_GRID_POINTS);
    if grid.is_empty() {
        return Err(Error::InvalidWindow {
            lo: window.lo,
            hi: window.hi,
        });
    }
    let samples = collect_samples(&grid, |n| {
        Ok(Sample {
            n,
            value: kummer_rho(weight, ratio, n)?.to_f64(),
            precision_warning: false,
        })
    })?;
    Ok(decide(
        samples,
        TestKind::Kummer,
        weight.level(),
        window,
        0.0,
        margin,
        weight.reciprocal_sum_diverges(),
    ))
}

fn bdm_verdict<R: Real>(
    level: Level,
    ratio: &RatioSpec<R>,
    window: Window,
    margin: f64,
    points: usize,
) -> Result<Verdict> {
    let grid = sample_grid(ratio, window, points);
    if grid.is_empty() {
        return Err(Error::InvalidWindow {
            lo: window.lo,
            hi: window.hi,
        });
    }
    let samples = collect_samples(&grid, |n| {
        let e = extract_sn(level, ratio, n)?;
        Ok(Sample {
            n,
            value: e.s,
            precision_warning: e.precision_warning,
        })
    })?;
    Ok(decide(
        samples,
        TestKind::ExtendedBdm,
        Some(level),
        window,
        1.0,
        margin,
        true,
    ))
}

/// Level-K extended Bertrand-De Morgan test: converges when the tail of
/// `s_n` stays above `1 + margin`, diverges when it stays below `1 - margin`.
pub fn extended_bdm_test<R: Real>(
    level: Level,
    ratio: &RatioSpec<R>,
    window: Window,
    margin: f64,
) -> Result<Verdict> {
    let level = Level::numeric(level.get())?;
    let window = Window::new(window.lo, window.hi)?;
    check_margin(margin)?;
    bdm_verdict(level, ratio, window, margin, DEFAULT_GRID_POINTS)
}

/// Settings for [`adaptive_classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub k_start: u32,
    pub k_max: u32,
    /// Lower end of the sampling window; raised to the level's domain.
    pub window_lo: u64,
    pub window_hi: u64,
    pub grid_points: usize,
    pub margin: f64,
    pub near_one_band: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            k_start: 1,
            k_max: K_MAX_NUMERIC,
            window_lo: DEFAULT_WINDOW_LO,
            window_hi: DEFAULT_WINDOW_HI,
            grid_points: DEFAULT_GRID_POINTS,
            margin: DEFAULT_MARGIN,
            near_one_band: DEFAULT_NEAR_ONE_BAND,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        Level::numeric(self.k_start)?;
        Level::numeric(self.k_max)?;
        if self.k_max < self.k_start {
            return Err(Error::InvalidArgument(format!(
                "K_max={} is below K_start={}",
                self.k_max, self.k_start
            )));
        }
        check_margin(self.margin)?;
        if !(self.near_one_band > 0.0) {
            return Err(Error::InvalidArgument(
                "near-one band must be positive".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least two points".into(),
            ));
        }
        Window::new(self.window_lo.max(1), self.window_hi)?;
        Ok(())
    }

    /// Sampling window for `level`: starts at the largest of the configured
    /// lower end, the level's domain and the ratio's first index.
    pub fn window_for<R: Real>(&self, level: Level, ratio: &RatioSpec<R>) -> Result<Window> {
        let mut lo = self
            .window_lo
            .max(iterlog::min_domain(level)?)
            .max(ratio.first_index());
        let mut hi = self.window_hi;
        if let Some(support) = ratio.support() {
            lo = lo.max(support.first().copied().unwrap_or(lo));
            hi = hi.min(support.last().copied().unwrap_or(hi));
        }
        Window::new(lo, hi)
    }
}

fn corroborate<R: Real>(verdict: &Verdict, ratio: &RatioSpec<R>) -> Result<Option<Corroboration>> {
    let level = match verdict.level {
        Some(l) => l,
        None => return Ok(None),
    };
    let next = level.next();
    if next.get() > K_MAX_NUMERIC || !verdict.decision.is_decisive() {
        return Ok(None);
    }
    let next_min = iterlog::min_domain(next)?;
    let mut points: Vec<(u64, f64, f64)> = Vec::new();
    for sample in verdict.usable_tail().filter(|s| s.n >= next_min) {
        let e = extract_sn(next, ratio, sample.n)?;
        if !e.precision_warning {
            points.push((sample.n, sample.value, e.s));
        }
    }
    if points.len() < 2 {
        return Ok(None);
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    let mean_s = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let l_first: R = iterlog::iterlog(next, index_to_real::<R>(first.0)?)?;
    let l_last: R = iterlog::iterlog(next, index_to_real::<R>(last.0)?)?;
    let predicted_change = (mean_s - 1.0) * (l_last - l_first).to_f64();
    let observed_change = last.2 - first.2;
    let accepted = match verdict.decision {
        Decision::Converges => observed_change >= 0.5 * predicted_change,
        Decision::Diverges => observed_change <= 0.5 * predicted_change,
        Decision::Inconclusive => false,
    };
    Ok(Some(Corroboration {
        next_level: next,
        points: points.len(),
        observed_change,
        predicted_change,
        accepted,
    }))
}

/// Runs the level-K test starting at `k_start` and escalates `K` while the
/// evidence points at a deeper level:
///
/// * the verdict is inconclusive and all tail samples lie within
///   `near_one_band` of 1, or
/// * a decisive candidate is contradicted by the next-level check
///   ([`Corroboration`]).
///
/// Stops at the first accepted decisive verdict, or returns `Inconclusive`
/// once `k_max` (or the end of the usable index range) is reached. The
/// returned verdict carries the full escalation trace.
pub fn adaptive_classify<R: Real>(
    ratio: &RatioSpec<R>,
    config: &ClassifyConfig,
) -> Result<Verdict> {
    config.validate()?;
    let mut trace: Vec<EscalationStep> = Vec::new();
    let mut k = config.k_start;
    loop {
        let level = Level::numeric(k)?;
        let window = config.window_for(level, ratio)?;
        let mut verdict = bdm_verdict(level, ratio, window, config.margin, config.grid_points)?;
        let candidate = verdict.decision;
        let corroboration = corroborate::<R>(&verdict, ratio)?;
        let accepted =
            candidate.is_decisive() && corroboration.as_ref().map(|c| c.accepted).unwrap_or(true);
        let band = config.near_one_band;
        let in_band = verdict.usable_tail().count() > 0
            && verdict.usable_tail().all(|s| (s.value - 1.0).abs() <= band);
        let wants_deeper = !accepted && (in_band || candidate.is_decisive());
        let can_escalate = k < config.k_max
            && Level::numeric(k + 1)
                .and_then(|next| config.window_for(next, ratio))
                .is_ok();
        let outcome = if accepted {
            StepOutcome::Accepted
        } else if wants_deeper && can_escalate {
            StepOutcome::Escalated
        } else {
            StepOutcome::Stopped
        };
        trace.push(EscalationStep {
            level,
            window,
            candidate,
            s_min: verdict.s_min,
            s_max: verdict.s_max,
            in_band,
            corroboration,
            outcome,
        });
        match outcome {
            StepOutcome::Escalated => k += 1,
            _ => {
                if !accepted {
                    verdict.decision = Decision::Inconclusive;
                }
                verdict.escalation = trace;
                return Ok(verdict);
            }
        }
    }
}
