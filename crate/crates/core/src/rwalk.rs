//! Reflected random walk on the non-negative integers.
//!
//! From `S_0 = 1`, a walk at `S > 0` steps up with probability
//! `1/2 + alpha_S / S` and down otherwise; from 0 it always moves to 1. The
//! drift must satisfy `0 < alpha_n < min(C, n/2)`. The walk is recurrent
//! exactly when the birth-and-death chain with `lambda_n = 1/2 + alpha_n/n`,
//! `mu_n = 1/2 - alpha_n/n` is.

use std::sync::Arc;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bdp::{bdp_classify, BirthDeathRates, Classification, Recurrence};
use crate::convergence::{ClassifyConfig, SeqFn};
use crate::error::{Error, Result};
use crate::iterlog::{self, index_to_real, Level};
use crate::real::Real;

/// Drift coefficients `alpha_n` together with the cap `C`.
#[derive(Clone)]
pub struct DriftSpec<R> {
    alpha: SeqFn<R>,
    cap: f64,
}

impl<R: Real> DriftSpec<R> {
    pub fn new(cap: f64, alpha: impl Fn(u64) -> Result<R> + Send + Sync + 'static) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "drift cap C must be positive, got {cap}"
            )));
        }
        Ok(Self {
            alpha: Arc::new(alpha),
            cap,
        })
    }

    /// `alpha_n = a` for every `n`.
    pub fn constant(a: f64, cap: f64) -> Result<Self> {
        let spec = Self::new(cap, move |_| Ok(R::from_f64(a)))?;
        spec.alpha(1)?;
        Ok(spec)
    }

    /// Drift on the level-K boundary:
    /// `alpha_n = (1/4)(1 + sum_{k<K} 1/prod_{j<=k} ln_(j) n + c/prod_{j<=K} ln_(j) n)`
    /// for `n >= cutoff`, and `1/4` below the cutoff. The cap is twice the
    /// largest value taken.
    pub fn threshold(level: Level, c: f64, cutoff: u64) -> Result<Self> {
        let level = Level::numeric(level.get())?;
        let cutoff = cutoff.max(iterlog::min_domain(level)?);
        let formula = move |n: u64| -> Result<R> {
            let logs = iterlog::ladder::<R>(level.get(), n)?;
            let mut sum = R::one();
            let mut prod = R::one();
            for &l in &logs[..logs.len() - 1] {
                prod *= l;
                sum += prod.recip();
            }
            prod *= logs[logs.len() - 1];
            Ok(R::from_f64(0.25) * (sum + R::from_f64(c) / prod))
        };
        let peak = formula(cutoff)?.to_f64().max(0.25);
        let spec = Self::new(2.0 * peak, move |n| {
            if n < cutoff {
                Ok(R::from_f64(0.25))
            } else {
                formula(n)
            }
        })?;
        spec.alpha(cutoff)?;
        Ok(spec)
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `alpha_n`, checked against `0 < alpha_n < min(C, n/2)`.
    pub fn alpha(&self, n: u64) -> Result<R> {
        if n == 0 {
            return Err(Error::InvalidDrift {
                position: 0,
                reason: "drift is defined for n >= 1".into(),
            });
        }
        let a = (self.alpha)(n)?;
        let bound = self.cap.min(n as f64 / 2.0);
        if !(a > R::zero()) || !(a < R::from_f64(bound)) {
            return Err(Error::InvalidDrift {
                position: n,
                reason: format!(
                    "alpha = {:e} violates 0 < alpha < min(C={}, n/2)",
                    a.to_f64(),
                    self.cap
                ),
            });
        }
        Ok(a)
    }
}

/// `(P{up}, P{down})` from position `s`.
pub fn step_probabilities<R: Real>(spec: &DriftSpec<R>, s: u64) -> Result<(f64, f64)> {
    if s == 0 {
        return Ok((1.0, 0.0));
    }
    let a = spec.alpha(s)?.to_f64();
    let down = 0.5 - a / s as f64;
    // p_up is formed as 1 - p_down so that the pair sums to one in floating point
    Ok((1.0 - down, down))
}

/// The birth-and-death chain governing the walk's recurrence.
pub fn rw_to_bdp<R: Real>(spec: &DriftSpec<R>) -> Result<BirthDeathRates<R>> {
    spec.alpha(1)?;
    let (s1, s2, s3) = (spec.clone(), spec.clone(), spec.clone());
    let half = R::from_f64(0.5);
    Ok(BirthDeathRates::new(
        1,
        move |n| Ok(half + s1.alpha(n)? / index_to_real::<R>(n)?),
        move |n| Ok(half - s2.alpha(n)? / index_to_real::<R>(n)?),
    )
    // lambda/mu - 1 = (2 alpha/n) / (1/2 - alpha/n) = 4 alpha / (n - 2 alpha)
    .with_ratio_delta(move |n| {
        let a = s3.alpha(n)?;
        Ok(R::from_f64(4.0) * a / (index_to_real::<R>(n)? - R::from_f64(2.0) * a))
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RWClassification {
    pub decision: Recurrence,
    pub evidence: Classification,
}

pub fn rw_classify<R: Real>(
    spec: &DriftSpec<R>,
    config: &ClassifyConfig,
) -> Result<RWClassification> {
    let evidence = bdp_classify(&rw_to_bdp(spec)?, config)?;
    Ok(RWClassification {
        decision: evidence.decision,
        evidence,
    })
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `i`: the `(i+1)`-th output of a SplitMix64 stream started
/// at `master`.
pub fn path_seed(master: u64, path: u64) -> u64 {
    splitmix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(path.wrapping_add(1))))
}

/// Generator of path `i`: ChaCha8 keyed with four consecutive SplitMix64
/// outputs (little-endian) following `path_seed(master, i)`.
pub fn path_rng(master: u64, path: u64) -> ChaCha8Rng {
    let mut state = path_seed(master, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Position statistics at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionSummary {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n_paths: u64,
    pub horizon: u64,
    pub seed: u64,
    pub returned: u64,
    /// Fraction of paths that hit 0 by the horizon.
    pub returned_fraction: f64,
    /// Mean first hitting time of 0 over the returned paths.
    pub mean_first_return: Option<f64>,
    pub max_excursion: u64,
    pub final_positions: PositionSummary,
}

struct PathOutcome {
    first_return: Option<u64>,
    max_position: u64,
    final_position: u64,
}

/// Probability `p` as a threshold on uniform 64-bit words.
fn threshold_word(p: f64) -> u64 {
    // 2^64 * p, saturating; p = 1 is handled by the caller
    (p * 18_446_744_073_709_551_616.0) as u64
}

fn run_path<R: Real>(
    spec: &DriftSpec<R>,
    seed: u64,
    path: u64,
    horizon: u64,
) -> Result<PathOutcome> {
    let mut rng = path_rng(seed, path);
    // up-step thresholds by position, filled lazily as the walk explores
    let mut up: Vec<u64> = vec![u64::MAX];
    let mut s: u64 = 1;
    let mut max_position = 1;
    let mut first_return = None;
    for t in 1..=horizon {
        if s == 0 {
            s = 1;
            continue;
        }
        while up.len() as u64 <= s {
            let (p_up, _) = step_probabilities(spec, up.len() as u64)?;
            up.push(threshold_word(p_up));
        }
        // branch-free step: the direction is a coin flip the predictor cannot learn
        let step_up = u64::from(rng.next_u64() < up[s as usize]);
        s = s + 2 * step_up - 1;
        max_position = max_position.max(s);
        if s == 0 && first_return.is_none() {
            first_return = Some(t);
        }
    }
    Ok(PathOutcome {
        first_return,
        max_position,
        final_position: s,
    })
}

/// Simulates `n_paths` independent walks for `horizon` steps.
///
/// Paths run in parallel, each on its own generator ([`path_rng`]); the
/// report only uses counts, sums, minima and maxima, so it is identical for
/// any thread count. An invalid drift is reported for the lowest-numbered
/// failing path.
pub fn simulate<R: Real>(
    spec: &DriftSpec<R>,
    seed: u64,
    horizon: u64,
    n_paths: u64,
) -> Result<SimulationReport> {
    if horizon == 0 || n_paths == 0 {
        return Err(Error::InvalidArgument(
            "horizon and path count must be at least 1".into(),
        ));
    }
    let outcomes: Vec<Result<PathOutcome>> = (0..n_paths)
        .into_par_iter()
        .map(|i| run_path(spec, seed, i, horizon))
        .collect();
    let mut returned = 0u64;
    let mut return_time_sum = 0u128;
    let mut max_excursion = 0u64;
    let mut final_sum = 0u128;
    let mut final_min = u64::MAX;
    let mut final_max = 0u64;
    for outcome in outcomes {
        let o = outcome?;
        if let Some(t) = o.first_return {
            returned += 1;
            return_time_sum += u128::from(t);
        }
        max_excursion = max_excursion.max(o.max_position);
        final_sum += u128::from(o.final_position);
        final_min = final_min.min(o.final_position);
        final_max = final_max.max(o.final_position);
    }
    Ok(SimulationReport {
        n_paths,
        horizon,
        seed,
        returned,
        returned_fraction: returned as f64 / n_paths as f64,
        mean_first_return: (returned > 0).then(|| return_time_sum as f64 / returned as f64),
        max_excursion,
        final_positions: PositionSummary {
            min: final_min,
            max: final_max,
            mean: final_sum as f64 / n_paths as f64,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdp::recurrence_ratio;
    use crate::convergence::extract_sn;
    use crate::real::Dd;

    #[test]
    fn reflecting_state() {
        let spec = DriftSpec::<f64>::constant(0.25, 1.0).unwrap();
        assert_eq!(step_probabilities(&spec, 0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn constant_drift_probabilities() {
        let spec = DriftSpec::<f64>::constant(0.25, 1.0).unwrap();
        let (up, down) = step_probabilities(&spec, 10).unwrap();
        assert!((up - 0.525).abs() < 1e-15 && (down - 0.475).abs() < 1e-15);
        assert_eq!(up + down, 1.0);
    }

    #[test]
    fn drift_bounds_are_enforced() {
        let spec = DriftSpec::<f64>::new(1.0, |n| Ok(n as f64 / 2.0 - 1e-9)).unwrap();
        assert!(matches!(
            step_probabilities(&spec, 10),
            Err(Error::InvalidDrift { position: 10, .. })
        ));
        let spec = DriftSpec::<f64>::new(100.0, |n| Ok(n as f64 / 2.0)).unwrap();
        assert!(matches!(
            step_probabilities(&spec, 3),
            Err(Error::InvalidDrift { .. })
        ));
        assert!(DriftSpec::<f64>::constant(0.0, 1.0).is_err());
        assert!(DriftSpec::<f64>::constant(0.5, 1.0).is_err());
        assert!(DriftSpec::<f64>::constant(0.1, 0.0).is_err());
    }

    #[test]
    fn chain_rates() {
        let rates = rw_to_bdp(&DriftSpec::<f64>::constant(0.25, 1.0).unwrap()).unwrap();
        for n in [1u64, 2, 50] {
            assert!((rates.lambda(n).unwrap() - (0.5 + 0.25 / n as f64)).abs() < 1e-16);
            assert!((rates.mu(n).unwrap() - (0.5 - 0.25 / n as f64)).abs() < 1e-16);
        }
        let rates = rw_to_bdp(&DriftSpec::<f64>::constant(0.4, 1.0).unwrap()).unwrap();
        assert!((rates.lambda(2).unwrap() - 0.7).abs() < 1e-15);
        assert!((rates.mu(2).unwrap() - 0.3).abs() < 1e-15);
        let r = rates.lambda(2).unwrap() / rates.mu(2).unwrap();
        assert!((r - 7.0 / 3.0).abs() < 1e-14);
        assert!((rates.ratio_delta(2).unwrap().unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_drift_classification() {
        let cfg = ClassifyConfig::default();
        for (a, expected) in [
            (0.4, Recurrence::Transient),
            (0.1, Recurrence::Recurrent),
            (0.25, Recurrence::Recurrent),
        ] {
            let spec = DriftSpec::<Dd>::constant(a, 1.0).unwrap();
            assert_eq!(
                rw_classify(&spec, &cfg).unwrap().decision,
                expected,
                "alpha={a}"
            );
        }
    }

    #[test]
    fn threshold_drift_recovers_c() {
        for k in 1..=2u32 {
            let level = Level::new(k).unwrap();
            for c in [0.5, 2.0] {
                let spec = DriftSpec::<Dd>::threshold(level, c, 100).unwrap();
                let ratio = recurrence_ratio(&rw_to_bdp(&spec).unwrap());
                for n in [1_000_000u64, 10_000_000] {
                    let s = extract_sn(level, &ratio, n).unwrap().s;
                    assert!((s - c).abs() <= 0.15, "K={k} c={c} n={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn path_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| path_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        // SplitMix64 reference output for state 0x9E3779B97F4A7C15
        assert_eq!(path_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn single_step_law() {
        let spec = DriftSpec::<f64>::constant(0.1, 1.0).unwrap();
        let n = 20_000u64;
        let rep = simulate(&spec, 7, 1, n).unwrap();
        let p = 0.5 - 0.1;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (rep.returned_fraction - p).abs() < 4.0 * sigma,
            "{}",
            rep.returned_fraction
        );
        assert!(rep.final_positions.max <= 2);
        assert_eq!(rep.mean_first_return, Some(1.0));
    }

    #[test]
    fn simulation_rejects_empty_runs() {
        let spec = DriftSpec::<f64>::constant(0.1, 1.0).unwrap();
        assert!(simulate(&spec, 1, 0, 10).is_err());
        assert!(simulate(&spec, 1, 10, 0).is_err());
    }

    #[test]
    fn simulation_surfaces_invalid_drift() {
        let spec = DriftSpec::<f64>::new(1.0, |n| Ok(if n >= 3 { 2.0 } else { 0.3 })).unwrap();
        assert!(matches!(
            simulate(&spec, 3, 10_000, 50),
            Err(Error::InvalidDrift { position: 3, .. })
        ));
    }
}
