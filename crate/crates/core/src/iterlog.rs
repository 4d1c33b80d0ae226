//! Iterated logarithms `ln_(k)`, their products and the Kummer weights
//! `zeta_n = n * prod_{k<=K} ln_(k) n`.
//!
//! All functions are generic over [`Real`] so they can run in `f64` or in
//! double-double precision. Indices are `u64` and must stay below 2^53.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{Dd, Real};

/// Deepest level that can be sampled numerically. `min_domain(5)` exceeds
/// `e^3_814_279`, far outside any float range.
pub const K_MAX_NUMERIC: u32 = 4;

/// Largest index that converts to `f64` exactly.
pub const MAX_EXACT_INDEX: u64 = 1 << 53;

/// Iteration depth `K >= 1` of the logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Level(u32);

impl Level {
    pub const ONE: Level = Level(1);

    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidLevel(k));
        }
        Ok(Level(k))
    }

    /// Like [`Level::new`], additionally rejecting levels above [`K_MAX_NUMERIC`].
    pub fn numeric(k: u32) -> Result<Self> {
        let level = Self::new(k)?;
        if k > K_MAX_NUMERIC {
            return Err(Error::UnsupportedLevel(k));
        }
        Ok(level)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn next(self) -> Level {
        Level(self.0 + 1)
    }
}

impl TryFrom<u32> for Level {
    type Error = Error;
    fn try_from(k: u32) -> Result<Self> {
        Level::new(k)
    }
}

impl From<Level> for u32 {
    fn from(level: Level) -> u32 {
        level.0
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Smallest integer index at which `ln_(K)` is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterLogDomain {
    pub level: Level,
    pub min_n: u64,
}

impl IterLogDomain {
    pub fn of(level: Level) -> Result<Self> {
        Ok(Self {
            level,
            min_n: min_domain(level)?,
        })
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.min_n
    }
}

/// Converts an index to a real, rejecting indices that would round.
pub fn index_to_real<R: Real>(n: u64) -> Result<R> {
    if n >= MAX_EXACT_INDEX {
        return Err(Error::IndexTooLarge(n));
    }
    Ok(R::from_f64(n as f64))
}

/// `ln_(k) x`, the k-fold composition of the natural logarithm.
pub fn iterlog<R: Real>(k: Level, x: R) -> Result<R> {
    let mut v = x;
    for depth in 0..k.get() {
        if !(v > R::zero()) {
            return Err(Error::Domain(format!(
                "ln_({}) undefined: argument of the logarithm at depth {} is {:e}",
                k,
                depth + 1,
                v.to_f64()
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// `[ln_(1) n, ..., ln_(depth) n]`, requiring every entry to be positive.
pub fn ladder<R: Real>(depth: u32, n: u64) -> Result<Vec<R>> {
    let mut out = Vec::with_capacity(depth as usize);
    let mut v: R = index_to_real(n)?;
    for k in 1..=depth {
        v = v.ln();
        if !(v > R::zero()) {
            return Err(Error::Domain(format!(
                "ln_({k}) {n} = {:e} is not positive",
                v.to_f64()
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// `prod_{k=1}^{K} ln_(k) n`; the empty product (`K = 0`) is 1.
pub fn iterlog_product<R: Real>(k: u32, n: u64) -> Result<R> {
    Ok(ladder::<R>(k, n)?
        .into_iter()
        .fold(R::one(), |acc, l| acc * l))
}

/// Kummer weight `zeta_n = n * prod_{k=1}^{K} ln_(k) n`.
pub fn zeta_weight<R: Real>(k: Level, n: u64) -> Result<R> {
    let nr: R = index_to_real(n)?;
    Ok(nr * iterlog_product::<R>(k.get(), n)?)
}

/// Smallest integer `n` with `ln_(K) n > 0`, i.e. the first integer above the
/// tower `e^^(K-1)`.
pub fn min_domain(k: Level) -> Result<u64> {
    if k.get() > K_MAX_NUMERIC {
        return Err(Error::UnsupportedLevel(k.get()));
    }
    let mut tower = 1.0f64;
    for _ in 1..k.get() {
        tower = tower.exp();
    }
    // search upward from just below the tower
    let mut n = (tower.floor() as u64).saturating_sub(1).max(1);
    while ladder::<Dd>(k.get(), n).is_err() {
        n += 1;
    }
    Ok(n)
}

/// Leading-order prediction of `ln_(k)(n+1) - ln_(k)(n)`, namely
/// `1 / (n * prod_{j=1}^{k-1} ln_(j) n)`.
pub fn expansion_increment<R: Real>(k: Level, n: u64) -> Result<R> {
    ladder::<R>(k.get(), n)?;
    let nr: R = index_to_real(n)?;
    Ok((nr * iterlog_product::<R>(k.get() - 1, n)?).recip())
}

/// Exact increment `ln_(k)(n+1) - ln_(k)(n)` without cancellation.
///
/// Uses `D_1 = ln(1 + 1/n)` and `D_j = ln(1 + D_{j-1} / ln_(j-1) n)`.
/// Only `ln_(1..k-1) n` need to be positive.
pub fn iterlog_increment<R: Real>(k: u32, n: u64) -> Result<R> {
    if k == 0 {
        return Ok(R::one());
    }
    let logs = ladder::<R>(k - 1, n)?;
    let nr: R = index_to_real(n)?;
    let mut d = nr.recip().ln_1p();
    for l in logs {
        d = (d / l).ln_1p();
    }
    Ok(d)
}

/// Increments `[D_1, ..., D_depth]` of `ln_(j)` between `n` and `n+1`.
pub fn iterlog_increments<R: Real>(depth: u32, n: u64) -> Result<Vec<R>> {
    if depth == 0 {
        return Ok(Vec::new());
    }
    let logs = ladder::<R>(depth - 1, n)?;
    let nr: R = index_to_real(n)?;
    let mut out = Vec::with_capacity(depth as usize);
    let mut d = nr.recip().ln_1p();
    out.push(d);
    for l in logs {
        d = (d / l).ln_1p();
        out.push(d);
    }
    Ok(out)
}

/// `zeta_{n+1} - zeta_n` for the level-K weight, computed without
/// cancellation: `P(n+1) + n P(n) expm1(sum_{j=2}^{K+1} D_j)`.
pub fn zeta_increment<R: Real>(k: u32, n: u64) -> Result<R> {
    index_to_real::<R>(n + 1)?;
    let p = iterlog_product::<R>(k, n)?;
    let p_next = iterlog_product::<R>(k, n + 1)?;
    let incs = iterlog_increments::<R>(k + 1, n)?;
    let log_growth = incs.into_iter().skip(1).fold(R::zero(), |acc, d| acc + d);
    let nr: R = index_to_real(n)?;
    Ok(p_next + nr * p * log_growth.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn lv(k: u32) -> Level {
        Level::new(k).unwrap()
    }

    #[test]
    fn iterlog_trivial_values() {
        assert!((iterlog(lv(1), E).unwrap() - 1.0).abs() < 1e-15);
        assert!((iterlog(lv(2), E.powf(E)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn iterlog_three_of_hundred() {
        // ln ln ln 100 = 0.42342265246030381422... (mpmath, 40 digits)
        let v: f64 = iterlog(lv(3), 100.0).unwrap();
        assert!((v - 0.423_422_652_460_303_8).abs() < 1e-6, "{v}");
        let v: Dd = iterlog(lv(3), Dd::from(100.0)).unwrap();
        assert!((v.to_f64() - 0.423_422_652_460_303_8).abs() < 1e-15);
    }

    #[test]
    fn iterlog_rejects_nonpositive_intermediates() {
        assert!(matches!(iterlog(lv(1), 0.0f64), Err(Error::Domain(_))));
        assert!(matches!(iterlog(lv(1), -3.0f64), Err(Error::Domain(_))));
        // ln 0.5 < 0, so ln ln 0.5 is undefined
        assert!(matches!(iterlog(lv(2), 0.5f64), Err(Error::Domain(_))));
        // ln ln 2 < 0 is a legal final value, but ln_(3) 2 is not
        assert!(iterlog(lv(2), 2.0f64).unwrap() < 0.0);
        assert!(iterlog(lv(3), 2.0f64).is_err());
    }

    #[test]
    fn products_and_weights() {
        let p: f64 = iterlog_product(1, 10).unwrap();
        assert!((p - std::f64::consts::LN_10).abs() < 1e-12);
        assert_eq!(iterlog_product::<f64>(0, 7).unwrap(), 1.0);
        let z: f64 = zeta_weight(lv(1), 10).unwrap();
        assert!((z - 23.025_850_929_940_46).abs() < 1e-10);
        let z: f64 = zeta_weight(lv(1), 3).unwrap();
        assert!((z - 3.295_836_866_004_329).abs() < 1e-12);
        // 16 ln 16 ln ln 16 = 45.238952338971588... (mpmath)
        let z: f64 = zeta_weight(lv(2), 16).unwrap();
        assert!((z - 45.238_952_338_971_59).abs() < 1e-10, "{z}");
    }

    #[test]
    fn product_at_tower_point_is_e() {
        let x = E.powf(E);
        let l1 = iterlog(lv(1), x).unwrap();
        let l2 = iterlog(lv(2), x).unwrap();
        assert!((l1 * l2 - E).abs() < 1e-14);
    }

    #[test]
    fn min_domain_values() {
        assert_eq!(min_domain(lv(1)).unwrap(), 2);
        assert_eq!(min_domain(lv(2)).unwrap(), 3);
        assert_eq!(min_domain(lv(3)).unwrap(), 16);
        assert_eq!(min_domain(lv(4)).unwrap(), 3_814_280);
        assert_eq!(min_domain(lv(5)), Err(Error::UnsupportedLevel(5)));
    }

    #[test]
    fn min_domain_is_tight() {
        for k in 1..=K_MAX_NUMERIC {
            let m = min_domain(lv(k)).unwrap();
            let at: Dd = iterlog(lv(k), Dd::from_u64(m)).unwrap();
            assert!(at > Dd::zero());
            let below = iterlog(lv(k), Dd::from_u64(m - 1));
            assert!(below.map(|v| !(v > Dd::zero())).unwrap_or(true), "k={k}");
        }
    }

    #[test]
    fn domain_errors_below_min() {
        assert!(zeta_weight::<f64>(lv(2), 2).is_err());
        assert!(iterlog_product::<f64>(1, 1).is_err());
        assert!(expansion_increment::<f64>(lv(3), 15).is_err());
    }

    #[test]
    fn index_limit() {
        assert!(index_to_real::<f64>(MAX_EXACT_INDEX - 1).is_ok());
        assert_eq!(
            index_to_real::<f64>(MAX_EXACT_INDEX),
            Err(Error::IndexTooLarge(MAX_EXACT_INDEX))
        );
    }

    #[test]
    fn expansion_increment_examples() {
        let e1: f64 = expansion_increment(lv(1), 100).unwrap();
        assert_eq!(e1, 0.01);
        let e2: f64 = expansion_increment(lv(2), 100).unwrap();
        assert!((e2 - 0.002_171_472_409_516_259).abs() < 1e-12);
        let direct = iterlog(lv(2), 101.0f64).unwrap() - iterlog(lv(2), 100.0f64).unwrap();
        assert!((direct - e2).abs() < 1e-4);
    }

    #[test]
    fn increment_matches_direct_difference() {
        for k in 1..=3u32 {
            for &n in &[20u64, 1000, 123_456] {
                let direct = iterlog(lv(k), Dd::from_u64(n + 1)).unwrap()
                    - iterlog(lv(k), Dd::from_u64(n)).unwrap();
                let inc: Dd = iterlog_increment(k, n).unwrap();
                let rel = ((inc - direct) / direct).abs().to_f64();
                assert!(rel < 1e-15, "k={k} n={n} rel={rel:e}");
            }
        }
    }

    #[test]
    fn zeta_increment_matches_difference() {
        for k in 1..=3u32 {
            for &n in &[20u64, 5000] {
                let a: Dd = zeta_weight(lv(k), n).unwrap();
                let b: Dd = zeta_weight(lv(k), n + 1).unwrap();
                let inc: Dd = zeta_increment(k, n).unwrap();
                let rel = ((inc - (b - a)) / inc).abs().to_f64();
                assert!(rel < 1e-20, "k={k} n={n} rel={rel:e}");
            }
        }
    }

    #[test]
    fn level_validation() {
        assert_eq!(Level::new(0), Err(Error::InvalidLevel(0)));
        assert_eq!(Level::numeric(5), Err(Error::UnsupportedLevel(5)));
        assert_eq!(Level::new(7).unwrap().get(), 7);
    }
}
