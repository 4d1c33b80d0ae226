//! Scalar abstraction over native `f64` and a double-double extended type.
//!
//! Every numeric path in the crate is generic over [`Real`], so the same
//! extraction code runs in hardware precision or in roughly 106-bit
//! double-double precision ([`DoubleDouble`]). The double-double kernels
//! follow the classic error-free transformation scheme (Dekker, Knuth,
//! Hida-Li-Bailey).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Real scalar used by the iterated-logarithm and ratio-test machinery.
pub trait Real:
    Copy
    + Send
    + Sync
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Machine epsilon of the representation (spacing of values near 1).
    const EPSILON: f64;
    /// Number of significand bits carried by the representation.
    const MANTISSA_BITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    fn recip(self) -> Self {
        Self::one() / self
    }
    /// `self^p` for positive `self`, computed as `exp(p ln self)`.
    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;
    const MANTISSA_BITS: u32 = 53;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

/// Short alias used throughout the crate.
pub type Dd = DoubleDouble;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Number of argument halvings before the exp Taylor series.
const EXP_SQUARINGS: i32 = 9;

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Exact conversion for |n| < 2^106.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        // `hi` is within 2^11 of n, so the remainder is exact in i128 and in f64.
        let lo = (n as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    fn mul_pow2(self, k: i32) -> Self {
        // two steps so that 2^k itself never overflows or flushes to zero
        let a = 2f64.powi(k / 2);
        let b = 2f64.powi(k - k / 2);
        Self {
            hi: self.hi * a * b,
            lo: self.lo * a * b,
        }
    }

    /// `exp(r) - 1` for |r| <= ln(2)/2, accurate to double-double precision.
    fn expm1_reduced(r: Self) -> Self {
        let x = r.mul_pow2(-EXP_SQUARINGS);
        let mut sum = x;
        let mut term = x;
        let mut k = 2.0;
        loop {
            term = term * x / Self::from_f64(k);
            sum += term;
            // negated so that a NaN term also ends the loop
            if !(term.hi.abs() > 1e-36 * sum.hi.abs()) {
                break;
            }
            k += 1.0;
        }
        // e^{2y} - 1 = (e^y - 1)(e^y - 1 + 2)
        for _ in 0..EXP_SQUARINGS {
            sum = sum * (sum + Self::from_f64(2.0));
        }
        sum
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, y: Self) -> Self {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let (p, e) = two_prod(self.hi, y.hi);
        let e = e + (self.hi * y.lo + self.lo * y.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        let r = self - y * Self::from(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Self::from(q2);
        let q3 = r.hi / y.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, y: Self) {
        *self = *self + y;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, y: Self) {
        *self = *self - y;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, y: Self) {
        *self = *self * y;
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.930_380_657_631_324e-32; // 2^-104
    const MANTISSA_BITS: u32 = 106;

    fn from_f64(x: f64) -> Self {
        Self::from(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        if self.hi.is_nan() {
            return self;
        }
        if self.hi > 709.78 {
            return Self::from(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::from(0.0);
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * Self::from(k);
        (Self::expm1_reduced(r) + Self::one()).mul_pow2(k as i32)
    }

    fn exp_m1(self) -> Self {
        if self.hi.abs() <= 0.34 {
            Self::expm1_reduced(self)
        } else {
            self.exp() - Self::one()
        }
    }

    fn ln(self) -> Self {
        if self.hi.is_nan() || self.hi < 0.0 {
            return Self::from(f64::NAN);
        }
        if self.hi == 0.0 {
            return Self::from(f64::NEG_INFINITY);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Newton on exp(y) = x; each step doubles the correct digits.
        let mut y = Self::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Self::one();
        }
        y
    }

    fn powf(self, p: Self) -> Self {
        let l = self.ln();
        let t = p * l;
        if t.hi.is_nan() && !p.hi.is_nan() && !l.hi.is_nan() {
            // the error term of an overflowing product is NaN
            return Self::from(p.hi * l.hi).exp();
        }
        t.exp()
    }

    fn ln_1p(self) -> Self {
        if self.hi.abs() > 0.25 {
            return (Self::one() + self).ln();
        }
        if self.hi == 0.0 {
            return self;
        }
        // Newton on expm1(y) = x keeps full relative accuracy for tiny x.
        let mut y = Self::from(self.hi.ln_1p());
        for _ in 0..2 {
            let e = y.exp_m1();
            y -= (e - self) / (e + Self::one());
        }
        y
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, hi: f64, lo: f64, rel: f64) -> bool {
        let d = (a - Dd::new(hi, lo)).abs();
        d.to_f64() <= rel * hi.abs()
    }

    // Reference digits produced with mpmath at 50 significant digits.
    #[test]
    fn ln_matches_reference() {
        // ln(10) = 2.302585092994045684017991454684364207601101488628772976
        let x = Dd::from(10.0).ln();
        assert!(
            close(x, std::f64::consts::LN_10, -2.1707562233822494e-16, 1e-30),
            "{x:?}"
        );
        // ln(1e6) = 13.81551055796427410410794872810618524560660893177263786
        let x = Dd::from(1e6).ln();
        assert!(
            close(x, 13.815510557964274, 4.739031053709008e-16, 1e-30),
            "{x:?}"
        );
    }

    #[test]
    fn exp_ln_round_trip() {
        for &v in &[1e-8, 0.3, 1.0, 2.5, 17.0, 123.456, 1e5] {
            let x = Dd::from(v);
            let back = x.ln().exp();
            let rel = ((back - x) / x).abs().to_f64();
            assert!(rel < 1e-30, "v={v} rel={rel:e}");
        }
    }

    #[test]
    fn ln_1p_and_exp_m1_keep_relative_accuracy() {
        for &v in &[1e-20, 3e-12, 1e-7, 1e-3, 0.2] {
            let x = Dd::from(v);
            let back = x.ln_1p().exp_m1();
            let rel = ((back - x) / x).abs().to_f64();
            assert!(rel < 1e-30, "v={v} rel={rel:e}");
        }
    }

    #[test]
    fn e_constant_has_unit_log() {
        let e = Dd::one().exp();
        // e = 2.718281828459045235360287471352662497757247093699959574966
        assert!(
            close(e, std::f64::consts::E, 1.4456468917292502e-16, 1e-31),
            "{e:?}"
        );
        assert!((e.ln() - Dd::one()).abs().to_f64() < 1e-31);
    }

    #[test]
    fn from_u64_is_exact() {
        let n = (1u64 << 60) + 12345;
        let d = Dd::from_u64(n);
        assert_eq!(d.hi() as i128 + d.lo() as i128, n as i128);
    }

    #[test]
    fn division_is_inverse_of_multiplication() {
        let a = Dd::from(1.0) / Dd::from(3.0);
        let b = a * Dd::from(3.0);
        assert!((b - Dd::one()).abs().to_f64() < 1e-31);
    }

    #[test]
    fn non_finite_arguments_terminate() {
        assert!(Dd::from(f64::NAN).exp().to_f64().is_nan());
        assert!(Dd::from(f64::NAN).exp_m1().to_f64().is_nan());
        // the product overflows to NaN in double-double arithmetic
        let big = Dd::from(1e308) * Dd::from(1e-9).ln();
        assert!(!big.exp().to_f64().is_finite());
        assert_eq!(Dd::from(1e-9).powf(Dd::from(1e308)).to_f64(), 0.0);
        assert_eq!(Dd::from(1e9).powf(Dd::from(1e308)).to_f64(), f64::INFINITY);
    }
}
