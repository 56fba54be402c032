//! Exact dyadic rationals `sign * numerator * 2^exp2`.
//!
//! This is the brute-force reference the rest of the crate is tested
//! against. Rounding here is recomputed from integer shifts on the canonical
//! form and shares no code with [`crate::fp_core`]. Speed is not a goal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact value `sign * numerator * 2^exp2`.
///
/// Canonical form: `numerator` is odd, or zero with `sign == 0` and
/// `exp2 == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicValue {
    sign: i8,
    numerator: BigUint,
    exp2: i64,
}

impl fmt::Debug for DyadicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}*2^{}", if self.sign < 0 { "-" } else { "" }, self.numerator, self.exp2)
    }
}

impl DyadicValue {
    pub fn zero() -> Self {
        DyadicValue {
            sign: 0,
            numerator: BigUint::zero(),
            exp2: 0,
        }
    }

    /// Builds and canonicalizes `sign * numerator * 2^exp2`.
    pub fn new(negative: bool, numerator: BigUint, exp2: i64) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let tz = numerator.trailing_zeros().unwrap_or(0);
        DyadicValue {
            sign: if negative { -1 } else { 1 },
            numerator: numerator >> tz,
            exp2: exp2 + tz as i64,
        }
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        DyadicValue {
            sign: 1,
            numerator: BigUint::one(),
            exp2: k,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn abs(&self) -> Self {
        DyadicValue {
            sign: self.sign.abs(),
            ..self.clone()
        }
    }

    /// Exact conversion from a finite binary64 value (subnormals included).
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("cannot convert {x} to a dyadic value")));
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp2) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Ok(Self::new(negative, BigUint::from(mantissa), exp2))
    }

    /// Exact conversion to binary64; fails if the value is not a binary64
    /// number (too many bits, or outside the exponent range).
    pub fn to_f64(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let bits = self.numerator.bits() as i64;
        if bits > 53 {
            return Err(Error::domain(format!("{self:?} needs {bits} significand bits")));
        }
        let top = self.exp2 + bits - 1;
        if top > 1023 {
            return Err(Error::domain(format!("{self:?} overflows binary64")));
        }
        let n = self.numerator.to_u64().expect("at most 53 bits");
        let raw = if top >= -1022 {
            // normal: 53-bit significand with exponent top
            let sig = n << (53 - bits);
            (((top + 1023) as u64) << 52) | (sig & ((1u64 << 52) - 1))
        } else {
            if self.exp2 < -1074 {
                return Err(Error::domain(format!("{self:?} is below the subnormal grid")));
            }
            n << (self.exp2 + 1074)
        };
        let sign = if self.sign < 0 { 1u64 << 63 } else { 0 };
        Ok(f64::from_bits(raw | sign))
    }

    /// Nearest binary64 approximation, for reporting only (ratios, errors).
    pub fn to_f64_lossy(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        let (head, shift) = if bits > 64 {
            let s = bits - 64;
            ((&self.numerator >> s).to_u64().unwrap(), s as i64)
        } else {
            (self.numerator.to_u64().unwrap(), 0)
        };
        let magnitude = scale_pow2(head as f64, self.exp2 + shift);
        if self.sign < 0 {
            -magnitude
        } else {
            magnitude
        }
    }

    fn to_bigint(&self) -> BigInt {
        let sign = match self.sign {
            -1 => Sign::Minus,
            0 => Sign::NoSign,
            _ => Sign::Plus,
        };
        BigInt::from_biguint(sign, self.numerator.clone())
    }

    fn from_bigint(v: BigInt, exp2: i64) -> Self {
        let (sign, mag) = v.into_parts();
        Self::new(sign == Sign::Minus, mag, exp2)
    }

    /// Number of significant bits, 0 for zero.
    pub fn bit_length(&self) -> u64 {
        self.numerator.bits()
    }

    /// Normalized exponent `e` with `2^e <= |x| < 2^(e+1)`.
    pub fn exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.exp2 + self.bit_length() as i64 - 1)
    }

    /// `ulp_p(x) = 2^(e - p + 1)`; `None` for zero.
    pub fn ulp(&self, p: u32) -> Option<DyadicValue> {
        self.exponent().map(|e| Self::pow2(e - p as i64 + 1))
    }

    pub fn is_representable(&self, p: u32) -> bool {
        self.bit_length() <= p as u64
    }

    /// Magnitude truncated to `width` significant bits, sign kept.
    pub fn truncate(&self, width: u32) -> DyadicValue {
        let bits = self.bit_length();
        if bits <= width as u64 {
            return self.clone();
        }
        let shift = bits - width as u64;
        Self::new(self.is_negative(), &self.numerator >> shift, self.exp2 + shift as i64)
    }

    /// Magnitude rounded away from zero at `width` bits, sign kept.
    fn away(&self, width: u32) -> DyadicValue {
        let t = self.truncate(width);
        if t == *self {
            return t;
        }
        let step = self.ulp(width).expect("nonzero");
        if self.is_negative() {
            &t - &step
        } else {
            &t + &step
        }
    }

    /// `⌊x⌋_p`.
    pub fn floor(&self, p: u32) -> DyadicValue {
        if self.is_negative() {
            self.away(p)
        } else {
            self.truncate(p)
        }
    }

    /// `⌈x⌉_p`.
    pub fn ceil(&self, p: u32) -> DyadicValue {
        if self.is_negative() {
            self.truncate(p)
        } else {
            self.away(p)
        }
    }

    /// Nearest precision-`p` value, ties to even.
    pub fn round_nearest(&self, p: u32) -> DyadicValue {
        let down = self.floor(p);
        let up = self.ceil(p);
        if down == up {
            return down;
        }
        match (self - &down).abs().cmp(&(&up - self).abs()) {
            Ordering::Less => down,
            Ordering::Greater => up,
            Ordering::Equal => {
                // the even candidate has the larger trailing-zero count
                let ulp = self.ulp(p).expect("nonzero");
                if down.is_zero() || down.exp2 > ulp.exp2 {
                    down
                } else {
                    up
                }
            }
        }
    }

    /// Up-probability of stochastic rounding to precision `p`.
    ///
    /// `random_bits = None` gives the exact `q(x) = (x - ⌊x⌋_p) / ulp_p(x)`;
    /// `Some(r)` gives `q_r(x) = (fl_{p+r}(x) - ⌊x⌋_p) / ulp_p(x)` with
    /// `fl_{p+r}` truncation toward zero. Representable inputs have `q = 0`.
    pub fn q(&self, p: u32, random_bits: Option<u32>) -> DyadicFraction {
        if self.is_representable(p) {
            return DyadicFraction::zero();
        }
        let target = match random_bits {
            None => self.clone(),
            Some(r) => self.truncate(p + r),
        };
        let gap = &target - &self.floor(p);
        let ulp_exp = self.ulp(p).expect("nonzero").exp2;
        DyadicFraction::from_dyadic(&gap, ulp_exp)
    }
}

fn scale_pow2(mut v: f64, mut k: i64) -> f64 {
    while k > 0 {
        let step = k.min(1000);
        v *= 2f64.powi(step as i32);
        k -= step;
    }
    while k < 0 {
        let step = (-k).min(1000);
        v *= 2f64.powi(-(step as i32));
        k += step;
    }
    v
}

/// A nonnegative fraction `numerator / 2^log2_denominator` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicFraction {
    pub numerator: BigUint,
    pub log2_denominator: u64,
}

impl DyadicFraction {
    pub fn zero() -> Self {
        DyadicFraction {
            numerator: BigUint::zero(),
            log2_denominator: 0,
        }
    }

    /// `value / 2^scale_exp` for a nonnegative dyadic value.
    fn from_dyadic(value: &DyadicValue, scale_exp: i64) -> Self {
        assert!(!value.is_negative());
        if value.is_zero() {
            return Self::zero();
        }
        let e = value.exp2 - scale_exp;
        if e >= 0 {
            DyadicFraction {
                numerator: &value.numerator << e as u64,
                log2_denominator: 0,
            }
        } else {
            DyadicFraction {
                numerator: value.numerator.clone(),
                log2_denominator: (-e) as u64,
            }
        }
    }

    /// Numerator over the denominator `2^bits`, if the fraction has one.
    pub fn numerator_over(&self, bits: u64) -> Option<BigUint> {
        (self.log2_denominator <= bits).then(|| &self.numerator << (bits - self.log2_denominator))
    }

    pub fn to_f64(&self) -> f64 {
        DyadicValue::new(false, self.numerator.clone(), -(self.log2_denominator as i64))
            .to_f64_lossy()
    }
}

impl fmt::Display for DyadicFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numerator.is_zero() {
            return write!(f, "0");
        }
        if self.log2_denominator == 0 {
            return write!(f, "{}", self.numerator);
        }
        write!(f, "{}/{}", self.numerator, BigUint::one() << self.log2_denominator)
    }
}

impl Add for &DyadicValue {
    type Output = DyadicValue;

    fn add(self, rhs: &DyadicValue) -> DyadicValue {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let base = self.exp2.min(rhs.exp2);
        let a = self.to_bigint() << (self.exp2 - base) as u64;
        let b = rhs.to_bigint() << (rhs.exp2 - base) as u64;
        DyadicValue::from_bigint(a + b, base)
    }
}

impl Neg for &DyadicValue {
    type Output = DyadicValue;

    fn neg(self) -> DyadicValue {
        DyadicValue {
            sign: -self.sign,
            ..self.clone()
        }
    }
}

impl Sub for &DyadicValue {
    type Output = DyadicValue;

    fn sub(self, rhs: &DyadicValue) -> DyadicValue {
        self + &(-rhs)
    }
}

impl Mul for &DyadicValue {
    type Output = DyadicValue;

    fn mul(self, rhs: &DyadicValue) -> DyadicValue {
        if self.is_zero() || rhs.is_zero() {
            return DyadicValue::zero();
        }
        DyadicValue {
            sign: self.sign * rhs.sign,
            numerator: &self.numerator * &rhs.numerator,
            exp2: self.exp2 + rhs.exp2,
        }
    }
}

impl PartialOrd for DyadicValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign.cmp(&0)
    }
}

/// Exact sum of binary64 values.
pub fn exact_sum(values: &[f64]) -> Result<DyadicValue> {
    values.iter().try_fold(DyadicValue::zero(), |acc, &v| {
        Ok(&acc + &DyadicValue::from_f64(v)?)
    })
}

/// Exact inner product of binary64 vectors of equal length.
pub fn exact_dot(a: &[f64], b: &[f64]) -> Result<DyadicValue> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    a.iter().zip(b).try_fold(DyadicValue::zero(), |acc, (&x, &y)| {
        Ok(&acc + &(&DyadicValue::from_f64(x)? * &DyadicValue::from_f64(y)?))
    })
}
