//! Bit-exact rounding primitives for precision-`p` binary floating point
//! carried in IEEE-754 binary64.
//!
//! Every value handled here is an ordinary `f64`. A precision-`p` number is an
//! `f64` whose significand has at most `p` significant bits; the exponent
//! range is the substrate's normal range (no subnormals at precision `p`).
//! Results that would fall outside that range are reported as
//! [`Error::Range`] instead of being flushed or saturated.
//!
//! All functions are pure and operate directly on the bit pattern, so they
//! are exact: no operation here is subject to substrate rounding.

use crate::error::{Error, Result};

/// Significand width of the binary64 substrate, leading bit included.
pub const SUBSTRATE_WIDTH: u32 = 53;

const FRAC_BITS: u32 = SUBSTRATE_WIDTH - 1;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;
const HIDDEN_BIT: u64 = 1 << FRAC_BITS;
const EXP_BIAS: i32 = 1023;
const EMIN: i32 = -1022;
const EMAX: i32 = 1023;

/// A binary floating-point format of precision `p` emulated in binary64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpFormat {
    p: u32,
}

impl FpFormat {
    /// IEEE-754 binary16 significand width.
    pub const BINARY16: FpFormat = FpFormat { p: 11 };
    /// bfloat16 significand width.
    pub const BFLOAT16: FpFormat = FpFormat { p: 8 };
    /// IEEE-754 binary32 significand width.
    pub const BINARY32: FpFormat = FpFormat { p: 24 };
    /// The substrate itself; rounding to it is the identity.
    pub const BINARY64: FpFormat = FpFormat { p: SUBSTRATE_WIDTH };

    /// Creates a format with `p` significand bits, `2 <= p <= 53`.
    pub fn new(p: u32) -> Result<Self> {
        if !(2..=SUBSTRATE_WIDTH).contains(&p) {
            return Err(Error::invalid(format!(
                "precision p = {p} outside [2, {SUBSTRATE_WIDTH}]"
            )));
        }
        Ok(FpFormat { p })
    }

    pub fn precision(self) -> u32 {
        self.p
    }

    pub fn substrate_width(self) -> u32 {
        SUBSTRATE_WIDTH
    }

    /// `u_p = 2^(1-p)`.
    pub fn unit_roundoff(self) -> f64 {
        pow2(1 - self.p as i32)
    }
}

/// Scientific-notation view of a nonzero finite value:
/// `value = (-1)^sign * 2^exponent * significand`, `1 <= significand < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub sign: u8,
    pub exponent: i32,
    pub significand: f64,
}

impl Decomposition {
    /// Rebuilds the value. Exact for every decomposition produced by
    /// [`decompose`] whose value is a normal binary64 number.
    pub fn value(&self) -> f64 {
        let s = if self.sign == 1 { -1.0 } else { 1.0 };
        s * self.significand * pow2(self.exponent)
    }
}

/// `|x| = sig * 2^exp` with bit 52 of `sig` set, for any nonzero finite x
/// (subnormals are normalized).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Parts {
    pub neg: bool,
    pub sig: u64,
    pub exp: i32,
}

impl Parts {
    /// Normalized exponent `e` with `2^e <= |x| < 2^(e+1)`.
    pub fn exponent(&self) -> i32 {
        self.exp + FRAC_BITS as i32
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_nan() {
        Err(Error::domain("NaN input"))
    } else if x.is_infinite() {
        Err(Error::domain("infinite input"))
    } else {
        Ok(())
    }
}

/// Splits a finite value. Returns `None` for zero.
pub(crate) fn split(x: f64) -> Result<Option<Parts>> {
    check_finite(x)?;
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let biased = ((bits >> FRAC_BITS) & 0x7ff) as i32;
    let frac = bits & FRAC_MASK;
    if biased == 0 {
        if frac == 0 {
            return Ok(None);
        }
        let shift = frac.leading_zeros() - (64 - SUBSTRATE_WIDTH);
        return Ok(Some(Parts {
            neg,
            sig: frac << shift,
            exp: EMIN - FRAC_BITS as i32 - shift as i32,
        }));
    }
    Ok(Some(Parts {
        neg,
        sig: frac | HIDDEN_BIT,
        exp: biased - EXP_BIAS - FRAC_BITS as i32,
    }))
}

/// Builds `±sig * 2^exp` as a normal binary64 value. `sig` must be nonzero
/// and the value must fit in 53 bits exactly.
pub(crate) fn compose(neg: bool, mut sig: u64, mut exp: i32) -> Result<f64> {
    debug_assert!(sig != 0);
    let width = 64 - sig.leading_zeros();
    if width > SUBSTRATE_WIDTH {
        let shift = width - SUBSTRATE_WIDTH;
        debug_assert_eq!(sig & ((1 << shift) - 1), 0, "inexact compose");
        sig >>= shift;
        exp += shift as i32;
    } else {
        let shift = SUBSTRATE_WIDTH - width;
        sig <<= shift;
        exp -= shift as i32;
    }
    let e = exp + FRAC_BITS as i32;
    if e > EMAX {
        return Err(Error::range(format!("overflow: 2^{e} exceeds binary64")));
    }
    if e < EMIN {
        return Err(Error::range(format!(
            "underflow: 2^{e} is below the normal binary64 range"
        )));
    }
    let bits = ((neg as u64) << 63) | (((e + EXP_BIAS) as u64) << FRAC_BITS) | (sig & FRAC_MASK);
    Ok(f64::from_bits(bits))
}

/// Exact `2^k` for `k` in the normal range.
pub(crate) fn pow2(k: i32) -> f64 {
    compose(false, 1, k).expect("power of two outside the binary64 normal range")
}

/// Scientific-notation decomposition of a nonzero finite `x`.
pub fn decompose(x: f64) -> Result<Decomposition> {
    let parts = split(x)?.ok_or_else(|| Error::domain("decompose(0)"))?;
    Ok(Decomposition {
        sign: parts.neg as u8,
        exponent: parts.exponent(),
        significand: parts.sig as f64 / HIDDEN_BIT as f64,
    })
}

/// `ulp_p(x) = 2^(e-p+1)`, the spacing of the precision-`p` grid in the
/// binade of `x`.
pub fn ulp(x: f64, fmt: FpFormat) -> Result<f64> {
    let parts = split(x)?.ok_or_else(|| Error::domain("ulp(0) is undefined"))?;
    compose(false, 1, parts.exponent() - fmt.p as i32 + 1)
}

/// Significand truncated to its leading `keep` bits, plus whether bits were dropped.
fn chop(sig: u64, keep: u32) -> (u64, bool) {
    let drop = SUBSTRATE_WIDTH - keep;
    let head = (sig >> drop) << drop;
    (head, head != sig)
}

/// Magnitude rounded away from zero at precision `keep`.
fn away(parts: &Parts, keep: u32) -> Result<f64> {
    let (head, inexact) = chop(parts.sig, keep);
    let head = if inexact {
        head + (1 << (SUBSTRATE_WIDTH - keep))
    } else {
        head
    };
    compose(parts.neg, head, parts.exp)
}

fn toward_zero(parts: &Parts, keep: u32) -> Result<f64> {
    let (head, _) = chop(parts.sig, keep);
    compose(parts.neg, head, parts.exp)
}

/// `⌊x⌋_p`: the largest precision-`p` number not above `x`.
pub fn round_down(x: f64, fmt: FpFormat) -> Result<f64> {
    match split(x)? {
        None => Ok(x),
        Some(parts) if parts.neg => away(&parts, fmt.p),
        Some(parts) => toward_zero(&parts, fmt.p),
    }
}

/// `⌈x⌉_p`: the smallest precision-`p` number not below `x`.
pub fn round_up(x: f64, fmt: FpFormat) -> Result<f64> {
    match split(x)? {
        None => Ok(x),
        Some(parts) if parts.neg => toward_zero(&parts, fmt.p),
        Some(parts) => away(&parts, fmt.p),
    }
}

/// Drops every significand bit past position `width` (round toward zero).
/// With `width = p + r` this is `fl_{p+r}`.
pub fn truncate(x: f64, width: u32) -> Result<f64> {
    if !(1..=SUBSTRATE_WIDTH).contains(&width) {
        return Err(Error::invalid(format!(
            "truncation width {width} outside [1, {SUBSTRATE_WIDTH}]"
        )));
    }
    match split(x)? {
        None => Ok(x),
        Some(parts) => toward_zero(&parts, width),
    }
}

/// Round to nearest precision-`p` value, ties to even.
pub fn round_nearest(x: f64, fmt: FpFormat) -> Result<f64> {
    let Some(parts) = split(x)? else {
        return Ok(x);
    };
    let drop = SUBSTRATE_WIDTH - fmt.p;
    if drop == 0 {
        return Ok(x);
    }
    let rem = parts.sig & ((1 << drop) - 1);
    let half = 1 << (drop - 1);
    let head = parts.sig - rem;
    let odd = (head >> drop) & 1 == 1;
    let head = if rem > half || (rem == half && odd) {
        head + (1 << drop)
    } else {
        head
    };
    compose(parts.neg, head, parts.exp)
}

/// True iff `x` lies on the precision-`p` grid. Zero is representable.
pub fn is_representable(x: f64, fmt: FpFormat) -> bool {
    match split(x) {
        Ok(None) => true,
        Ok(Some(parts)) => !chop(parts.sig, fmt.p).1,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmt(p: u32) -> FpFormat {
        FpFormat::new(p).unwrap()
    }

    #[test]
    fn format_bounds() {
        assert!(FpFormat::new(1).is_err());
        assert!(FpFormat::new(54).is_err());
        assert_eq!(fmt(11).unit_roundoff(), 2f64.powi(-10));
        assert_eq!(FpFormat::BINARY64.unit_roundoff(), f64::EPSILON);
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(1.25).unwrap();
        assert_eq!((d.sign, d.exponent, d.significand), (0, 0, 1.25));
        let d = decompose(-3.0).unwrap();
        assert_eq!((d.sign, d.exponent, d.significand), (1, 1, 1.5));
        let d = decompose(0.5).unwrap();
        assert_eq!((d.sign, d.exponent, d.significand), (0, -1, 1.0));
        assert_eq!(d.value(), 0.5);
    }

    #[test]
    fn decompose_rejects_zero_and_non_finite() {
        assert!(matches!(decompose(0.0), Err(Error::Domain(_))));
        assert!(matches!(decompose(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(decompose(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn decompose_subnormal() {
        let x = f64::from_bits(3); // 3 * 2^-1074
        let d = decompose(x).unwrap();
        assert_eq!(d.exponent, -1073);
        assert_eq!(d.significand, 1.5);
    }

    #[test]
    fn ulp_examples() {
        assert_eq!(ulp(1.0, fmt(11)).unwrap(), 2f64.powi(-10));
        assert_eq!(ulp(1.25, fmt(2)).unwrap(), 0.5);
        assert_eq!(ulp(-7.0, fmt(4)).unwrap(), 0.5);
        assert!(matches!(ulp(0.0, fmt(4)), Err(Error::Domain(_))));
    }

    #[test]
    fn directed_examples() {
        let f = fmt(2);
        assert_eq!(round_down(1.25, f).unwrap(), 1.0);
        assert_eq!(round_up(1.25, f).unwrap(), 1.5);
        assert_eq!(round_down(1.5, f).unwrap(), 1.5);
        assert_eq!(round_up(1.5, f).unwrap(), 1.5);
        assert_eq!(round_down(-1.25, f).unwrap(), -1.5);
        assert_eq!(round_up(-1.25, f).unwrap(), -1.0);
        assert_eq!(round_up(1.75, f).unwrap(), 2.0);
        assert_eq!(round_down(0.0, f).unwrap(), 0.0);
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(1.3125, 3).unwrap(), 1.25);
        assert_eq!(truncate(1.3125, 5).unwrap(), 1.3125);
        assert_eq!(truncate(-1.3125, 3).unwrap(), -1.25);
        assert!(truncate(1.0, 0).is_err());
        assert!(truncate(1.0, 54).is_err());
        assert!(matches!(truncate(f64::NAN, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn nearest_examples() {
        let f = fmt(2);
        assert_eq!(round_nearest(1.375, f).unwrap(), 1.5);
        assert_eq!(round_nearest(1.25, f).unwrap(), 1.0);
        assert_eq!(round_nearest(2.25, f).unwrap(), 2.0);
        assert_eq!(round_nearest(1.75, f).unwrap(), 2.0);
        assert_eq!(round_nearest(2049.0, fmt(11)).unwrap(), 2048.0);
        assert_eq!(round_nearest(2051.0, fmt(11)).unwrap(), 2052.0);
    }

    #[test]
    fn representable_examples() {
        assert!(is_representable(1.5, fmt(2)));
        assert!(!is_representable(1.25, fmt(2)));
        assert!(is_representable(0.0, fmt(2)));
        assert!(is_representable(-0.0, fmt(53)));
    }

    #[test]
    fn range_errors() {
        assert!(round_up(f64::MAX, fmt(11)).unwrap_err().is_range());
        let tiny = f64::MIN_POSITIVE * 1.5;
        // ulp at p = 11 near the bottom of the normal range is subnormal.
        assert!(ulp(tiny, fmt(11)).unwrap_err().is_range());
        assert!(round_down(f64::from_bits(7), fmt(2)).unwrap_err().is_range());
    }
}
