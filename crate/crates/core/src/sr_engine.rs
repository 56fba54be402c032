//! Limited-precision stochastic rounding `SR_{p,r}` and its round-to-nearest
//! counterpart.
//!
//! The rounding mechanism is the one used by hardware: the magnitude of `x`
//! is truncated to `p + r` bits, an `r`-bit random integer `Z` is added
//! below the last kept bit, and the sum is truncated to `p` bits. The
//! magnitude rounds up exactly when the addition carries into bit `p`,
//! which happens for `2^r - Z <= k` where `k` is the `r`-bit tail of the
//! truncated value, i.e. with probability `k / 2^r`.
//!
//! Working on the magnitude means `fl_{p+r}` truncates toward zero for
//! negative inputs too, so `SR_{p,r}(-x)` is distributed as `-SR_{p,r}(x)`.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::fp_core::{self, compose, split, FpFormat, SUBSTRATE_WIDTH};

/// Source of uniformly distributed random bits.
pub trait BitSource {
    /// Returns `k` uniform bits in the low bits of the result, `1 <= k <= 64`.
    fn next_bits(&mut self, k: u32) -> u64;
}

/// Reproducible, splittable stream of random bits.
///
/// Backed by the ChaCha8 block function: the key is derived from `seed` and
/// `stream_id` selects one of 2^64 independent streams, so distinct
/// `(seed, stream_id)` pairs never share output and equal pairs replay the
/// same bits.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

/// Creates the stream identified by `(seed, stream_id)`.
pub fn make_stream(seed: u64, stream_id: u64) -> RngStream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(stream_id);
    RngStream {
        seed,
        stream_id,
        inner,
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform double in `[0, 1)` on the 2^-53 grid.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl BitSource for RngStream {
    fn next_bits(&mut self, k: u32) -> u64 {
        assert!((1..=64).contains(&k), "next_bits({k})");
        self.next_u64() >> (64 - k)
    }
}

impl<B: BitSource + ?Sized> BitSource for &mut B {
    fn next_bits(&mut self, k: u32) -> u64 {
        (**self).next_bits(k)
    }
}

/// Number of random bits used by `SR_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RandomBits {
    Bits(u32),
    /// `r = 53 - p`: `fl_{p+r}` is the identity on substrate values and the
    /// operator is exact `SR_p`.
    Ideal,
}

impl fmt::Display for RandomBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomBits::Bits(r) => write!(f, "{r}"),
            RandomBits::Ideal => write!(f, "ideal"),
        }
    }
}

impl std::str::FromStr for RandomBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("ideal") || s.eq_ignore_ascii_case("inf") {
            return Ok(RandomBits::Ideal);
        }
        s.parse::<u32>()
            .map(RandomBits::Bits)
            .map_err(|_| Error::invalid(format!("random bit count {s:?} is not an integer or 'ideal'")))
    }
}

/// Rounding applied after each elementary operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Nearest,
    Stochastic(RandomBits),
}

/// One rounding operator instance: target format plus mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SrConfig {
    fmt: FpFormat,
    mode: Mode,
}

impl SrConfig {
    /// Validates `r` against the substrate: `1 <= r <= 53 - p`.
    pub fn new(fmt: FpFormat, mode: Mode) -> Result<Self> {
        if let Mode::Stochastic(RandomBits::Bits(r)) = mode {
            let max = SUBSTRATE_WIDTH - fmt.precision();
            if r == 0 || r > max {
                return Err(Error::invalid(format!(
                    "r = {r} outside [1, {max}] for p = {}",
                    fmt.precision()
                )));
            }
        }
        Ok(SrConfig { fmt, mode })
    }

    pub fn stochastic(fmt: FpFormat, r: RandomBits) -> Result<Self> {
        Self::new(fmt, Mode::Stochastic(r))
    }

    pub fn nearest(fmt: FpFormat) -> Self {
        SrConfig {
            fmt,
            mode: Mode::Nearest,
        }
    }

    pub fn format(&self) -> FpFormat {
        self.fmt
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Resolved number of random bits, `None` for round-to-nearest.
    pub fn random_bits(&self) -> Option<u32> {
        match self.mode {
            Mode::Nearest => None,
            Mode::Stochastic(RandomBits::Bits(r)) => Some(r),
            Mode::Stochastic(RandomBits::Ideal) => Some(SUBSTRATE_WIDTH - self.fmt.precision()),
        }
    }

    /// Short label used in tables: `rn`, `sr_r7`, `sr_ideal`.
    pub fn label(&self) -> String {
        match self.mode {
            Mode::Nearest => "rn".to_string(),
            Mode::Stochastic(RandomBits::Bits(r)) => format!("sr_r{r}"),
            Mode::Stochastic(RandomBits::Ideal) => "sr_ideal".to_string(),
        }
    }
}

/// One traced rounding: `rounded = exact_input * (1 + delta)` and
/// `fl_{p+r}(exact_input) = exact_input * (1 + beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingRecord {
    pub exact_input: f64,
    pub rounded: f64,
    pub delta: f64,
    pub beta: f64,
}

impl RoundingRecord {
    fn new(exact_input: f64, rounded: f64, truncated: f64) -> Self {
        let rel = |v: f64| {
            if exact_input == 0.0 {
                0.0
            } else {
                (v - exact_input) / exact_input
            }
        };
        RoundingRecord {
            exact_input,
            rounded,
            delta: rel(rounded),
            beta: rel(truncated),
        }
    }
}

/// Precomputed pieces of one `SR_{p,r}` rounding of a nonzero value.
struct Split {
    neg: bool,
    exp: i32,
    /// Magnitude truncated to `p` bits (substrate significand units).
    head: u64,
    /// Grid spacing at precision `p` in the same units.
    step: u64,
    /// The `r`-bit tail of `fl_{p+r}(|x|)`: `k` in `k / 2^r`.
    tail: u64,
    inexact: bool,
}

fn split_for(x: f64, p: u32, r: u32) -> Result<Option<Split>> {
    let Some(parts) = split(x)? else {
        return Ok(None);
    };
    let drop = SUBSTRATE_WIDTH - p;
    let step = 1u64 << drop;
    let low = parts.sig & (step - 1);
    Ok(Some(Split {
        neg: parts.neg,
        exp: parts.exp,
        head: parts.sig - low,
        step,
        tail: low >> (drop - r),
        inexact: low != 0,
    }))
}

fn resolve_r(cfg: &SrConfig) -> Result<u32> {
    cfg.random_bits()
        .ok_or_else(|| Error::invalid("operation requires a stochastic rounding mode"))
}

/// `k` such that `q_r(x) = k / 2^r` exactly, where `q_r` is the probability
/// of returning `⌈x⌉_p`.
pub fn q_r_numerator(x: f64, cfg: &SrConfig) -> Result<u64> {
    let r = resolve_r(cfg)?;
    let Some(s) = split_for(x, cfg.fmt.precision(), r)? else {
        return Ok(0);
    };
    if !s.inexact {
        return Ok(0);
    }
    // The magnitude goes up with probability tail / 2^r; for negative x that
    // is the move toward ⌊x⌋.
    Ok(if s.neg { (1u64 << r) - s.tail } else { s.tail })
}

fn sr_round_impl<B: BitSource + ?Sized>(x: f64, p: u32, r: u32, bits: &mut B) -> Result<f64> {
    let Some(s) = split_for(x, p, r)? else {
        return Ok(x);
    };
    if !s.inexact {
        return Ok(x);
    }
    if r == 0 {
        return compose(s.neg, s.head, s.exp);
    }
    let z = bits.next_bits(r);
    let carry = s.tail + z >= 1u64 << r;
    let head = if carry { s.head + s.step } else { s.head };
    compose(s.neg, head, s.exp)
}

/// `SR_{p,r}(x)` with random bits from `bits`.
pub fn sr_round_with<B: BitSource + ?Sized>(x: f64, cfg: &SrConfig, bits: &mut B) -> Result<f64> {
    let r = resolve_r(cfg)?;
    sr_round_impl(x, cfg.fmt.precision(), r, bits)
}

/// `SR_{p,r}(x)`: `⌈x⌉_p` with probability `q_r(x)`, `⌊x⌋_p` otherwise.
pub fn sr_round(x: f64, cfg: &SrConfig, rng: &mut RngStream) -> Result<f64> {
    sr_round_with(x, cfg, rng)
}

/// Rounds `x` with whatever mode `cfg` selects.
pub fn round<B: BitSource + ?Sized>(x: f64, cfg: &SrConfig, bits: &mut B) -> Result<f64> {
    match cfg.mode {
        Mode::Nearest => fp_core::round_nearest(x, cfg.fmt),
        Mode::Stochastic(_) => sr_round_with(x, cfg, bits),
    }
}

/// [`round`] plus the `(delta, beta)` record. For round-to-nearest `beta`
/// is reported as 0.
pub fn round_traced<B: BitSource + ?Sized>(
    x: f64,
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<(f64, RoundingRecord)> {
    let rounded = round(x, cfg, bits)?;
    let truncated = match cfg.random_bits() {
        Some(r) => fp_core::truncate(x, cfg.fmt.precision() + r)?,
        None => x,
    };
    Ok((rounded, RoundingRecord::new(x, rounded, truncated)))
}

/// Elementary operations that can be rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

/// Substrate result of `a op b`. Add, sub and mul of precision-`p`
/// operands are exact whenever the true result fits in 53 bits (always for
/// mul with `2p <= 53`); div and sqrt are correctly rounded binary64 values
/// standing in for the real result.
pub fn substrate_op(op: Op, a: f64, b: f64) -> Result<f64> {
    let v = match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => {
            if b == 0.0 {
                return Err(Error::domain("division by zero"));
            }
            a / b
        }
        Op::Sqrt => {
            if a < 0.0 {
                return Err(Error::domain("square root of a negative number"));
            }
            a.sqrt()
        }
    };
    if v.is_nan() {
        return Err(Error::domain(format!("{op:?}({a}, {b}) is undefined")));
    }
    if v.is_infinite() {
        return Err(Error::range(format!("{op:?}({a}, {b}) overflows")));
    }
    Ok(v)
}

/// Stochastically rounded `a op b` (`b` is ignored for `Sqrt`).
pub fn sr_op(op: Op, a: f64, b: f64, cfg: &SrConfig, rng: &mut RngStream) -> Result<f64> {
    let exact = substrate_op(op, a, b)?;
    sr_round_with(exact, cfg, rng)
}

/// [`sr_op`] with its rounding record.
pub fn sr_op_traced(
    op: Op,
    a: f64,
    b: f64,
    cfg: &SrConfig,
    rng: &mut RngStream,
) -> Result<(f64, RoundingRecord)> {
    resolve_r(cfg)?;
    let exact = substrate_op(op, a, b)?;
    round_traced(exact, cfg, rng)
}

/// `a op b` rounded to nearest at precision `p` (ties to even).
pub fn rn_op(op: Op, a: f64, b: f64, fmt: FpFormat) -> Result<f64> {
    fp_core::round_nearest(substrate_op(op, a, b)?, fmt)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Replays a fixed value for every draw.
    struct Fixed(u64);

    impl BitSource for Fixed {
        fn next_bits(&mut self, _k: u32) -> u64 {
            self.0
        }
    }

    fn cfg(p: u32, r: u32) -> SrConfig {
        SrConfig::stochastic(FpFormat::new(p).unwrap(), RandomBits::Bits(r)).unwrap()
    }

    fn outcomes(x: f64, c: &SrConfig) -> Vec<f64> {
        let r = c.random_bits().unwrap();
        (0..1u64 << r).map(|z| sr_round_with(x, c, &mut Fixed(z)).unwrap()).collect()
    }

    #[test]
    fn config_validation() {
        let f = FpFormat::new(11).unwrap();
        assert!(SrConfig::stochastic(f, RandomBits::Bits(0)).is_err());
        assert!(SrConfig::stochastic(f, RandomBits::Bits(43)).is_err());
        assert!(SrConfig::stochastic(f, RandomBits::Bits(42)).is_ok());
        let ideal = SrConfig::stochastic(f, RandomBits::Ideal).unwrap();
        assert_eq!(ideal.random_bits(), Some(42));
        assert_eq!(ideal.label(), "sr_ideal");
        assert_eq!(cfg(11, 7).label(), "sr_r7");
        assert_eq!(SrConfig::nearest(f).label(), "rn");
        assert_eq!("ideal".parse::<RandomBits>().unwrap(), RandomBits::Ideal);
        assert!("x".parse::<RandomBits>().is_err());
    }

    #[test]
    fn q_r_numerator_examples() {
        assert_eq!(q_r_numerator(1.3125, &cfg(2, 1)).unwrap(), 1);
        assert_eq!(q_r_numerator(1.3125, &cfg(2, 3)).unwrap(), 5);
        assert_eq!(q_r_numerator(1.5, &cfg(2, 4)).unwrap(), 0);
        assert_eq!(q_r_numerator(-1.3125, &cfg(2, 3)).unwrap(), 3);
        assert_eq!(q_r_numerator(0.0, &cfg(2, 3)).unwrap(), 0);
        assert!(q_r_numerator(1.0, &SrConfig::nearest(FpFormat::BINARY16)).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert!(outcomes(1.5, &cfg(2, 3)).iter().all(|&v| v == 1.5));
        let one_bit = outcomes(1.3125, &cfg(2, 1));
        assert_eq!(one_bit.iter().filter(|&&v| v == 1.5).count(), 1);
        assert_eq!(one_bit.iter().filter(|&&v| v == 1.0).count(), 1);
        let three_bits = outcomes(1.3125, &cfg(2, 3));
        assert_eq!(three_bits.iter().filter(|&&v| v == 1.5).count(), 5);
        assert_eq!(three_bits.iter().filter(|&&v| v == 1.0).count(), 3);
    }

    #[test]
    fn negative_inputs_mirror() {
        let pos = outcomes(1.3125, &cfg(2, 3));
        let neg = outcomes(-1.3125, &cfg(2, 3));
        let mut pos: Vec<f64> = pos.iter().map(|v| -v).collect();
        let mut neg = neg;
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        assert_eq!(pos, neg);
    }

    #[test]
    fn op_examples() {
        let c = SrConfig::stochastic(FpFormat::BINARY16, RandomBits::Ideal).unwrap();
        let exact = substrate_op(Op::Add, 1.0, 2f64.powi(-12)).unwrap();
        assert_eq!(q_r_numerator(exact, &c).unwrap(), 1 << 40); // 1/4 of 2^42
        let ups = outcomes(exact, &cfg(11, 2));
        assert_eq!(ups.iter().filter(|&&v| v == 1.0 + 2f64.powi(-10)).count(), 1);

        let prod = substrate_op(Op::Mul, 1.5, 1.5).unwrap();
        assert_eq!(q_r_numerator(prod, &cfg(2, 2)).unwrap(), 1);

        let mut rng = make_stream(3, 0);
        for _ in 0..16 {
            assert_eq!(sr_op(Op::Add, 1.0, 1.0, &cfg(2, 5), &mut rng).unwrap(), 2.0);
        }
    }

    #[test]
    fn op_errors() {
        let mut rng = make_stream(0, 0);
        let c = cfg(11, 4);
        assert!(matches!(sr_op(Op::Div, 1.0, 0.0, &c, &mut rng), Err(Error::Domain(_))));
        assert!(matches!(sr_op(Op::Sqrt, -1.0, 0.0, &c, &mut rng), Err(Error::Domain(_))));
        assert!(sr_op(Op::Mul, 1e300, 1e300, &c, &mut rng).unwrap_err().is_range());
        assert_eq!(sr_op(Op::Sqrt, 4.0, 0.0, &c, &mut rng).unwrap(), 2.0);
    }

    #[test]
    fn rn_op_examples() {
        let f = FpFormat::BINARY16;
        assert_eq!(rn_op(Op::Add, 2048.0, 1.0, f).unwrap(), 2048.0);
        let p2 = FpFormat::new(2).unwrap();
        assert_eq!(rn_op(Op::Add, 1.0, 1.0, p2).unwrap(), 2.0);
        assert_eq!(rn_op(Op::Mul, 1.5, 1.5, p2).unwrap(), 2.0);
    }

    #[test]
    fn traced_records_stay_in_envelope() {
        let c = cfg(8, 3);
        let mut rng = make_stream(11, 2);
        for i in 1..200 {
            let a = 1.0 + i as f64 / 256.0;
            let (v, rec) = sr_op_traced(Op::Mul, a, 1.0 + 1.0 / 7.0, &c, &mut rng).unwrap();
            assert_eq!(v, rec.rounded);
            assert!(rec.delta.abs() <= 2f64.powi(-7));
            assert!(rec.beta.abs() <= 2f64.powi(-10));
        }
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let a: Vec<u64> = {
            let mut s = make_stream(5, 0);
            (0..8).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = make_stream(5, 0);
            (0..8).map(|_| s.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut s = make_stream(5, 1);
            (0..8).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
