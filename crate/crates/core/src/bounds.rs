//! Closed-form error bounds for recursive summation and inner products
//! under `SR_{p,r}`.
//!
//! Every probabilistic bound has the shape
//! `κ · (stochastic term + γ_m(u_p + u_{p+r}) − γ_m(u_p))`: a `√m·u_p`
//! part coming from the zero-mean rounding errors and an `m·u_{p+r}` part
//! coming from the bias of the truncation to `p + r` bits. With
//! [`RandomBits::Ideal`] the second part is exactly zero and the bounds are
//! the classical `SR_p` ones.

use crate::dyadic::{exact_sum, DyadicValue};
use crate::error::{Error, Result};
use crate::sr_engine::RandomBits;

/// Maximum vector length accepted by [`powerset_expansion`].
pub const POWERSET_MAX_LEN: usize = 20;

/// `u_p = 2^(1-p)`.
pub fn unit_roundoff(p: u32) -> f64 {
    assert!(p >= 1, "unit_roundoff(0)");
    2f64.powi(1 - p as i32)
}

/// `u_{p+r}`, zero for [`RandomBits::Ideal`].
pub fn truncation_roundoff(p: u32, r: RandomBits) -> f64 {
    match r {
        RandomBits::Bits(r) => unit_roundoff(p + r),
        RandomBits::Ideal => 0.0,
    }
}

/// `γ_n(u) = (1+u)^n − 1`, evaluated as `expm1(n·log1p(u))`.
pub fn gamma(n: u64, u: f64) -> f64 {
    if n == 0 || u == 0.0 {
        return 0.0;
    }
    (n as f64 * u.ln_1p()).exp_m1()
}

/// `γ_m(u + v) − γ_m(u)` without cancellation:
/// `(1+u+v)^m − (1+u)^m = (1+u)^m · γ_m(v / (1+u))`.
fn gamma_gap(m: u64, u: f64, v: f64) -> f64 {
    if m == 0 || v == 0.0 {
        return 0.0;
    }
    (m as f64 * u.ln_1p()).exp() * gamma(m, v / (1.0 + u))
}

/// `κ` times a bound term, with `κ = ∞` propagating.
fn scaled(kappa: f64, term: f64) -> f64 {
    if kappa.is_infinite() {
        f64::INFINITY
    } else {
        kappa * term
    }
}

/// Parameters shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    /// Number of summands, or inner-product length.
    pub n: u64,
    pub p: u32,
    pub r: RandomBits,
    /// Failure probability, `0 < λ < 1`.
    pub lambda: f64,
    /// Condition number `κ >= 1`, possibly `+∞`.
    pub kappa: f64,
}

impl BoundQuery {
    pub fn new(n: u64, p: u32, r: RandomBits, lambda: f64, kappa: f64) -> Result<Self> {
        let q = BoundQuery {
            n,
            p,
            r,
            lambda,
            kappa,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.p < 1 {
            return Err(Error::invalid("p must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid(format!("lambda = {} outside (0, 1)", self.lambda)));
        }
        if self.kappa.is_nan() || self.kappa < 1.0 {
            return Err(Error::invalid(format!("kappa = {} below 1", self.kappa)));
        }
        Ok(())
    }

    fn u_p(&self) -> f64 {
        unit_roundoff(self.p)
    }

    fn u_pr(&self) -> f64 {
        truncation_roundoff(self.p, self.r)
    }

    fn ah(&self, m: u64) -> Result<f64> {
        self.validate()?;
        let up = self.u_p();
        let stochastic = (up * gamma(2 * m, up)).sqrt() * (2.0 / self.lambda).ln().sqrt();
        Ok(scaled(self.kappa, stochastic + gamma_gap(m, up, self.u_pr())))
    }

    fn bc(&self, m: u64) -> Result<f64> {
        self.validate()?;
        let up = self.u_p();
        let stochastic = (gamma(m, up * up) / self.lambda).sqrt();
        Ok(scaled(self.kappa, stochastic + gamma_gap(m, up, self.u_pr())))
    }
}

/// Bias of recursive summation: `|E(ŷ) − y| / |y| <= κ·γ_{n−1}(u_{p+r})`.
pub fn bias_bound_sum(q: &BoundQuery) -> f64 {
    scaled(q.kappa, gamma(q.n.saturating_sub(1), q.u_pr()))
}

/// Azuma–Hoeffding bound for recursive summation, holding with probability
/// at least `1 − λ`.
pub fn ah_bound_sum(q: &BoundQuery) -> Result<f64> {
    q.ah(q.n.saturating_sub(1))
}

/// Bienaymé–Chebyshev bound for recursive summation, holding with
/// probability at least `1 − λ`.
pub fn bc_bound_sum(q: &BoundQuery) -> Result<f64> {
    q.bc(q.n.saturating_sub(1))
}

/// Worst-case bound for recursive summation: `κ·γ_{n−1}(u_p)`.
pub fn det_bound_sum(n: u64, p: u32, kappa: f64) -> f64 {
    scaled(kappa, gamma(n.saturating_sub(1), unit_roundoff(p)))
}

/// Bias of the inner product: `κ(a∘b)·γ_n(u_{p+r})`.
pub fn bias_bound_inner(q: &BoundQuery) -> f64 {
    scaled(q.kappa, gamma(q.n, q.u_pr()))
}

/// Azuma–Hoeffding bound for the inner product.
pub fn ah_bound_inner(q: &BoundQuery) -> Result<f64> {
    q.ah(q.n)
}

/// Bienaymé–Chebyshev bound for the inner product.
pub fn bc_bound_inner(q: &BoundQuery) -> Result<f64> {
    q.bc(q.n)
}

/// Worst-case bound for the inner product: `κ·γ_n(u_p)`.
pub fn det_bound_inner(n: u64, p: u32, kappa: f64) -> f64 {
    scaled(kappa, gamma(n, unit_roundoff(p)))
}

/// Leading-order form `√(2m)·√(ln(2/λ))·u_p + m·u_{p+r}` of the
/// Azuma–Hoeffding bound over `m` roundings (κ = 1).
pub fn first_order_ah(m: u64, p: u32, r: RandomBits, lambda: f64) -> f64 {
    let m = m as f64;
    (2.0 * m).sqrt() * (2.0 / lambda).ln().sqrt() * unit_roundoff(p) + m * truncation_roundoff(p, r)
}

/// Smallest `r` with `r >= ⌈log₂(n) / 2⌉`, i.e. the smallest `r` with
/// `4^r >= n`. Integer arithmetic only.
pub fn rule_of_thumb_r(n: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::invalid(format!("rule of thumb needs n >= 2, got {n}")));
    }
    let ceil_log2 = 64 - (n - 1).leading_zeros();
    Ok(ceil_log2.div_ceil(2))
}

/// Envelope `γ_m(u_p + u_{p+r}) − γ_m(u_p)` of the bias-carrying remainder
/// over `m` consecutive roundings.
pub fn b_envelope(m: u64, p: u32, r: RandomBits) -> f64 {
    gamma_gap(m, unit_roundoff(p), truncation_roundoff(p, r))
}

fn subset_sum(xs: &[f64], ys: &[f64], skip_full: bool) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() > POWERSET_MAX_LEN {
        return Err(Error::invalid(format!(
            "power-set expansion limited to {POWERSET_MAX_LEN} terms, got {}",
            xs.len()
        )));
    }
    let full = (1u32 << xs.len()) - 1;
    let mut total = 0.0;
    for mask in 0..=full {
        if skip_full && mask == full {
            continue;
        }
        let term: f64 = xs
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (x, y))| if mask >> i & 1 == 1 { *x } else { *y })
            .product();
        total += term;
    }
    Ok(total)
}

/// `Σ_{K ⊆ {1..n}} Π_{i∈K} x_i · Π_{j∉K} y_j`, which equals `Π (x_k + y_k)`.
/// The empty product is 1.
pub fn powerset_expansion(xs: &[f64], ys: &[f64]) -> Result<f64> {
    subset_sum(xs, ys, false)
}

/// Same sum with the `K = {1..n}` term (`Π x_k`) left out. With
/// `x_k = 1 + α_k` and `y_k = β_k` this is the remainder that separates
/// `Π(1 + δ_k)` from the martingale part `Π(1 + α_k)`.
pub fn powerset_expansion_proper(xs: &[f64], ys: &[f64]) -> Result<f64> {
    subset_sum(xs, ys, true)
}

/// `κ(a) = Σ|a_i| / |Σ a_i|`, sums taken exactly; `+∞` when the exact sum
/// vanishes.
pub fn cond_sum(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::invalid("condition number of an empty vector"));
    }
    let abs: Vec<f64> = a.iter().map(|v| v.abs()).collect();
    let num = exact_sum(&abs)?;
    if num.is_zero() {
        return Err(Error::invalid("condition number of an all-zero vector is undefined"));
    }
    let den = exact_sum(a)?;
    Ok(ratio(&num, &den))
}

fn ratio(num: &DyadicValue, den: &DyadicValue) -> f64 {
    if den.is_zero() {
        return f64::INFINITY;
    }
    if num == &den.abs() {
        return 1.0;
    }
    num.to_f64_lossy() / den.abs().to_f64_lossy()
}

/// `κ(a∘b)`, the condition number of the inner product.
pub fn cond_inner(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("condition number of an empty vector"));
    }
    let mut num = DyadicValue::zero();
    let mut den = DyadicValue::zero();
    for (&x, &y) in a.iter().zip(b) {
        let prod = &DyadicValue::from_f64(x)? * &DyadicValue::from_f64(y)?;
        num = &num + &prod.abs();
        den = &den + &prod;
    }
    if num.is_zero() {
        return Err(Error::invalid("condition number of an all-zero product"));
    }
    Ok(ratio(&num, &den))
}
