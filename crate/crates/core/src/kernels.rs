//! Reference algorithms with fixed rounding schedules.
//!
//! * recursive summation: `ŝ_1 = a_1`, `ŝ_k = round(ŝ_{k−1} + a_k)`, so
//!   `n − 1` roundings;
//! * inner product: `ŝ = round(a_1 b_1)`, then
//!   `ŝ = round(ŝ + round(a_k b_k))` for `k >= 2`, so `2n − 1` roundings;
//! * gradient descent on the Rosenbrock function with the parameter update
//!   rounded at low precision.

use crate::dyadic::{exact_dot, exact_sum, DyadicValue};
use crate::error::{Error, Result};
use crate::fp_core::{self, FpFormat};
use crate::sr_engine::{round, round_traced, substrate_op, BitSource, Op, RoundingRecord, SrConfig};

/// Outcome of a summation or inner-product kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelResult {
    /// Computed `ŷ`.
    pub value: f64,
    /// Exact `y`.
    pub exact: DyadicValue,
    /// `|ŷ − y| / |y|`; 0 when both vanish, `+∞` when only `y` does.
    pub rel_error: f64,
    /// Number of roundings performed.
    pub op_count: usize,
}

/// `|value − exact| / |exact|`, with the difference taken exactly.
pub fn relative_error(value: f64, exact: &DyadicValue) -> Result<f64> {
    let diff = (&DyadicValue::from_f64(value)? - exact).abs();
    if exact.is_zero() {
        return Ok(if diff.is_zero() { 0.0 } else { f64::INFINITY });
    }
    Ok(diff.to_f64_lossy() / exact.abs().to_f64_lossy())
}

fn check_inputs(values: &[f64], fmt: FpFormat) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("kernel input is empty"));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || !fp_core::is_representable(v, fmt) {
            return Err(Error::at(
                i,
                Error::invalid(format!("{v} is not a precision-{} value", fmt.precision())),
            ));
        }
    }
    Ok(())
}

/// Applies the configured rounding, recording it when tracing.
struct Rounder<'a, B: ?Sized> {
    cfg: &'a SrConfig,
    bits: &'a mut B,
    trace: Option<&'a mut Vec<RoundingRecord>>,
    count: usize,
}

impl<B: BitSource + ?Sized> Rounder<'_, B> {
    fn round(&mut self, x: f64) -> Result<f64> {
        self.count += 1;
        match self.trace.as_deref_mut() {
            None => round(x, self.cfg, self.bits),
            Some(trace) => {
                let (v, rec) = round_traced(x, self.cfg, self.bits)?;
                trace.push(rec);
                Ok(v)
            }
        }
    }
}

fn sum_schedule<B: BitSource + ?Sized>(a: &[f64], rounder: &mut Rounder<'_, B>) -> Result<f64> {
    let mut s = a[0];
    for (i, &v) in a.iter().enumerate().skip(1) {
        s = substrate_op(Op::Add, s, v)
            .and_then(|x| rounder.round(x))
            .map_err(|e| Error::at(i, e))?;
    }
    Ok(s)
}

fn dot_schedule<B: BitSource + ?Sized>(a: &[f64], b: &[f64], rounder: &mut Rounder<'_, B>) -> Result<f64> {
    let mut s = 0.0;
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let mut step = || -> Result<f64> {
            let prod = rounder.round(substrate_op(Op::Mul, x, y)?)?;
            if i == 0 {
                Ok(prod)
            } else {
                rounder.round(substrate_op(Op::Add, s, prod)?)
            }
        };
        s = step().map_err(|e| Error::at(i, e))?;
    }
    Ok(s)
}

fn finish(value: f64, exact: DyadicValue, op_count: usize) -> Result<KernelResult> {
    let rel_error = relative_error(value, &exact)?;
    Ok(KernelResult {
        value,
        exact,
        rel_error,
        op_count,
    })
}

/// Computed sum only, without the exact reference (hot path for the harness).
pub fn recursive_sum_value<B: BitSource + ?Sized>(a: &[f64], cfg: &SrConfig, bits: &mut B) -> Result<f64> {
    check_inputs(a, cfg.format())?;
    let mut rounder = Rounder { cfg, bits, trace: None, count: 0 };
    sum_schedule(a, &mut rounder)
}

/// Recursive summation of precision-`p` values with one rounding per
/// addition.
pub fn recursive_sum<B: BitSource + ?Sized>(a: &[f64], cfg: &SrConfig, bits: &mut B) -> Result<KernelResult> {
    check_inputs(a, cfg.format())?;
    let mut rounder = Rounder { cfg, bits, trace: None, count: 0 };
    let value = sum_schedule(a, &mut rounder)?;
    let count = rounder.count;
    finish(value, exact_sum(a)?, count)
}

/// [`recursive_sum`] plus one record per rounding, in schedule order.
pub fn recursive_sum_traced<B: BitSource + ?Sized>(
    a: &[f64],
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<(KernelResult, Vec<RoundingRecord>)> {
    check_inputs(a, cfg.format())?;
    let mut trace = Vec::with_capacity(a.len());
    let mut rounder = Rounder { cfg, bits, trace: Some(&mut trace), count: 0 };
    let value = sum_schedule(a, &mut rounder)?;
    let count = rounder.count;
    Ok((finish(value, exact_sum(a)?, count)?, trace))
}

fn check_pair(a: &[f64], b: &[f64], fmt: FpFormat) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    check_inputs(a, fmt)?;
    check_inputs(b, fmt)
}

/// Computed inner product only.
pub fn inner_product_value<B: BitSource + ?Sized>(
    a: &[f64],
    b: &[f64],
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<f64> {
    check_pair(a, b, cfg.format())?;
    let mut rounder = Rounder { cfg, bits, trace: None, count: 0 };
    dot_schedule(a, b, &mut rounder)
}

/// Inner product with each product and each running addition rounded once.
pub fn inner_product<B: BitSource + ?Sized>(
    a: &[f64],
    b: &[f64],
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<KernelResult> {
    check_pair(a, b, cfg.format())?;
    let mut rounder = Rounder { cfg, bits, trace: None, count: 0 };
    let value = dot_schedule(a, b, &mut rounder)?;
    let count = rounder.count;
    finish(value, exact_dot(a, b)?, count)
}

/// [`inner_product`] plus its rounding records: the first product, then
/// alternating product and sum for each further element.
pub fn inner_product_traced<B: BitSource + ?Sized>(
    a: &[f64],
    b: &[f64],
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<(KernelResult, Vec<RoundingRecord>)> {
    check_pair(a, b, cfg.format())?;
    let mut trace = Vec::with_capacity(2 * a.len());
    let mut rounder = Rounder { cfg, bits, trace: Some(&mut trace), count: 0 };
    let value = dot_schedule(a, b, &mut rounder)?;
    let count = rounder.count;
    Ok((finish(value, exact_dot(a, b)?, count)?, trace))
}

/// `f(x₁, x₂) = (1 − x₁)² + 100 (x₂ − x₁²)²`.
pub fn rosenbrock_f(x: [f64; 2]) -> f64 {
    let [x1, x2] = x;
    (1.0 - x1).powi(2) + 100.0 * (x2 - x1 * x1).powi(2)
}

/// `∇f = (−2(1 − x₁) − 400 x₁ (x₂ − x₁²), 200 (x₂ − x₁²))`.
pub fn rosenbrock_grad(x: [f64; 2]) -> [f64; 2] {
    let [x1, x2] = x;
    let valley = x2 - x1 * x1;
    [-2.0 * (1.0 - x1) - 400.0 * x1 * valley, 200.0 * valley]
}

/// Iterates and losses of one gradient-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct GdTrajectory {
    pub iterates: Vec<[f64; 2]>,
    /// `|f(x_k) − f(x*)|` with `f(x*) = 0`.
    pub loss_series: Vec<f64>,
    pub mode: String,
    /// Set when an update left the representable range; the trajectory
    /// stops at the last valid iterate.
    pub diverged: bool,
}

/// Variations of the low-precision update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GdOptions {
    /// Also round `t·g` before the subtraction (two roundings per update).
    pub round_step_product: bool,
}

/// Gradient descent `x_{k+1} = x_k − t ∇f(x_k)` on the Rosenbrock function.
///
/// The gradient is evaluated in binary64 and downcast to precision `p` with
/// round-to-nearest; `t·g` is formed in binary64 and the subtraction is
/// rounded once with the configured mode. With `p = 53` and
/// round-to-nearest this is the plain binary64 baseline.
pub fn gd_rosenbrock<B: BitSource + ?Sized>(
    x0: [f64; 2],
    t: f64,
    iters: usize,
    cfg: &SrConfig,
    bits: &mut B,
) -> Result<GdTrajectory> {
    gd_rosenbrock_with(x0, t, iters, cfg, bits, GdOptions::default())
}

pub fn gd_rosenbrock_with<B: BitSource + ?Sized>(
    x0: [f64; 2],
    t: f64,
    iters: usize,
    cfg: &SrConfig,
    bits: &mut B,
    opts: GdOptions,
) -> Result<GdTrajectory> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("learning rate {t} must be positive")));
    }
    let fmt = cfg.format();
    check_inputs(&x0, fmt)?;
    let mut x = x0;
    let mut traj = GdTrajectory {
        iterates: Vec::with_capacity(iters + 1),
        loss_series: Vec::with_capacity(iters + 1),
        mode: cfg.label(),
        diverged: false,
    };
    traj.iterates.push(x);
    traj.loss_series.push(rosenbrock_f(x).abs());
    for _ in 0..iters {
        match gd_step(x, t, cfg, bits, opts) {
            Ok(next) => x = next,
            Err(e) if e.is_range() => {
                traj.diverged = true;
                break;
            }
            Err(e) => return Err(e),
        }
        let loss = rosenbrock_f(x).abs();
        if !loss.is_finite() {
            traj.diverged = true;
            break;
        }
        traj.iterates.push(x);
        traj.loss_series.push(loss);
    }
    Ok(traj)
}

fn gd_step<B: BitSource + ?Sized>(
    x: [f64; 2],
    t: f64,
    cfg: &SrConfig,
    bits: &mut B,
    opts: GdOptions,
) -> Result<[f64; 2]> {
    let grad = rosenbrock_grad(x);
    let mut next = x;
    for i in 0..2 {
        let g = fp_core::round_nearest(grad[i], cfg.format())?;
        let mut step = substrate_op(Op::Mul, t, g)?;
        if opts.round_step_product {
            step = round(step, cfg, bits)?;
        }
        next[i] = round(substrate_op(Op::Sub, x[i], step)?, cfg, bits)?;
    }
    Ok(next)
}
