//! Emulation of precision-`p` floating-point arithmetic under stochastic
//! rounding with a limited number of random bits, together with the error
//! bounds for recursive summation and inner products and a reproducible
//! Monte Carlo harness.
//!
//! `SR_{p,r}` rounds a real `x` up to the next precision-`p` number with
//! probability `q_r(x) = (fl_{p+r}(x) − ⌊x⌋_p) / ulp_p(x)`, where
//! `fl_{p+r}` truncates `x` to `p + r` significand bits. With `r = 53 − p`
//! this is ordinary stochastic rounding on the binary64 substrate.
//!
//! ```
//! use srlab::fp_core::FpFormat;
//! use srlab::sr_engine::{make_stream, q_r_numerator, sr_round, RandomBits, SrConfig};
//!
//! let cfg = SrConfig::stochastic(FpFormat::new(2)?, RandomBits::Bits(3))?;
//! assert_eq!(q_r_numerator(1.3125, &cfg)?, 5); // q = 5/8
//!
//! let mut rng = make_stream(7, 0);
//! let y = sr_round(1.3125, &cfg, &mut rng)?;
//! assert!(y == 1.0 || y == 1.5);
//! # Ok::<(), srlab::Error>(())
//! ```

pub mod bounds;
pub mod cli;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod fp_core;
pub mod kernels;
pub mod sr_engine;

pub use error::{Error, Result};
pub use fp_core::FpFormat;
pub use sr_engine::{make_stream, Mode, RandomBits, RngStream, SrConfig};
