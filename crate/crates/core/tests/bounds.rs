use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use srlab::bounds::*;
use srlab::RandomBits;

/// `γ_n(2^-k)` from the exact integer `(2^k + 1)^n − 2^(kn)`.
fn gamma_exact(n: u32, k: u32) -> f64 {
    let base = (BigUint::one() << k) + BigUint::one();
    let num = base.pow(n) - (BigUint::one() << (k * n) as usize);
    let shift = (k * n) as i64;
    let bits = num.bits() as i64;
    let keep = bits.min(60);
    let top = (&num >> (bits - keep) as usize).to_u64().unwrap() as f64;
    top * 2f64.powi((bits - keep - shift) as i32)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn query(n: u64, r: RandomBits) -> BoundQuery {
    BoundQuery::new(n, 11, r, 0.1, 1.0).unwrap()
}

#[test]
fn gamma_matches_integer_oracle() {
    for &(n, k) in &[(1u32, 10u32), (7, 3), (100, 10), (999, 10), (5999, 17), (5999, 10), (3000, 20)] {
        let exact = gamma_exact(n, k);
        let got = gamma(n as u64, 2f64.powi(-(k as i32)));
        assert!(close(got, exact, 1e-13), "n={n} k={k}: {got} vs {exact}");
    }
}

#[test]
fn frozen_summation_bounds() {
    let q7 = query(6000, RandomBits::Bits(7));
    assert!(close(bias_bound_sum(&q7), 0.0468321074459364, 1e-12));
    assert!(close(bc_bound_sum(&q7).unwrap(), 16.575263536889372, 1e-12));
    assert!(close(det_bound_sum(6000, 11, 1.0), 348.16331092279625, 1e-12));
    let ideal = query(1000, RandomBits::Ideal);
    assert!(close(ah_bound_sum(&ideal).unwrap(), 0.13282155131018527, 1e-12));
}

#[test]
fn frozen_inner_product_bounds() {
    let q = query(1000, RandomBits::Bits(5));
    assert!(close(bias_bound_inner(&q), 0.03098753264433406, 1e-12));
    assert!(close(ah_bound_inner(&q).unwrap(), 0.21513368782944323, 1e-12));
    assert!(close(bc_bound_inner(&q).unwrap(), 0.1798404448857751, 1e-12));
}

#[test]
fn two_term_sum_closed_forms() {
    let q = query(2, RandomBits::Bits(4));
    assert_eq!(det_bound_sum(2, 11, 1.0), 2f64.powi(-10));
    assert_eq!(bias_bound_sum(&q), 2f64.powi(-14));
    assert_eq!(b_envelope(1, 11, RandomBits::Bits(4)), 2f64.powi(-14));
}

#[test]
fn single_term_bounds_vanish() {
    let q = query(1, RandomBits::Bits(3));
    assert_eq!(bias_bound_sum(&q), 0.0);
    assert_eq!(bc_bound_sum(&q).unwrap(), 0.0);
    assert_eq!(det_bound_sum(1, 11, 1.0), 0.0);
}

#[test]
fn rule_of_thumb() {
    assert_eq!(rule_of_thumb_r(4).unwrap(), 1);
    assert_eq!(rule_of_thumb_r(5).unwrap(), 2);
    assert_eq!(rule_of_thumb_r(6000).unwrap(), 7);
    assert_eq!(rule_of_thumb_r(64_000).unwrap(), 8);
    assert_eq!(rule_of_thumb_r(1 << 16).unwrap(), 8);
    assert_eq!(rule_of_thumb_r((1 << 16) + 1).unwrap(), 9);
    assert!(rule_of_thumb_r(1).is_err());
}

#[test]
fn query_validation() {
    assert!(BoundQuery::new(0, 11, RandomBits::Bits(3), 0.1, 1.0).is_err());
    assert!(BoundQuery::new(10, 11, RandomBits::Bits(3), 0.0, 1.0).is_err());
    assert!(BoundQuery::new(10, 11, RandomBits::Bits(3), 1.0, 1.0).is_err());
    assert!(BoundQuery::new(10, 11, RandomBits::Bits(3), 0.1, 0.5).is_err());
    let inf = BoundQuery::new(10, 11, RandomBits::Bits(3), 0.1, f64::INFINITY).unwrap();
    assert_eq!(bc_bound_sum(&inf).unwrap(), f64::INFINITY);
}

#[test]
fn condition_numbers() {
    assert_eq!(cond_sum(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
    assert_eq!(cond_sum(&[1.0, -1.0, 2.0]).unwrap(), 2.0);
    assert_eq!(cond_sum(&[1.0, -1.0]).unwrap(), f64::INFINITY);
    assert!(cond_sum(&[0.0, 0.0]).is_err());
    assert_eq!(cond_inner(&[1.0, 2.0], &[-1.0, -3.0]).unwrap(), 1.0);
}

proptest! {
    #[test]
    fn bc_and_ah_dominate_bias(n in 2u64..10_000, r in 1u32..20) {
        let q = query(n, RandomBits::Bits(r));
        let bias = bias_bound_sum(&q);
        prop_assert!(bc_bound_sum(&q).unwrap() >= bias);
        prop_assert!(ah_bound_sum(&q).unwrap() >= bias);
    }

    #[test]
    fn bounds_scale_with_kappa(n in 2u64..5000, kappa in 1.0f64..1e6) {
        let base = query(n, RandomBits::Bits(6));
        let scaled = BoundQuery::new(n, 11, RandomBits::Bits(6), 0.1, kappa).unwrap();
        let (a, b) = (bc_bound_sum(&base).unwrap() * kappa, bc_bound_sum(&scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn powerset_matches_product(v in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 0..14)) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let direct: f64 = xs.iter().zip(&ys).map(|(x, y)| x + y).product();
        let full = powerset_expansion(&xs, &ys).unwrap();
        prop_assert!((full - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
        let proper = powerset_expansion_proper(&xs, &ys).unwrap();
        let all_x: f64 = xs.iter().product();
        prop_assert!((proper + all_x - full).abs() <= 1e-12 * full.abs().max(1e-300));
    }
}
