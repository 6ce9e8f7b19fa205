use rand::Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// `P(NB(v, 1/2) >= k)`, where `NB(v, 1/2)` counts successes before the
/// `v`-th failure of a fair coin.
///
/// For `v + k <= 64` the complement `Σ_{i<k} C(i+v−1, i) 2^{−i−v}` is summed
/// exactly over the common denominator `2^{v+k−1}` and subtracted in integer
/// arithmetic. Larger arguments use the identity
/// `P(NB(v, 1/2) >= k) = P(Bin(k+v−1, 1/2) >= k)` summed in log space, which
/// involves no subtraction at all.
pub fn nb_tail(v: u32, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if v == 0 {
        return 0.0;
    }
    if v + k <= 64 {
        nb_tail_exact(v, k)
    } else {
        nb_tail_log(v, k)
    }
}

fn nb_tail_exact(v: u32, k: u32) -> f64 {
    let exponent = v + k - 1;
    let denom: u128 = 1u128 << exponent;
    // binom = C(i+v−1, i), starting at i = 0.
    let mut binom: u128 = 1;
    let mut head: u128 = 0;
    for i in 0..k {
        if i > 0 {
            binom = binom * u128::from(i + v - 1) / u128::from(i);
        }
        head += binom << (k - 1 - i);
    }
    (denom - head) as f64 / denom as f64
}

fn nb_tail_log(v: u32, k: u32) -> f64 {
    let trials = u64::from(k) + u64::from(v) - 1;
    let ln_half = -(trials as f64) * std::f64::consts::LN_2;
    let terms: Vec<f64> = (u64::from(k)..=trials)
        .map(|j| ln_binomial(trials, j) + ln_half)
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    (top + sum.ln()).exp().min(1.0)
}

/// Chosen `v` for a `(k, α)` target, optionally randomized between `v` and
/// `v + 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Calibration {
    pub k: u32,
    pub alpha: f64,
    /// Largest `v` with `nb_tail(v, k) <= α`.
    pub v: u32,
    /// Probability of running with `v` rather than `v + 1`.
    pub omega: f64,
    pub randomized: bool,
    /// The uniform draw, when randomized.
    pub draw: Option<f64>,
    pub v_used: u32,
}

fn check_target(k: u32, alpha: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

fn largest_v(k: u32, alpha: f64) -> u32 {
    let mut v = 0;
    while nb_tail(v + 1, k) <= alpha {
        v += 1;
    }
    v
}

/// Deterministic calibration. `v = 0` means nothing is rejected before top-up.
pub fn choose_v(k: u32, alpha: f64) -> Result<Calibration> {
    check_target(k, alpha)?;
    let v = largest_v(k, alpha);
    Ok(Calibration {
        k,
        alpha,
        v,
        omega: 1.0,
        randomized: false,
        draw: None,
        v_used: v,
    })
}

/// Randomized calibration consuming exactly one uniform from `rng`.
pub fn choose_v_randomized<R: Rng + ?Sized>(
    k: u32,
    alpha: f64,
    rng: &mut R,
) -> Result<Calibration> {
    let u: f64 = rng.random();
    randomized_from_uniform(k, alpha, u)
}

/// Randomized calibration for a given uniform draw `u ∈ [0, 1)`: `v` is used
/// when `u < ω`, `v + 1` otherwise.
pub fn randomized_from_uniform(k: u32, alpha: f64, u: f64) -> Result<Calibration> {
    check_target(k, alpha)?;
    let v = largest_v(k, alpha);
    let lo = nb_tail(v, k);
    let hi = nb_tail(v + 1, k);
    let omega = ((hi - alpha) / (hi - lo)).clamp(0.0, 1.0);
    let v_used = if u < omega { v } else { v + 1 };
    Ok(Calibration {
        k,
        alpha,
        v,
        omega,
        randomized: true,
        draw: Some(u),
        v_used,
    })
}

/// `θ(a) = (a+2)^{a+2} / (2^{a+2} (a+1)^{a+1})`.
pub fn chernoff_theta(a: f64) -> f64 {
    log_theta(a).exp()
}

fn log_theta(a: f64) -> f64 {
    (a + 2.0) * (a + 2.0).ln() - (a + 2.0) * std::f64::consts::LN_2 - (a + 1.0) * (a + 1.0).ln()
}

/// Upper bound `θ(a)^v` on `P(V >= (1+a) v)`.
pub fn chernoff_bound(v: u32, a: f64) -> f64 {
    (f64::from(v) * log_theta(a)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binom(n: u64, r: u64) -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..r {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        acc
    }

    /// Exact complement `Σ_{i<k} C(i+v−1, i) 2^{−i−v}`.
    fn head_oracle(v: u32, k: u32) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..k {
            let c = binom(u64::from(i + v - 1), u64::from(i));
            let den = BigInt::one() << (i + v) as usize;
            acc += BigRational::new(c, den);
        }
        acc
    }

    #[test]
    fn small_anchors() {
        assert_eq!(nb_tail(1, 1), 0.5);
        for k in 1..20 {
            assert_eq!(nb_tail(0, k), 0.0);
        }
        assert_eq!(nb_tail(1, 5), 1.0 / 32.0);
        assert_eq!(nb_tail(2, 5), 7.0 / 64.0);
        assert_eq!(nb_tail(4, 10), 189.0 / 4096.0);
        assert_eq!(nb_tail(5, 10), 1471.0 / 16384.0);
        assert!(nb_tail(4, 10) <= 0.05 && nb_tail(5, 10) > 0.05);
    }

    #[test]
    fn matches_rational_oracle_and_sums_to_one() {
        for v in 1..40u32 {
            for k in 1..(64 - v).min(40) {
                let head = head_oracle(v, k).to_f64().unwrap();
                let tail = nb_tail(v, k);
                assert!((tail + head - 1.0).abs() <= 1e-12, "v={v} k={k}");
            }
        }
    }

    #[test]
    fn log_route_agrees_with_exact_route() {
        for (v, k) in [(10, 20), (30, 30), (5, 58), (40, 20)] {
            assert_abs_diff_eq!(nb_tail_log(v, k), nb_tail_exact(v, k), epsilon = 1e-12);
        }
        // Beyond the exact range, against the rational oracle.
        for (v, k) in [(40, 40), (10, 80), (100, 20)] {
            let expected = 1.0 - head_oracle(v, k).to_f64().unwrap();
            assert_abs_diff_eq!(nb_tail(v, k), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn choose_v_examples() {
        assert_eq!(choose_v(10, 0.05).unwrap().v, 4);
        assert_eq!(choose_v(1, 0.25).unwrap().v, 0);
        assert_eq!(choose_v(5, 0.05).unwrap().v, 1);
        assert!(choose_v(0, 0.05).is_err());
        assert!(choose_v(3, 1.0).is_err());
        assert!(choose_v(3, 0.0).is_err());
    }

    #[test]
    fn randomized_boundary_is_degenerate() {
        let c = randomized_from_uniform(1, 0.5, 0.999).unwrap();
        assert_eq!(c.v, 1);
        assert_eq!(c.omega, 1.0);
        assert_eq!(c.v_used, 1);
    }

    #[test]
    fn randomized_k10() {
        let c = randomized_from_uniform(10, 0.05, 0.5).unwrap();
        let (lo, hi) = (189.0 / 4096.0, 1471.0 / 16384.0);
        assert_eq!(c.v, 4);
        assert_abs_diff_eq!(c.omega, (hi - 0.05) / (hi - lo), epsilon = 1e-15);
        assert_abs_diff_eq!(c.omega, 0.9116083916083916, epsilon = 1e-12);
        assert_eq!(c.v_used, 4);
        assert_eq!(randomized_from_uniform(10, 0.05, 0.95).unwrap().v_used, 5);
    }

    #[test]
    fn randomized_k1_mixes_zero_and_one() {
        let c = randomized_from_uniform(1, 0.05, 0.0).unwrap();
        assert_eq!(c.v, 0);
        assert_abs_diff_eq!(c.omega, 0.9, epsilon = 1e-15);
    }

    #[test]
    fn randomized_mixture_hits_alpha() {
        for (k, alpha) in [(1, 0.05), (5, 0.05), (10, 0.05), (2, 0.5)] {
            let c = randomized_from_uniform(k, alpha, 0.0).unwrap();
            let mix = c.omega * nb_tail(c.v, k) + (1.0 - c.omega) * nb_tail(c.v + 1, k);
            assert_abs_diff_eq!(mix, alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn randomized_consumes_one_draw() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let c = choose_v_randomized(5, 0.05, &mut a).unwrap();
        let u: f64 = b.random();
        assert_eq!(c.draw, Some(u));
        let next_a: u64 = a.random();
        let next_b: u64 = b.random();
        assert_eq!(next_a, next_b);
    }

    #[test]
    fn chernoff_examples() {
        assert_abs_diff_eq!(chernoff_theta(1.0), 27.0 / 32.0, epsilon = 1e-14);
        assert_abs_diff_eq!(chernoff_bound(1, 1.0), 0.84375, epsilon = 1e-14);
        assert_abs_diff_eq!(
            chernoff_bound(2, 1.0),
            (27.0f64 / 32.0).powi(2),
            epsilon = 1e-14
        );
        for a in [0.1, 1.0, 10.0] {
            assert!(chernoff_theta(a) < 1.0);
        }
    }

    proptest! {
        #[test]
        fn tail_monotone(v in 1u32..30, k in 1u32..30) {
            prop_assert!(nb_tail(v, k + 1) < nb_tail(v, k));
            prop_assert!(nb_tail(v + 1, k) > nb_tail(v, k));
        }

        #[test]
        fn choose_v_monotone(k in 1u32..15, a in 0.001f64..0.9, b in 0.001f64..0.9) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(choose_v(k, lo).unwrap().v <= choose_v(k, hi).unwrap().v);
            prop_assert!(choose_v(k, lo).unwrap().v <= choose_v(k + 1, lo).unwrap().v);
        }

        #[test]
        fn chernoff_below_one(a in 0.01f64..50.0, v in 1u32..20) {
            prop_assert!(chernoff_bound(v, a) < 1.0);
            prop_assert!(chernoff_bound(v + 1, a) < chernoff_bound(v, a));
        }
    }
}
