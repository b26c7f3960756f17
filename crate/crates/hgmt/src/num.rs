//! Numeric helpers used across the crate: compensated summation, dyadic scale
//! classification, and a small least-squares fit.
//!
//! All reductions over grids go through [`pairwise_sum`] or
//! [`kahan_cumulative`] so that results are deterministic and the rounding
//! error stays O(log n) in the term count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Balanced pairwise summation.  Splits recursively down to blocks of 16,
/// which keeps the error constant small without recursion overhead on
/// short slices.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Kahan-compensated running sums.  Returns `terms.len() + 1` values starting
/// at 0, so `out[k]` is the sum of the first `k` terms.
pub fn kahan_cumulative(terms: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(terms.len() + 1);
    out.push(0.0);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &t in terms {
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        out.push(sum);
    }
    out
}

/// Power of two with integer exponent.
pub fn pow2(e: i32) -> f64 {
    (2.0f64).powi(e)
}

/// Dyadic scale of a positive gap: the unique integer `k` with
/// `2^{-k-1} <= h < 2^{-k}`.  For `h = 1` this is `-1`.
pub fn dyadic_scale(h: f64) -> i32 {
    assert!(h.is_finite() && h > 0.0, "dyadic scale needs a positive finite gap");
    let mut k = (-h.log2()).ceil() as i32 - 1;
    // log2 can land one off near exact powers of two; nudge until the
    // bracketing inequalities hold.
    while pow2(-k) <= h {
        k -= 1;
    }
    while pow2(-k - 1) > h {
        k += 1;
    }
    k
}

/// Slope of the least-squares line through `(xs[i], ys[i])`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "slope needs at least two points");
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    assert!(sxx > 0.0, "slope needs distinct abscissae");
    sxy / sxx
}

/// Deterministic RNG for sampled checks and randomized subdivision families.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Relative gap `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| 1.0 / i as f64).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn kahan_cumulative_starts_at_zero_and_telescopes() {
        let terms = [0.1, 0.2, 0.3, -0.6];
        let cum = kahan_cumulative(&terms);
        assert_eq!(cum.len(), 5);
        assert_eq!(cum[0], 0.0);
        assert!((cum[4]).abs() < 1e-15);
    }

    #[test]
    fn dyadic_scale_brackets() {
        assert_eq!(dyadic_scale(1.0), -1);
        assert_eq!(dyadic_scale(0.5), 0);
        assert_eq!(dyadic_scale(0.5 - 1e-12), 1);
        assert_eq!(dyadic_scale(0.25), 1);
        assert_eq!(dyadic_scale(0.75), 0);
        for k in 0..40 {
            let h = pow2(-k);
            assert_eq!(dyadic_scale(h), k - 1);
            assert_eq!(dyadic_scale(h * 0.999), k);
        }
    }

    #[test]
    fn slope_of_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&xs, &ys) - 2.0).abs() < 1e-14);
    }
}
