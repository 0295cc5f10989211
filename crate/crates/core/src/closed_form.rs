//! Scalar closed forms shared by the state and channel bounds.

use crate::error::{Error, Result};

const RADICAL_GUARD: f64 = 1e-14;

/// Square root that treats tiny negative arguments as zero.
pub(crate) fn guarded_sqrt(x: f64) -> f64 {
    if (-RADICAL_GUARD..0.0).contains(&x) {
        0.0
    } else {
        x.sqrt()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
        return Err(Error::domain(format!("epsilon {eps} outside [0, 1]")));
    }
    Ok(())
}

fn radical(eps: f64, k: u32) -> f64 {
    let k2 = f64::from(k) * f64::from(k);
    2.0 * guarded_sqrt((k2 - 1.0) * eps * (1.0 - eps)) / k2
}

/// `ς(ε, k) = ε + (1 − 2ε)/k² + 2√((k² − 1)ε(1 − ε))/k²`.
///
/// Upper bound on the privacy-test pass probability of an unextendible
/// extension marginal when the tested state is ε-close to a private state.
/// Defined for ε ∈ [0, 1 − 1/k²], or all of [0, 1] when k = 1.
pub fn varsigma(eps: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("key dimension k must be at least 1"));
    }
    let k2 = f64::from(k) * f64::from(k);
    let upper = if k == 1 { 1.0 } else { 1.0 - 1.0 / k2 };
    if eps.is_nan() || eps < 0.0 || eps > upper + 1e-15 {
        return Err(Error::domain(format!(
            "epsilon {eps} outside [0, 1 - 1/k^2] for k = {k}"
        )));
    }
    Ok(eps + (1.0 - 2.0 * eps) / k2 + radical(eps, k))
}

/// Threshold above which the one-shot key bound is zero: `ς(ε, 2)`.
///
/// For ε ≥ 3/4 the value is clamped to 1.
pub fn zero_threshold(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if eps >= 0.75 {
        return Ok(1.0);
    }
    Ok(varsigma(eps, 2)?.min(1.0))
}

/// The monotone function
/// `f(J, ε) = ½ log₂[((√(J(1−J)) + √(ε(1−ε)))/(J − ε))² + 1]`.
///
/// Strictly decreasing in `J` and strictly increasing in `ε` on `J > ε`.
/// At ε = 0 it reduces to `½ log₂(1/J)`.
pub fn f_bound(j: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if j.is_nan() || j <= eps {
        return Err(Error::domain(format!("f requires J > epsilon (J = {j}, epsilon = {eps})")));
    }
    if j > 1.0 + 1e-9 {
        return Err(Error::domain(format!("J = {j} exceeds 1")));
    }
    let j = j.min(1.0);
    let num = guarded_sqrt(j * (1.0 - j)) + guarded_sqrt(eps * (1.0 - eps));
    let ratio = num / (j - eps);
    Ok(0.5 * (ratio * ratio + 1.0).log2())
}

/// Interval of achievable privacy-test pass probabilities `q` for a state
/// ε-close (in infidelity) to a private state of key dimension `k`.
pub fn q_range(eps: f64, k: u32) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if k < 2 {
        return Err(Error::domain("q_range requires k >= 2"));
    }
    let k2 = f64::from(k) * f64::from(k);
    let centre = eps + (1.0 - 2.0 * eps) / k2;
    let rad = radical(eps, k);
    if eps <= 1.0 / k2 {
        Ok((centre - rad, centre + rad))
    } else if eps <= 1.0 - 1.0 / k2 {
        Ok((0.0, (centre + rad).min(1.0)))
    } else {
        Ok((0.0, 1.0))
    }
}

/// Smooth-min unextendible entanglement of a maximally entangled state of
/// Schmidt rank `d`: `log₂ d − ½ log₂(1 − ε)`.
pub fn prop3_value(d: usize, eps: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain("d must be at least 2"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("epsilon {eps} outside [0, 1)")));
    }
    Ok((d as f64).log2() - 0.5 * (1.0 - eps).log2())
}

/// `−log₂(√J − √ε)` when `J > ε`.
pub fn relaxed_alg(j: f64, eps: f64) -> Option<f64> {
    (j > eps).then(|| -(guarded_sqrt(j) - guarded_sqrt(eps)).log2())
}

/// `−½ log₂(J − √ε)` when `J > √ε`.
pub fn relaxed_td(j: f64, eps: f64) -> Option<f64> {
    let s = guarded_sqrt(eps);
    (j > s).then(|| -0.5 * (j - s).log2())
}

/// Ladder order parameter `α = 1 + 2^{−ℓ}`.
pub fn alpha_of_ell(ell: u32) -> f64 {
    1.0 + 0.5f64.powi(ell as i32)
}

/// Optimal mixing weight of the erasure-channel extension for the
/// α-geometric measure.
pub fn erasure_b_opt(p: f64, d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    let d2 = d * d;
    let da = d.powf(2.0 / alpha);
    d2 * ((1.0 - p).powi(2) - p * p * da) / (p * da + (1.0 - p) * d2)
}

/// α-geometric unextendible entanglement of the `d`-dimensional erasure
/// channel with erasure probability `p`.
pub fn erasure_geo_analytic(p: f64, d: usize, alpha: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain("d must be at least 2"));
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::domain(format!("p = {p} outside [0, 1]")));
    }
    if !(alpha > 0.0 && alpha <= 2.0 && alpha != 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0,1) U (1,2]")));
    }
    if p >= 0.5 {
        return Ok(0.0);
    }
    let df = d as f64;
    let pre = 0.5 / (alpha - 1.0);
    if p == 0.0 {
        return Ok(df.log2());
    }
    let split = 1.0 / (df.powf(1.0 / alpha) + 1.0);
    let inner = if p <= split {
        let b = erasure_b_opt(p, d, alpha);
        (p + b / (df * df)).powf(1.0 - alpha) * (1.0 - p).powf(alpha)
            + (1.0 - p - b).powf(1.0 - alpha) * p.powf(alpha)
    } else {
        p.powf(1.0 - alpha) * (1.0 - p).powf(alpha) + (1.0 - p).powf(1.0 - alpha) * p.powf(alpha)
    };
    Ok(pre * inner.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        let glo = g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == (glo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Largest `k² − 1` with `ς(ε, k) ≥ J`, obtained by bisection on the
    /// continuous extension of `ς` in `x = k² − 1`.
    fn f_oracle(j: f64, eps: f64) -> f64 {
        let s = |x: f64| eps + (1.0 - 2.0 * eps) / (x + 1.0) + 2.0 * (x * eps * (1.0 - eps)).sqrt() / (x + 1.0);
        let mut hi = 1.0;
        while s(hi) >= j {
            hi *= 2.0;
        }
        let x = bisect(0.0, hi, |x| s(x) - j);
        0.5 * (x + 1.0).log2()
    }

    #[test]
    fn varsigma_examples() {
        assert_abs_diff_eq!(varsigma(0.0, 3).unwrap(), 1.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(varsigma(0.3, 1).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(varsigma(0.05, 2).unwrap(), 0.463_746, epsilon = 1e-6);
        assert!(varsigma(0.8, 2).is_err());
        assert!(varsigma(-0.1, 2).is_err());
    }

    #[test]
    fn zero_threshold_examples() {
        assert_abs_diff_eq!(zero_threshold(0.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(zero_threshold(0.05).unwrap(), varsigma(0.05, 2).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(zero_threshold(0.75).unwrap(), 1.0, epsilon = 1e-12);
        let s = |e: f64| 0.25 + e / 2.0 + (3.0 * e * (1.0 - e)).sqrt() / 2.0;
        assert_abs_diff_eq!(s(0.75), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn f_examples() {
        for d in 2..6usize {
            let j = 1.0 / (d * d) as f64;
            assert_abs_diff_eq!(f_bound(j, 0.0).unwrap(), (d as f64).log2(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(f_bound(1.0, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(f_bound(0.1, 0.1).is_err());
        assert!(f_bound(0.05, 0.1).is_err());
    }

    #[test]
    fn f_matches_bisection_oracle() {
        for &eps in &[0.0, 0.01, 0.05, 0.1, 0.2] {
            for i in 1..20 {
                let j = eps + (1.0 - 2.0 * eps) * f64::from(i) / 20.0;
                if j <= eps || j > 1.0 - eps {
                    continue;
                }
                let a = f_bound(j, eps).unwrap();
                let b = f_oracle(j, eps);
                assert!((a - b).abs() < 1e-9, "J={j} eps={eps}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn q_range_examples() {
        for k in 2..5 {
            let (lo, hi) = q_range(0.0, k).unwrap();
            let c = 1.0 / f64::from(k * k);
            assert_abs_diff_eq!(lo, c, epsilon = 1e-15);
            assert_abs_diff_eq!(hi, c, epsilon = 1e-15);
            assert_eq!(q_range(1.0, k).unwrap(), (0.0, 1.0));
        }
        let (lo, hi) = q_range(0.05, 2).unwrap();
        assert_abs_diff_eq!(lo, 0.086_254, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 0.463_746, epsilon = 1e-6);
        let (lo, hi) = q_range(0.75, 2).unwrap();
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn relaxation_examples() {
        assert_abs_diff_eq!(relaxed_alg(0.25, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(relaxed_alg(0.25, 0.01).unwrap(), 1.321_928, epsilon = 1e-6);
        assert!(relaxed_alg(0.2, 0.2).is_none());
        assert_abs_diff_eq!(relaxed_td(0.5, 0.01).unwrap(), 0.660_964, epsilon = 1e-6);
        assert_abs_diff_eq!(relaxed_alg(0.3, 0.04).unwrap(), -(0.3f64.sqrt() - 0.2).log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(relaxed_alg(0.3, 0.04).unwrap(), 1.523_99, epsilon = 1e-5);
        assert_abs_diff_eq!(relaxed_td(0.3, 0.04).unwrap(), 1.660_964, epsilon = 1e-6);
        assert!(relaxed_td(0.1, 0.01).is_none());
    }

    #[test]
    fn prop3_examples() {
        assert_abs_diff_eq!(prop3_value(2, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(prop3_value(3, 0.0).unwrap(), 3f64.log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(prop3_value(2, 0.1).unwrap(), 1.076_001, epsilon = 1e-6);
    }

    #[test]
    fn erasure_analytic_examples() {
        assert_abs_diff_eq!(erasure_b_opt(0.25, 2, 2.0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(erasure_geo_analytic(0.25, 2, 2.0).unwrap(), 0.5 * 1.75f64.log2(), epsilon = 1e-12);
        let second = 0.5 * (0.55f64.powi(2) / 0.45 + 0.45f64.powi(2) / 0.55).log2();
        assert_abs_diff_eq!(erasure_geo_analytic(0.45, 2, 2.0).unwrap(), second, epsilon = 1e-12);
        assert_abs_diff_eq!(second, 0.028_58, epsilon = 1e-5);
        assert_eq!(erasure_geo_analytic(0.5, 2, 2.0).unwrap(), 0.0);
        assert_eq!(erasure_geo_analytic(0.7, 3, 1.5).unwrap(), 0.0);
        assert!(erasure_geo_analytic(0.2, 2, 2.5).is_err());
        assert!(erasure_geo_analytic(0.2, 2, 1.0).is_err());
    }

    #[test]
    fn erasure_branches_agree_at_split() {
        for &(d, alpha) in &[(2usize, 2.0), (3, 1.5), (2, 1.25), (4, 0.5)] {
            let split = 1.0 / ((d as f64).powf(1.0 / alpha) + 1.0);
            let below = erasure_geo_analytic(split - 1e-9, d, alpha).unwrap();
            let above = erasure_geo_analytic(split + 1e-9, d, alpha).unwrap();
            assert!((below - above).abs() < 1e-6, "d={d} alpha={alpha}: {below} vs {above}");
        }
    }

    #[test]
    fn erasure_analytic_approaches_identity_at_zero_erasure() {
        let v = erasure_geo_analytic(1e-9, 2, 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
        assert_eq!(erasure_geo_analytic(0.0, 3, 2.0).unwrap(), 3f64.log2());
    }

    proptest! {
        #[test]
        fn f_monotone(eps in 0.0f64..0.3, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let span = 1.0 - 2.0 * eps;
            let (j1, j2) = (eps + span * a.min(b) + 1e-6, eps + span * a.max(b) + 1e-6);
            prop_assume!(j2 - j1 > 1e-9 && j2 <= 1.0 - eps);
            prop_assert!(f_bound(j1, eps).unwrap() > f_bound(j2, eps).unwrap());
        }

        #[test]
        fn varsigma_in_unit_range(k in 1u32..6, t in 0.0f64..1.0) {
            let k2 = f64::from(k * k);
            let eps = t * (1.0 - 1.0 / k2);
            let s = varsigma(eps, k).unwrap();
            prop_assert!(s >= 1.0 / k2 - 1e-12 && s <= 1.0 + 1e-12);
        }

        #[test]
        fn q_range_contains_centre(k in 2u32..6, eps in 0.0f64..1.0) {
            let (lo, hi) = q_range(eps, k).unwrap();
            prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0 + 1e-12);
            let c = (eps + (1.0 - 2.0 * eps) / f64::from(k * k)).clamp(0.0, 1.0);
            prop_assert!(lo - 1e-12 <= c && c <= hi + 1e-12);
        }
    }
}
