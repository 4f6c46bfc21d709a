//! Distribution tails built on [`crate::special`].

use crate::special::{erfc, gamma_q, inc_beta};
use std::f64::consts::SQRT_2;

/// Upper tail P(X > x) of the chi-squared distribution.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    inc_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0)
}

/// Upper tail P(T > t) of Student's t.
pub fn t_sf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let tail = 0.5 * inc_beta(df / (df + t * t), df / 2.0, 0.5);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    1.0 - t_sf(t, df)
}

/// Two-sided p-value for an observed t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    (2.0 * t_sf(t.abs(), df)).min(1.0)
}

/// Quantile of Student's t, found by bisection on the CDF.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || df <= 0.0 {
        return f64::NAN;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -t_quantile(1.0 - p, df);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_cdf(hi, df) < p {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_probe_value() {
        // df = 2 has the closed form exp(-x / 2)
        let p = chi2_sf(9.04, 2.0);
        assert!((p - (-4.52f64).exp()).abs() < 1e-14);
        assert!((p - 0.0109).abs() < 1e-4);
        assert!((chi2_sf(10.23, 3.0) - 0.016_708_903_542_050_544).abs() < 1e-12);
    }

    #[test]
    fn f_tail_reference_values() {
        assert!((f_sf(6.53, 2.0, 22.0) - 0.005_939_070_214_040_119).abs() < 1e-12);
        assert!((f_sf(1.0, 3.0, 33.0) - 0.405_071_692_335_583_16).abs() < 1e-12);
        assert!((f_sf(2.5, 6.0, 66.0) - 0.030_600_003_637_838_88).abs() < 1e-12);
        assert_eq!(f_sf(0.0, 2.0, 22.0), 1.0);
        assert_eq!(f_sf(f64::INFINITY, 2.0, 22.0), 0.0);
    }

    #[test]
    fn t_reference_values() {
        assert!((t_sf(2.2, 11.0) - 0.025_043_055_490_902_084).abs() < 1e-12);
        assert!((t_quantile(0.975, 11.0) - 2.200_985_160_082_949).abs() < 1e-10);
        assert!((t_quantile(0.975, 1.0) - 12.706_204_736_432_095).abs() < 1e-9);
        assert!((t_quantile(0.975, 2.0) - 4.302_652_729_696_142).abs() < 1e-10);
        assert!((t_quantile(0.025, 2.0) + 4.302_652_729_696_142).abs() < 1e-10);
        assert_eq!(t_two_sided(0.0, 5.0), 1.0);
    }

    #[test]
    fn normal_reference_values() {
        assert!((normal_sf(1.96) - 0.024_997_895_148_220_435).abs() < 1e-13);
        assert!((normal_cdf(-3.1) - 0.000_967_603_213_218_356_3).abs() < 1e-14);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
    }
}
