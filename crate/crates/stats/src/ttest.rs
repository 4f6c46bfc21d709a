use crate::dist::t_two_sided;
use crate::{mean, sample_sd, Df, StatResult, StatsError};

/// Two-sided paired t test on `a - b` with n - 1 degrees of freedom.
///
/// Identical samples give t = 0, p = 1. A constant nonzero difference has
/// zero variance and is reported as t = +/-inf, p = 0.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let sd = sample_sd(&d);
    let df = (n - 1) as f64;
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(StatResult::new("paired_t", 0.0, Df::One(df), 1.0));
        }
        let t = f64::INFINITY.copysign(m);
        return Ok(StatResult::new("paired_t", t, Df::One(df), 0.0).with_note("zero variance"));
    }
    let t = m / (sd / (n as f64).sqrt());
    Ok(StatResult::new(
        "paired_t",
        t,
        Df::One(df),
        t_two_sided(t, df),
    ))
}
