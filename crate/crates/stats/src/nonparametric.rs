//! Rank-based tests: Friedman and Wilcoxon signed-rank.

use crate::dist::{chi2_sf, normal_sf};
use crate::{Df, StatResult, StatsError};

/// Largest number of nonzero differences for which the Wilcoxon null
/// distribution is computed exactly.
pub const WILCOXON_EXACT_MAX_N: usize = 20;

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Sizes of the tie groups in `values`.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

/// Friedman test over a subjects x conditions matrix.
///
/// Ranks within each row (ties get average ranks) and applies the usual tie
/// correction. A matrix in which every row is fully tied yields a statistic
/// of 0 with p = 1.
pub fn friedman(rows: &[Vec<f64>]) -> Result<StatResult, StatsError> {
    let n = rows.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let k = rows[0].len();
    if k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: k });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != k) {
        return Err(StatsError::LengthMismatch {
            left: k,
            right: bad.len(),
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in rows {
        for (sum, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *sum += r;
        }
        tie_term += tie_groups(row)
            .into_iter()
            .map(|t| (t * t * t - t) as f64)
            .sum::<f64>();
    }
    let df = Df::One(kf - 1.0);
    let denom = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    if denom <= 1e-12 {
        return Ok(StatResult::new("friedman", 0.0, df, 1.0).with_note("all rows tied"));
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0);
    let stat = (raw / denom).max(0.0);
    Ok(StatResult::new(
        "friedman",
        stat,
        df,
        chi2_sf(stat, kf - 1.0),
    ))
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped before ranking. With at most
/// [`WILCOXON_EXACT_MAX_N`] nonzero differences the p-value comes from the
/// exact sign-flip distribution of the observed (possibly tied) ranks;
/// beyond that a continuity-corrected normal approximation with tie-adjusted
/// variance is used. The reported statistic is min(W+, W-).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(StatsError::Degenerate("all paired differences are zero"));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let stat = w_plus.min(w_minus);
    let df = Df::One(n as f64);

    if n <= WILCOXON_EXACT_MAX_N {
        // average ranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let p = exact_sign_flip_p(&doubled, (stat * 2.0).round() as usize);
        return Ok(StatResult::new("wilcoxon_signed_rank", stat, df, p).with_note("exact"));
    }

    let nf = n as f64;
    let tie_adj: f64 = tie_groups(&abs)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
    let mean = total / 2.0;
    let dev = ((w_plus - mean).abs() - 0.5).max(0.0);
    let z = dev / var.sqrt();
    let p = (2.0 * normal_sf(z)).min(1.0);
    Ok(StatResult::new("wilcoxon_signed_rank", stat, df, p).with_note("normal approximation"))
}

/// P(min(W+, W-) <= observed) under random signs, via subset-sum counts over
/// the doubled ranks. Equivalent to enumerating all 2^n sign assignments.
fn exact_sign_flip_p(doubled_ranks: &[usize], observed_min: usize) -> f64 {
    let total: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0.0_f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(doubled_ranks.len() as i32);
    // The W+ distribution is symmetric about total / 2, so the two-sided
    // tail is the mass at or below the observed minimum plus its mirror.
    let lower: f64 = counts[..=observed_min.min(total)].iter().sum();
    let upper: f64 = counts[total.saturating_sub(observed_min)..].iter().sum();
    if 2 * observed_min >= total {
        1.0
    } else {
        ((lower + upper) / all).min(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]),
            vec![2.0, 3.5, 3.5, 1.0]
        );
        assert_eq!(average_ranks(&[1.0, 1.0, 1.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn friedman_maximal_statistic() {
        let rows = vec![vec![1.0, 2.0, 3.0]; 12];
        let r = friedman(&rows).unwrap();
        assert!((r.statistic - 24.0).abs() < 1e-12);
        assert!(r.p_value < 1e-4);
        assert_eq!(r.df, Df::One(2.0));
    }

    #[test]
    fn friedman_constant_matrix() {
        let rows = vec![vec![0.5; 4]; 12];
        let r = friedman(&rows).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn friedman_rejects_bad_shapes() {
        assert!(friedman(&[vec![1.0, 2.0]]).is_err());
        assert!(friedman(&[vec![1.0], vec![2.0]]).is_err());
        assert!(matches!(
            friedman(&[vec![1.0, 2.0], vec![1.0]]),
            Err(StatsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn wilcoxon_all_zero_is_degenerate() {
        let a = [1.0, 2.0, 3.0];
        assert!(matches!(
            wilcoxon_signed_rank(&a, &a),
            Err(StatsError::Degenerate(_))
        ));
    }

    #[test]
    fn wilcoxon_small_exact() {
        // all positive, n = 6: only one of 64 sign patterns is as extreme per side
        let a = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let b = [1.0; 6];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_large_uses_normal() {
        let a: Vec<f64> = (0..30)
            .map(|i| i as f64 * 0.1 + if i % 3 == 0 { 1.0 } else { 0.0 })
            .collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 * 0.1 + 0.2).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.note.as_deref(), Some("normal approximation"));
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }
}
