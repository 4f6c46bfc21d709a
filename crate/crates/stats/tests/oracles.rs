use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};
use vibrogrid_stats::nonparametric::average_ranks;
use vibrogrid_stats::special::{gamma_p, inc_beta};
use vibrogrid_stats::{
    correct_family, friedman, rm_anova_2way, wilcoxon_signed_rank, CellTable, Correction, Df,
    StatResult,
};

/// Brute force: every one of the 2^n sign assignments of the observed ranks.
fn wilcoxon_enumerated_p(diffs: &[f64]) -> f64 {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let total: f64 = ranks.iter().sum();
    let w_obs: f64 = ranks
        .iter()
        .zip(&nz)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let obs_min = w_obs.min(total - w_obs);
    let n = ranks.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if w.min(total - w) <= obs_min + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

#[test]
fn wilcoxon_exact_matches_enumeration_all_64_patterns() {
    let magnitudes = [0.3, 1.1, 2.0, 2.4, 3.7, 5.2];
    for pattern in 0u32..64 {
        let diffs: Vec<f64> = magnitudes
            .iter()
            .enumerate()
            .map(|(i, m)| if pattern >> i & 1 == 1 { *m } else { -*m })
            .collect();
        let zeros = vec![0.0; 6];
        let got = wilcoxon_signed_rank(&diffs, &zeros).unwrap().p_value;
        let want = wilcoxon_enumerated_p(&diffs);
        assert!(
            (got - want).abs() < 1e-12,
            "pattern {pattern:06b}: {got} vs {want}"
        );
    }
}

#[test]
fn wilcoxon_exact_with_ties_and_zeros_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        // coarse values force ties and zero differences
        let diffs: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-3i32..=3) as f64 / 9.0)
            .collect();
        if diffs.iter().all(|d| *d == 0.0) {
            continue;
        }
        let zeros = vec![0.0; n];
        let got = wilcoxon_signed_rank(&diffs, &zeros).unwrap().p_value;
        let want = wilcoxon_enumerated_p(&diffs);
        assert!((got - want).abs() < 1e-12, "{diffs:?}: {got} vs {want}");
    }
}

/// Conover's general form, computed from ranks counted by comparison.
fn friedman_by_rank_counting(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len();
    let kf = k as f64;
    let mut sums = vec![0.0; k];
    let mut sum_sq_ranks = 0.0;
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            let less = row.iter().filter(|w| *w < v).count() as f64;
            let equal = row.iter().filter(|w| *w == v).count() as f64;
            let r = less + (equal + 1.0) / 2.0;
            sums[j] += r;
            sum_sq_ranks += r * r;
        }
    }
    let centre = n * (kf + 1.0) / 2.0;
    let num: f64 = (kf - 1.0) * sums.iter().map(|s| (s - centre).powi(2)).sum::<f64>();
    let den = sum_sq_ranks - n * kf * (kf + 1.0).powi(2) / 4.0;
    num / den
}

#[test]
fn friedman_matches_independent_rank_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| {
                let mut r = vec![1.0, 2.0, 3.0, 4.0];
                r.shuffle(&mut rng);
                r.into_iter()
                    .map(|v| v * 10.0 + rng.random_range(0.0..1.0_f64))
                    .collect()
            })
            .collect();
        let got = friedman(&rows).unwrap().statistic;
        let want = friedman_by_rank_counting(&rows);
        assert!((got - want).abs() < 1e-9 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn friedman_with_ties_matches_rank_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| {
                (0..3)
                    .map(|_| rng.random_range(0..5) as f64 / 4.0)
                    .collect()
            })
            .collect();
        let got = friedman(&rows).unwrap().statistic;
        let want = friedman_by_rank_counting(&rows);
        if want.is_nan() {
            assert_eq!(got, 0.0);
        } else {
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn distribution_tails_agree_with_statrs() {
    for &df in &[1.0, 2.0, 3.0, 11.0, 22.0, 66.0] {
        let chi = ChiSquared::new(df).unwrap();
        let t = StudentsT::new(0.0, 1.0, df).unwrap();
        for &x in &[0.05, 0.5, 1.0, 2.5, 9.04, 20.0] {
            let ours = vibrogrid_stats::dist::chi2_sf(x, df);
            assert!((ours - chi.sf(x)).abs() < 1e-10, "chi2 df={df} x={x}");
            let ours = vibrogrid_stats::dist::t_sf(x, df);
            assert!((ours - t.sf(x)).abs() < 1e-10, "t df={df} x={x}");
        }
    }
    for &(d1, d2) in &[(2.0, 22.0), (3.0, 33.0), (6.0, 66.0), (1.0, 2.0)] {
        let f = FisherSnedecor::new(d1, d2).unwrap();
        for &x in &[0.1, 0.9, 2.0, 6.53, 15.0] {
            let ours = vibrogrid_stats::dist::f_sf(x, d1, d2);
            assert!((ours - f.sf(x)).abs() < 1e-10, "F({d1},{d2}) x={x}");
        }
    }
}

fn table_from(vals: &[f64], n: usize, a: usize, b: usize) -> CellTable {
    let mut t = CellTable::new(n, a, b);
    for s in 0..n {
        for i in 0..a {
            for j in 0..b {
                t.set(s, i, j, vals[(s * a + i) * b + j]);
            }
        }
    }
    t
}

fn family(ps: &[f64]) -> Vec<StatResult> {
    ps.iter()
        .map(|&p| StatResult::new("x", 0.0, Df::One(1.0), p))
        .collect()
}

proptest! {
    #[test]
    fn incomplete_beta_symmetry(x in 0.0..1.0f64, a in 0.1..40.0f64, b in 0.1..40.0f64) {
        let lhs = inc_beta(x, a, b);
        let rhs = 1.0 - inc_beta(1.0 - x, b, a);
        prop_assert!((lhs - rhs).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&lhs));
    }

    #[test]
    fn incomplete_gamma_monotone(a in 0.1..30.0f64, x in 0.0..50.0f64, dx in 0.0..5.0f64) {
        prop_assert!(gamma_p(a, x + dx) >= gamma_p(a, x) - 1e-14);
    }

    #[test]
    fn anova_shift_invariant(vals in prop::collection::vec(0.5..10.0f64, 36), shift in -5.0..50.0f64) {
        let base = rm_anova_2way(&table_from(&vals, 3, 3, 4), false).unwrap();
        let shifted: Vec<f64> = vals.iter().map(|v| v + shift).collect();
        let moved = rm_anova_2way(&table_from(&shifted, 3, 3, 4), false).unwrap();
        for (x, y) in base.effects().iter().zip(moved.effects()) {
            prop_assert!((x.statistic - y.statistic).abs() <= 1e-6 * x.statistic.abs().max(1.0));
        }
    }

    #[test]
    fn log_anova_scale_invariant(vals in prop::collection::vec(0.5..10.0f64, 36), scale in 0.01..100.0f64) {
        let base = rm_anova_2way(&table_from(&vals, 3, 3, 4), true).unwrap();
        let scaled: Vec<f64> = vals.iter().map(|v| v * scale).collect();
        let moved = rm_anova_2way(&table_from(&scaled, 3, 3, 4), true).unwrap();
        for (x, y) in base.effects().iter().zip(moved.effects()) {
            prop_assert!((x.statistic - y.statistic).abs() <= 1e-6 * x.statistic.abs().max(1.0));
        }
    }

    #[test]
    fn friedman_monotone_row_transform(rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 4), 2..15)) {
        let base = friedman(&rows).unwrap().statistic;
        let transformed: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|v| (v * (1.0 + i as f64)).exp()).collect())
            .collect();
        let moved = friedman(&transformed).unwrap().statistic;
        prop_assert!((base - moved).abs() < 1e-9 * base.max(1.0));
    }

    #[test]
    fn correction_ordering(ps in prop::collection::vec(0.0..1.0f64, 1..12)) {
        let raw = family(&ps);
        let holm = correct_family(&raw, Correction::BonferroniHolm);
        let bonf = correct_family(&raw, Correction::Bonferroni);
        for i in 0..ps.len() {
            prop_assert!(holm[i].p_value >= raw[i].p_value);
            prop_assert!(bonf[i].p_value >= holm[i].p_value);
            prop_assert!(bonf[i].p_value <= 1.0);
        }
    }
}
