//! A fixed-seed simulated cohort analysed here and, independently, with
//! pandas/scipy/statsmodels from the exported trial log. The reference
//! numbers below are that script's output.

use vibrogrid_core::analysis::{analyze, AnalysisOptions};
use vibrogrid_core::encoding::EncodingParams;
use vibrogrid_core::experiment::{generate_plans, PlanConfig, TrialRecord};
use vibrogrid_core::sim::{simulate_cohort, NoiseProfile};
use vibrogrid_stats::Df;

fn cohort() -> Vec<TrialRecord> {
    let plans = generate_plans(PlanConfig::new(12, 2024)).unwrap();
    let profile = NoiseProfile {
        duration_jitter_sd_ms: 150.0,
        count_miss_prob: 0.06,
        motor_confusion_prob: 0.03,
        reach_sd_cm: 3.5,
        seed: 77,
        replay_prob: 0.15,
        response_median_ms: 4300.0,
        response_log_sd: 0.25,
    };
    simulate_cohort(&plans, &EncodingParams::default(), &profile).unwrap()
}

fn close(got: f64, want: f64, tol: f64) {
    assert!((got - want).abs() <= tol, "got {got}, want {want}");
}

#[test]
fn matches_independent_recomputation() {
    let r = analyze(&cohort(), AnalysisOptions::default()).unwrap();
    assert_eq!(
        (
            r.outcomes.correct,
            r.outcomes.positional_error,
            r.outcomes.interpretation_error
        ),
        (1022, 142, 132)
    );

    let acc = [
        (0.949074074074074, 0.021062792514043954),
        (0.821759259259259, 0.047868149632858695),
        (0.594907407407407, 0.044176344875971975),
    ];
    let time = [4.4084657180657105, 4.505621724534113, 4.383304539502042];
    for (m, ((a, ci), t)) in r.summary.by_density.iter().zip(acc.iter().zip(time)) {
        close(m.accuracy.mean, *a, 1e-12);
        close(m.accuracy.ci95_halfwidth.unwrap(), *ci, 1e-9);
        close(m.mean_time_s.mean, t, 1e-12);
    }
    let scheme_acc = [
        ("VDHD", 0.787037037037037),
        ("VDHC", 0.79320987654321),
        ("VCHD", 0.814814814814815),
        ("VCHC", 0.759259259259259),
    ];
    for (m, (name, a)) in r.summary.by_scheme.iter().zip(scheme_acc) {
        assert_eq!(m.level, name);
        close(m.accuracy.mean, a, 1e-12);
    }

    let anova = [
        (1.851109859866766, 0.1807059855779603),
        (1.2163008576326984, 0.3191789681819742),
        (0.5569499794758458, 0.7628533323576431),
    ];
    for (res, (f, p)) in r.anova.iter().zip(anova) {
        close(res.statistic, f, 1e-9);
        close(res.p_value, p, 1e-9);
    }
    assert_eq!(r.anova[0].df, Df::Pair(2.0, 22.0));

    close(r.friedman[0].statistic, 22.166666666666657, 1e-9);
    close(r.friedman[0].p_value, 1.5366306526875732e-05, 1e-12);
    close(r.friedman[1].statistic, 1.8157894736842346, 1e-9);
    close(r.friedman[1].p_value, 0.6115050119896661, 1e-9);

    // Bonferroni over the three density pairs
    let t57 = r
        .time_posthoc
        .iter()
        .find(|x| x.test_name == "paired_t density 5x5 vs 7x7")
        .unwrap();
    close(t57.statistic, -1.269424248421639, 1e-9);
    close(t57.p_value, (3.0 * 0.23048955216117278f64).min(1.0), 1e-9);
    let t79 = r
        .time_posthoc
        .iter()
        .find(|x| x.test_name == "paired_t density 7x7 vs 9x9")
        .unwrap();
    close(t79.statistic, 1.6787212038534174, 1e-9);
    close(t79.p_value, 3.0 * 0.12135514227196323, 1e-9);
}
