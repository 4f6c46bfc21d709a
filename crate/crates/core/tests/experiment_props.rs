use proptest::prelude::*;
use std::collections::HashMap;
use vibrogrid_core::encoding::{EncodingParams, Point, TargetIndex};
use vibrogrid_core::experiment::{
    classify_error, generate_plans, load_log, Condition, ExperimentError, Phase, PlanConfig,
    RegionId, Session, TrialLog, INTER_TRIAL_HOLD_MS,
};

#[derive(Debug, Clone)]
enum Call {
    Wait(f64),
    Start,
    Stimulus,
    Replay,
    Interpret(i32, i32),
    Select(f64, f64),
    Finalize,
}

fn arb_call() -> impl Strategy<Value = Call> {
    prop_oneof![
        (0.0f64..3000.0).prop_map(Call::Wait),
        Just(Call::Start),
        Just(Call::Stimulus),
        Just(Call::Replay),
        (-5i32..=5, -5i32..=5).prop_map(|(x, y)| Call::Interpret(x, y)),
        (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| Call::Select(x, y)),
        Just(Call::Finalize),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_calls_never_corrupt_records(seed in any::<u64>(), calls in prop::collection::vec(arb_call(), 1..400)) {
        let plan = generate_plans(PlanConfig::new(12, seed)).unwrap().remove((seed % 12) as usize);
        let mut s = Session::new(plan.clone(), EncodingParams::default()).unwrap();
        let mut now = 0.0;
        let mut finalized = 0;
        for call in calls {
            let before = s.phase();
            let result = match call {
                Call::Wait(dt) => { now += dt; Ok(()) }
                Call::Start => s.start_trial(now),
                Call::Stimulus => s.send_stimulus(now).map(|_| ()),
                Call::Replay => s.replay_stimulus(now).map(|_| ()),
                Call::Interpret(x, y) => s.record_interpretation(now, TargetIndex::new(x, y)),
                Call::Select(x, y) => s.record_selection(now, Point::new(x, y)),
                Call::Finalize => s.finalize(now).map(|_| finalized += 1),
            };
            if let Err(e) = result {
                prop_assert_eq!(s.phase(), before, "failed call {:?} changed phase", e);
            }
        }
        prop_assert_eq!(s.records().len(), finalized);
        for r in s.records() {
            let (condition, target) = plan.target(r.block_index, r.trial_index).unwrap();
            let grid = condition.grid().unwrap();
            prop_assert_eq!(r.condition, condition);
            prop_assert_eq!(r.target, target);
            prop_assert!(r.stimulus_repeats <= 1);
            prop_assert!(r.elapsed_ms >= 0.0);
            prop_assert!(r.interpretation.is_some_and(|i| grid.contains(i)));
            prop_assert_eq!(r.outcome, classify_error(r.target, r.interpretation, r.selection_point, &grid).unwrap());
        }
        let seqs: Vec<u64> = s.events().iter().map(|e| e.seq).collect();
        prop_assert!(seqs.iter().enumerate().all(|(i, q)| *q == i as u64));
    }

    #[test]
    fn plans_are_balanced(seed in any::<u64>()) {
        let plans = generate_plans(PlanConfig::new(24, seed)).unwrap();
        let mut density_pos: HashMap<(usize, u32), usize> = HashMap::new();
        let mut scheme_pos: HashMap<(usize, Condition), usize> = HashMap::new();
        for plan in &plans {
            prop_assert_eq!(plan.blocks.len(), 12);
            prop_assert_eq!(plan.trial_count(), 108);
            let mut conditions: Vec<Condition> = plan.blocks.iter().map(|b| b.condition).collect();
            for (i, b) in plan.blocks.iter().enumerate() {
                let grid = b.condition.grid().unwrap();
                let mut regions: Vec<RegionId> = b.targets.iter().map(|t| RegionId::of(*t)).collect();
                regions.sort();
                prop_assert_eq!(regions, RegionId::ALL.to_vec());
                prop_assert!(b.targets.iter().all(|t| grid.contains(*t)));
                if i % 4 == 0 {
                    *density_pos.entry((i / 4, b.condition.density)).or_default() += 1;
                }
                let within = Condition::new(0, b.condition.scheme);
                *scheme_pos.entry((i % 4, within)).or_default() += 1;
            }
            conditions.sort_by_key(|c| (c.density, c.scheme.to_string()));
            conditions.dedup();
            prop_assert_eq!(conditions.len(), 12);
        }
        prop_assert_eq!(density_pos.len(), 9);
        prop_assert!(density_pos.values().all(|&n| n == 8));
        prop_assert_eq!(scheme_pos.len(), 16);
        prop_assert!(scheme_pos.values().all(|&n| n == 24 * 3 / 4));
    }
}

#[test]
fn same_seed_same_plans() {
    assert_eq!(
        generate_plans(PlanConfig::new(12, 9)).unwrap(),
        generate_plans(PlanConfig::new(12, 9)).unwrap()
    );
    assert_ne!(
        generate_plans(PlanConfig::new(12, 9)).unwrap(),
        generate_plans(PlanConfig::new(12, 10)).unwrap()
    );
}

#[test]
fn bad_cohort_sizes() {
    assert!(matches!(
        generate_plans(PlanConfig::new(10, 1)),
        Err(ExperimentError::Design(_))
    ));
    assert!(matches!(
        generate_plans(PlanConfig::new(0, 1)),
        Err(ExperimentError::Design(_))
    ));
    let padded = generate_plans(PlanConfig {
        participants: 10,
        seed: 1,
        pad_incomplete: true,
    })
    .unwrap();
    assert_eq!(padded.len(), 10);
    assert_eq!(
        padded,
        generate_plans(PlanConfig::new(12, 1)).unwrap()[..10]
    );
}

fn run_trial(s: &mut Session, now: &mut f64) {
    s.start_trial(*now).unwrap();
    s.send_stimulus(*now).unwrap();
    let (condition, target) = s.current().unwrap();
    let grid = condition.grid().unwrap();
    let centre = vibrogrid_core::encoding::index_to_position(&grid, target).unwrap();
    s.record_interpretation(*now + 2000.0, target).unwrap();
    s.record_selection(*now + 3000.0, centre).unwrap();
    s.finalize(*now + 3000.0).unwrap();
    *now += 3000.0 + INTER_TRIAL_HOLD_MS;
}

#[test]
fn interrupted_session_resumes_from_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p01.jsonl");
    let plan = generate_plans(PlanConfig::new(12, 3)).unwrap().remove(0);
    let mut now = 0.0;
    {
        let (log, loaded) = TrialLog::open(&path).unwrap();
        let mut s = Session::new(plan.clone(), EncodingParams::default())
            .unwrap()
            .with_log(log, loaded.records)
            .unwrap();
        for _ in 0..40 {
            run_trial(&mut s, &mut now);
        }
    }
    let (log, loaded) = TrialLog::open(&path).unwrap();
    assert_eq!(loaded.records.len(), 40);
    let mut s = Session::new(plan.clone(), EncodingParams::default())
        .unwrap()
        .with_log(log, loaded.records)
        .unwrap();
    assert_eq!(s.position(), Some((4, 4)));
    while s.phase() != Phase::Complete {
        run_trial(&mut s, &mut now);
    }
    let all = load_log(&path).unwrap().records;
    assert_eq!(all.len(), 108);
    assert!(all
        .iter()
        .all(|r| r.outcome == vibrogrid_core::experiment::Outcome::Correct));

    let other = generate_plans(PlanConfig::new(12, 4)).unwrap().remove(0);
    let (log, loaded) = TrialLog::open(&path).unwrap();
    assert!(matches!(
        Session::new(other, EncodingParams::default())
            .unwrap()
            .with_log(log, loaded.records),
        Err(ExperimentError::Integrity(_))
    ));
}
