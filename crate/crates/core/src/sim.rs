//! A simulated participant for closed-loop runs.
//!
//! Perception works per axis segment. The segment's motors may be swapped
//! with their opposites, a discrete pulse count may slip by one, and each
//! continuous pulse length picks up Gaussian jitter. The perturbed segment is
//! decoded like a real train. Anything the strict decoder rejects is read
//! leniently: any opposite-motor pair means zero and magnitudes clamp into
//! `1..=max_index`. Reaches land at the interpreted centre plus isotropic
//! Gaussian noise.

use crate::encoding::{decode_segment, nearest_bin};
use crate::encoding::{
    index_to_position, train_duration, Axis, AxisCode, EncodingParams, EncodingScheme, GridSpec,
    Point, PulseEvent, PulseTrain, TargetIndex,
};
use crate::experiment::{ExperimentError, Session, SessionPlan, TrialRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid noise profile: {0}")]
pub struct ProfileError(pub &'static str);

/// Noise model of one simulated participant, read from JSON.
///
/// The response-time fields only shape `elapsed_ms`; they leave accuracy
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseProfile {
    pub duration_jitter_sd_ms: f64,
    pub count_miss_prob: f64,
    pub motor_confusion_prob: f64,
    pub reach_sd_cm: f64,
    pub seed: u64,
    pub replay_prob: f64,
    pub response_median_ms: f64,
    pub response_log_sd: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            duration_jitter_sd_ms: 0.0,
            count_miss_prob: 0.0,
            motor_confusion_prob: 0.0,
            reach_sd_cm: 0.0,
            seed: 0,
            replay_prob: 0.0,
            response_median_ms: 4000.0,
            response_log_sd: 0.0,
        }
    }
}

impl NoiseProfile {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.count_miss_prob)
            || !prob(self.motor_confusion_prob)
            || !prob(self.replay_prob)
        {
            return Err(ProfileError("probabilities must lie in [0, 1]"));
        }
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !nonneg(self.duration_jitter_sd_ms)
            || !nonneg(self.reach_sd_cm)
            || !nonneg(self.response_log_sd)
        {
            return Err(ProfileError("deviations must be nonnegative"));
        }
        if !(self.response_median_ms > 0.0 && self.response_median_ms.is_finite()) {
            return Err(ProfileError("response_median_ms must be positive"));
        }
        Ok(())
    }
}

/// Participant state: a profile plus its own random stream.
#[derive(Debug, Clone)]
pub struct SimulatedParticipant {
    profile: NoiseProfile,
    rng: ChaCha8Rng,
}

impl SimulatedParticipant {
    pub fn new(profile: NoiseProfile) -> Result<Self, ProfileError> {
        Self::with_stream(profile, 0)
    }

    /// Independent participants sharing a profile use distinct streams.
    pub fn with_stream(profile: NoiseProfile, stream: u64) -> Result<Self, ProfileError> {
        profile.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
        rng.set_stream(stream);
        Ok(Self { profile, rng })
    }

    pub fn profile(&self) -> &NoiseProfile {
        &self.profile
    }

    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.random_bool(p)
    }

    fn gaussian(&mut self, sd: f64) -> f64 {
        if sd == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, sd)
            .expect("sd validated")
            .sample(&mut self.rng)
    }

    fn perceive_segment(
        &mut self,
        axis: Axis,
        code: AxisCode,
        events: &[PulseEvent],
        max_index: i32,
        params: &EncodingParams,
    ) -> i32 {
        let mut seen: Vec<PulseEvent> = events.to_vec();
        if self.chance(self.profile.motor_confusion_prob) {
            for e in &mut seen {
                e.motor = e.motor.opposite();
            }
        }
        let zero_pattern = seen.len() == 2 && seen[0].motor == seen[1].motor.opposite();
        if !zero_pattern {
            match code {
                AxisCode::Discrete => {
                    if self.chance(self.profile.count_miss_prob) {
                        if self.rng.random_bool(0.5) {
                            let mut extra = *seen.last().expect("segments are never empty");
                            extra.start_ms += params.discrete_pulse_ms + params.discrete_gap_ms;
                            seen.push(extra);
                        } else {
                            seen.pop();
                        }
                    }
                }
                AxisCode::Continuous => {
                    let sd = self.profile.duration_jitter_sd_ms;
                    for e in &mut seen {
                        e.duration_ms = (e.duration_ms + self.gaussian(sd)).max(1.0);
                    }
                }
            }
        }
        decode_segment(axis, code, &seen, max_index, params)
            .unwrap_or_else(|_| lenient_segment(axis, code, &seen, events, max_index, params))
    }

    /// Noisy reading of a train: the coordinate the participant would report.
    pub fn perceive(
        &mut self,
        train: &PulseTrain,
        scheme: EncodingScheme,
        grid: &GridSpec,
    ) -> TargetIndex {
        let split = train
            .events
            .iter()
            .position(|e| e.motor.axis() == Axis::Horizontal)
            .unwrap_or(train.events.len());
        let (vertical, horizontal) = train.events.split_at(split);
        let max = grid.max_index();
        let params = train.params;
        let iy = self.perceive_segment(Axis::Vertical, scheme.vertical, vertical, max, &params);
        let ix = self.perceive_segment(
            Axis::Horizontal,
            scheme.horizontal,
            horizontal,
            max,
            &params,
        );
        TargetIndex::new(ix.clamp(-max, max), iy.clamp(-max, max))
    }

    pub fn reach(&mut self, grid: &GridSpec, interpretation: TargetIndex) -> Point {
        let centre = index_to_position(grid, interpretation)
            .expect("interpretations are clamped into the grid");
        let sd = self.profile.reach_sd_cm;
        let dx = self.gaussian(sd);
        let dy = self.gaussian(sd);
        Point::new(centre.x_cm + dx, centre.y_cm + dy)
    }

    /// Time from the end of the first playback to the selection click.
    pub fn response_time_ms(&mut self) -> f64 {
        let z = self.gaussian(1.0);
        self.profile.response_median_ms * (self.profile.response_log_sd * z).exp()
    }

    pub fn wants_replay(&mut self) -> bool {
        self.chance(self.profile.replay_prob)
    }
}

/// Fallback reading of a segment the strict decoder rejected.
fn lenient_segment(
    axis: Axis,
    code: AxisCode,
    seen: &[PulseEvent],
    original: &[PulseEvent],
    max_index: i32,
    params: &EncodingParams,
) -> i32 {
    let Some(first) = seen.first().or(original.first()) else {
        return 0;
    };
    if seen.len() == 2 && seen[0].motor == seen[1].motor.opposite() {
        return 0;
    }
    let sign = if first.motor == axis.positive_motor() {
        1
    } else {
        -1
    };
    let magnitude = match code {
        AxisCode::Discrete => seen.len() as i32,
        AxisCode::Continuous => {
            nearest_bin(seen.iter().map(|e| e.duration_ms).sum(), max_index, params)
        }
    };
    sign * magnitude.clamp(1, max_index)
}

/// One simulated trial: the spoken interpretation and the reach point.
pub fn simulate_trial(
    train: &PulseTrain,
    scheme: EncodingScheme,
    grid: &GridSpec,
    participant: &mut SimulatedParticipant,
) -> (TargetIndex, Point) {
    let interpretation = participant.perceive(train, scheme, grid);
    let point = participant.reach(grid, interpretation);
    (interpretation, point)
}

/// Runs a whole plan through the trial state machine on virtual time.
///
/// The participant's random stream is the plan's participant index, so a
/// cohort simulated with one profile gives every participant distinct noise.
pub fn simulate_session(
    plan: &SessionPlan,
    params: &EncodingParams,
    profile: &NoiseProfile,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut participant =
        SimulatedParticipant::with_stream(*profile, plan.participant_index as u64)
            .map_err(|e| ExperimentError::Design(e.to_string()))?;
    let mut session = Session::new(plan.clone(), *params)?;
    let mut now = 0.0;
    while session.position().is_some() {
        let (condition, _) = session.current().expect("position implies a trial");
        let grid = condition.grid()?;
        session.start_trial(now)?;
        let train = session.send_stimulus(now)?;
        let playback_end = now + train_duration(&train)?;
        let mut responded_from = playback_end;
        if participant.wants_replay() {
            let replay = session.replay_stimulus(playback_end)?;
            responded_from = playback_end + train_duration(&replay)?;
        }
        let (interpretation, point) =
            simulate_trial(&train, condition.scheme, &grid, &mut participant);
        let selected_at = responded_from.max(playback_end + participant.response_time_ms());
        session.record_interpretation((responded_from + selected_at) / 2.0, interpretation)?;
        session.record_selection(selected_at, point)?;
        session.finalize(selected_at)?;
        now = session.hold_until_ms().unwrap_or(selected_at);
    }
    Ok(session.records().to_vec())
}

/// Simulates every plan with the same profile, in plan order.
pub fn simulate_cohort(
    plans: &[SessionPlan],
    params: &EncodingParams,
    profile: &NoiseProfile,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut out = Vec::with_capacity(plans.iter().map(SessionPlan::trial_count).sum());
    for plan in plans {
        out.extend(simulate_session(plan, params, profile)?);
    }
    Ok(out)
}
