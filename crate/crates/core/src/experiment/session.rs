//! The trial state machine.
//!
//! ```text
//! Idle --start_trial--> Started --send_stimulus--> Stimulated
//!   ^                                   | replay (once)  |
//!   |                                   +<---------------+
//!   |                     record_interpretation
//!   |                                   v
//!   +--finalize (2 s hold)-- Selected <--record_selection-- Interpreted
//! ```
//!
//! Callers pass the current time in milliseconds to every transition, so a
//! session runs identically under a virtual clock.

use super::log::TrialLog;
use super::{classify_error, Condition, ExperimentError, SessionPlan, TrialRecord};
use crate::encoding::{
    encode_target, nearest_target, train_duration, EncodingParams, GridSpec, Point, PulseTrain,
    TargetIndex,
};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const INTER_TRIAL_HOLD_MS: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Started,
    Stimulated,
    Interpreted,
    Selected,
    Complete,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Idle => "idle",
            Phase::Started => "started",
            Phase::Stimulated => "stimulated",
            Phase::Interpreted => "interpreted",
            Phase::Selected => "selected",
            Phase::Complete => "complete",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    TrialStarted {
        block_index: usize,
        trial_index: usize,
        condition: Condition,
        target: TargetIndex,
    },
    StimulusSent {
        replay: bool,
        playback_end_ms: f64,
    },
    InterpretationRecorded {
        interpretation: TargetIndex,
    },
    SelectionRecorded {
        point: Point,
        selected_target: TargetIndex,
        hit: bool,
    },
    TrialFinalized {
        record: TrialRecord,
        hold_until_ms: f64,
    },
    SessionComplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub at_ms: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
struct ActiveTrial {
    condition: Condition,
    grid: GridSpec,
    target: TargetIndex,
    repeats: u8,
    timer_start_ms: Option<f64>,
    interpretation: Option<TargetIndex>,
    selection: Option<(Point, f64)>,
}

pub struct Session {
    plan: SessionPlan,
    params: EncodingParams,
    block: usize,
    trial: usize,
    phase: Phase,
    active: Option<ActiveTrial>,
    hold_until_ms: f64,
    records: Vec<TrialRecord>,
    events: Vec<SessionEvent>,
    log: Option<TrialLog>,
}

impl Session {
    pub fn new(plan: SessionPlan, params: EncodingParams) -> Result<Self, ExperimentError> {
        params.validate()?;
        let mut session = Self {
            plan,
            params,
            block: 0,
            trial: 0,
            phase: Phase::Idle,
            active: None,
            hold_until_ms: f64::NEG_INFINITY,
            records: Vec::new(),
            events: Vec::new(),
            log: None,
        };
        session.skip_empty_blocks();
        Ok(session)
    }

    /// Attaches an append-only log and replays the records already in it.
    ///
    /// Every stored record must match the plan position it claims, in order.
    pub fn with_log(
        mut self,
        log: TrialLog,
        existing: Vec<TrialRecord>,
    ) -> Result<Self, ExperimentError> {
        if !self.records.is_empty() {
            return Err(ExperimentError::Integrity(
                "session already has records".into(),
            ));
        }
        for record in existing {
            let (block, trial) = self.position().ok_or_else(|| {
                ExperimentError::Integrity("log holds more trials than the plan".into())
            })?;
            let (condition, target) = self
                .plan
                .target(block, trial)
                .expect("position is in range");
            let matches = record.participant_id == self.plan.participant_id
                && record.block_index == block
                && record.trial_index == trial
                && record.condition == condition
                && record.target == target;
            if !matches {
                return Err(ExperimentError::Integrity(format!(
                    "record for block {} trial {} does not match plan position ({block}, {trial})",
                    record.block_index, record.trial_index
                )));
            }
            self.records.push(record);
            self.advance();
        }
        self.log = Some(log);
        Ok(self)
    }

    pub fn plan(&self) -> &SessionPlan {
        &self.plan
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn hold_until_ms(&self) -> Option<f64> {
        self.hold_until_ms.is_finite().then_some(self.hold_until_ms)
    }

    /// `(block, trial)` of the current or next trial; `None` once complete.
    pub fn position(&self) -> Option<(usize, usize)> {
        (self.phase != Phase::Complete).then_some((self.block, self.trial))
    }

    pub fn current(&self) -> Option<(Condition, TargetIndex)> {
        let (b, t) = self.position()?;
        self.plan.target(b, t)
    }

    pub fn replay_used(&self) -> bool {
        self.active.as_ref().is_some_and(|a| a.repeats > 0)
    }

    pub fn timer_start_ms(&self) -> Option<f64> {
        self.active.as_ref().and_then(|a| a.timer_start_ms)
    }

    pub fn interpretation(&self) -> Option<TargetIndex> {
        self.active.as_ref().and_then(|a| a.interpretation)
    }

    fn expect(&self, action: &'static str, phase: Phase) -> Result<(), ExperimentError> {
        if self.phase == Phase::Complete {
            return Err(ExperimentError::SessionComplete);
        }
        if self.phase != phase {
            return Err(ExperimentError::ProtocolOrder {
                action,
                phase: self.phase,
            });
        }
        Ok(())
    }

    fn emit(&mut self, at_ms: f64, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(SessionEvent { seq, at_ms, kind });
    }

    fn active(&mut self) -> &mut ActiveTrial {
        self.active.as_mut().expect("phase implies an active trial")
    }

    pub fn start_trial(&mut self, now_ms: f64) -> Result<(), ExperimentError> {
        self.expect("start_trial", Phase::Idle)?;
        if now_ms < self.hold_until_ms {
            return Err(ExperimentError::HoldActive {
                remaining_ms: self.hold_until_ms - now_ms,
            });
        }
        let (condition, target) = self.current().expect("idle session has a next trial");
        self.active = Some(ActiveTrial {
            condition,
            grid: condition.grid()?,
            target,
            repeats: 0,
            timer_start_ms: None,
            interpretation: None,
            selection: None,
        });
        self.phase = Phase::Started;
        let (block_index, trial_index) = (self.block, self.trial);
        self.emit(
            now_ms,
            EventKind::TrialStarted {
                block_index,
                trial_index,
                condition,
                target,
            },
        );
        Ok(())
    }

    fn stimulus(&self) -> Result<PulseTrain, ExperimentError> {
        let a = self.active.as_ref().expect("phase implies an active trial");
        Ok(encode_target(
            a.target,
            a.condition.scheme,
            &a.grid,
            &self.params,
        )?)
    }

    /// Returns the train to play; the response timer starts when it ends.
    pub fn send_stimulus(&mut self, now_ms: f64) -> Result<PulseTrain, ExperimentError> {
        self.expect("send_stimulus", Phase::Started)?;
        let train = self.stimulus()?;
        let playback_end_ms = now_ms + train_duration(&train)?;
        self.active().timer_start_ms = Some(playback_end_ms);
        self.phase = Phase::Stimulated;
        self.emit(
            now_ms,
            EventKind::StimulusSent {
                replay: false,
                playback_end_ms,
            },
        );
        Ok(train)
    }

    /// Plays the stimulus a second time. The timer keeps running.
    pub fn replay_stimulus(&mut self, now_ms: f64) -> Result<PulseTrain, ExperimentError> {
        self.expect("replay_stimulus", Phase::Stimulated)?;
        if self.active().repeats >= 1 {
            return Err(ExperimentError::ReplayLimit);
        }
        let train = self.stimulus()?;
        let playback_end_ms = now_ms + train_duration(&train)?;
        self.active().repeats = 1;
        self.emit(
            now_ms,
            EventKind::StimulusSent {
                replay: true,
                playback_end_ms,
            },
        );
        Ok(train)
    }

    pub fn record_interpretation(
        &mut self,
        now_ms: f64,
        interpretation: TargetIndex,
    ) -> Result<(), ExperimentError> {
        self.expect("record_interpretation", Phase::Stimulated)?;
        self.active().grid.check(interpretation)?;
        self.active().interpretation = Some(interpretation);
        self.phase = Phase::Interpreted;
        self.emit(now_ms, EventKind::InterpretationRecorded { interpretation });
        Ok(())
    }

    pub fn record_selection(&mut self, now_ms: f64, point: Point) -> Result<(), ExperimentError> {
        self.expect("record_selection", Phase::Interpreted)?;
        let active = self.active();
        active.selection = Some((point, now_ms));
        let hit = nearest_target(&active.grid, point);
        let hit_target = hit.hit && hit.target == active.target;
        self.phase = Phase::Selected;
        self.emit(
            now_ms,
            EventKind::SelectionRecorded {
                point,
                selected_target: hit.target,
                hit: hit_target,
            },
        );
        Ok(())
    }

    /// Classifies the trial, appends it to the log and arms the inter-trial hold.
    pub fn finalize(&mut self, now_ms: f64) -> Result<TrialRecord, ExperimentError> {
        self.expect("finalize", Phase::Selected)?;
        let a = self.active.as_ref().expect("phase implies an active trial");
        let (point, selected_at) = a.selection.expect("selected phase has a selection");
        let outcome = classify_error(a.target, a.interpretation, point, &a.grid)?;
        let timer_start = a.timer_start_ms.expect("stimulus precedes selection");
        let record = TrialRecord {
            participant_id: self.plan.participant_id.clone(),
            block_index: self.block,
            trial_index: self.trial,
            condition: a.condition,
            target: a.target,
            stimulus_repeats: a.repeats,
            interpretation: a.interpretation,
            selection_point: point,
            selected_target: nearest_target(&a.grid, point).target,
            elapsed_ms: (selected_at - timer_start).max(0.0),
            outcome,
        };
        if let Some(log) = self.log.as_mut() {
            log.append(&record)?;
        }
        self.records.push(record.clone());
        self.active = None;
        self.hold_until_ms = now_ms + INTER_TRIAL_HOLD_MS;
        self.advance();
        self.emit(
            now_ms,
            EventKind::TrialFinalized {
                record: record.clone(),
                hold_until_ms: self.hold_until_ms,
            },
        );
        if self.phase == Phase::Complete {
            self.emit(now_ms, EventKind::SessionComplete);
        }
        Ok(record)
    }

    fn advance(&mut self) {
        self.trial += 1;
        self.phase = Phase::Idle;
        self.skip_empty_blocks();
    }

    fn skip_empty_blocks(&mut self) {
        while self.block < self.plan.blocks.len()
            && self.trial >= self.plan.blocks[self.block].targets.len()
        {
            self.block += 1;
            self.trial = 0;
        }
        if self.block >= self.plan.blocks.len() {
            self.phase = Phase::Complete;
        }
    }
}
