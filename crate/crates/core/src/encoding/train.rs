use super::{EncodingError, GridSpec, TargetIndex};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Motor {
    Top,
    Bottom,
    Left,
    Right,
}

impl Motor {
    pub const ALL: [Motor; 4] = [Motor::Top, Motor::Bottom, Motor::Left, Motor::Right];

    pub fn opposite(self) -> Motor {
        match self {
            Motor::Top => Motor::Bottom,
            Motor::Bottom => Motor::Top,
            Motor::Left => Motor::Right,
            Motor::Right => Motor::Left,
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Motor::Top | Motor::Bottom => Axis::Vertical,
            Motor::Left | Motor::Right => Axis::Horizontal,
        }
    }

    /// Wire identifier: 0 = Top, 1 = Bottom, 2 = Left, 3 = Right.
    pub fn id(self) -> u8 {
        match self {
            Motor::Top => 0,
            Motor::Bottom => 1,
            Motor::Left => 2,
            Motor::Right => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Motor> {
        Motor::ALL.get(usize::from(id)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Vertical,
    Horizontal,
}

impl Axis {
    /// Motor used for positive coordinates.
    pub fn positive_motor(self) -> Motor {
        match self {
            Axis::Vertical => Motor::Top,
            Axis::Horizontal => Motor::Right,
        }
    }

    /// Motor that opens the zero pattern.
    pub fn zero_lead_motor(self) -> Motor {
        match self {
            Axis::Vertical => Motor::Top,
            Axis::Horizontal => Motor::Left,
        }
    }

    pub fn motor_for(self, value: i32) -> Motor {
        if value > 0 {
            self.positive_motor()
        } else {
            self.positive_motor().opposite()
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Vertical => "vertical",
            Axis::Horizontal => "horizontal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisCode {
    Discrete,
    Continuous,
}

/// Per-axis code choice. Named vertical first: VDHC is vertical discrete,
/// horizontal continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EncodingScheme {
    pub vertical: AxisCode,
    pub horizontal: AxisCode,
}

impl EncodingScheme {
    pub const VDHD: Self = Self::new(AxisCode::Discrete, AxisCode::Discrete);
    pub const VDHC: Self = Self::new(AxisCode::Discrete, AxisCode::Continuous);
    pub const VCHD: Self = Self::new(AxisCode::Continuous, AxisCode::Discrete);
    pub const VCHC: Self = Self::new(AxisCode::Continuous, AxisCode::Continuous);
    pub const ALL: [Self; 4] = [Self::VDHD, Self::VDHC, Self::VCHD, Self::VCHC];

    pub const fn new(vertical: AxisCode, horizontal: AxisCode) -> Self {
        Self {
            vertical,
            horizontal,
        }
    }

    pub fn code_for(&self, axis: Axis) -> AxisCode {
        match axis {
            Axis::Vertical => self.vertical,
            Axis::Horizontal => self.horizontal,
        }
    }

    pub fn name(&self) -> &'static str {
        use AxisCode::*;
        match (self.vertical, self.horizontal) {
            (Discrete, Discrete) => "VDHD",
            (Discrete, Continuous) => "VDHC",
            (Continuous, Discrete) => "VCHD",
            (Continuous, Continuous) => "VCHC",
        }
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingScheme {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|scheme| scheme.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| EncodingError::UnknownScheme(s.to_string()))
    }
}

impl TryFrom<String> for EncodingScheme {
    type Error = EncodingError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<EncodingScheme> for String {
    fn from(s: EncodingScheme) -> String {
        s.name().to_string()
    }
}

/// How a continuous pulse length grows with the coordinate magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousMap {
    /// Linear, `continuous_min_ms` at magnitude 1 and `continuous_max_ms` at `max_index`.
    #[default]
    FromOne,
    /// Linear, `continuous_min_ms` at magnitude 0 and `continuous_max_ms` at
    /// `max_index`; magnitude 1 is one step above the minimum.
    FromZero,
}

/// Timing constants of the code, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingParams {
    pub discrete_pulse_ms: f64,
    pub discrete_gap_ms: f64,
    pub continuous_min_ms: f64,
    pub continuous_max_ms: f64,
    pub inter_axis_gap_ms: f64,
    pub zero_pulse_ms: f64,
    pub zero_gap_ms: f64,
    pub intensity: f64,
    pub continuous_map: ContinuousMap,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self {
            discrete_pulse_ms: 200.0,
            discrete_gap_ms: 120.0,
            continuous_min_ms: 200.0,
            continuous_max_ms: 1300.0,
            inter_axis_gap_ms: 800.0,
            zero_pulse_ms: 120.0,
            zero_gap_ms: 40.0,
            intensity: 1.0,
            continuous_map: ContinuousMap::FromOne,
        }
    }
}

impl EncodingParams {
    pub fn validate(&self) -> Result<(), EncodingError> {
        let durations = [
            self.discrete_pulse_ms,
            self.discrete_gap_ms,
            self.continuous_min_ms,
            self.continuous_max_ms,
            self.inter_axis_gap_ms,
            self.zero_pulse_ms,
            self.zero_gap_ms,
        ];
        if durations.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(EncodingError::InvalidParams("durations must be positive"));
        }
        if self.continuous_min_ms >= self.continuous_max_ms {
            return Err(EncodingError::InvalidParams(
                "continuous_min_ms must be below continuous_max_ms",
            ));
        }
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return Err(EncodingError::InvalidParams("intensity must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Length of the single continuous pulse for a nonzero magnitude.
    pub fn continuous_duration_ms(&self, magnitude: i32, max_index: i32) -> f64 {
        let frac = match self.continuous_map {
            ContinuousMap::FromOne if max_index <= 1 => 0.0,
            ContinuousMap::FromOne => f64::from(magnitude - 1) / f64::from(max_index - 1),
            ContinuousMap::FromZero => f64::from(magnitude) / f64::from(max_index),
        };
        self.continuous_min_ms + frac * (self.continuous_max_ms - self.continuous_min_ms)
    }

    /// Encoded pulse lengths for magnitudes `1..=max_index`.
    pub fn continuous_bins_ms(&self, max_index: i32) -> Vec<f64> {
        (1..=max_index)
            .map(|k| self.continuous_duration_ms(k, max_index))
            .collect()
    }

    /// Length of a discrete segment carrying `count` pulses.
    pub fn discrete_segment_ms(&self, count: i32) -> f64 {
        let k = f64::from(count);
        k * self.discrete_pulse_ms + (k - 1.0) * self.discrete_gap_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub motor: Motor,
    pub start_ms: f64,
    pub duration_ms: f64,
    pub intensity: f64,
}

impl PulseEvent {
    pub fn end_ms(&self) -> f64 {
        self.start_ms + self.duration_ms
    }

    pub(crate) fn shifted(mut self, offset_ms: f64) -> Self {
        self.start_ms += offset_ms;
        self
    }
}

/// A complete stimulus: strictly sequential single-motor pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub events: Vec<PulseEvent>,
    pub scheme: EncodingScheme,
    pub params: EncodingParams,
}

impl PulseTrain {
    /// Checks ordering, non-overlap, positive durations and intensity range.
    pub fn is_well_formed(&self) -> bool {
        let each = self.events.iter().all(|e| {
            e.start_ms >= 0.0 && e.duration_ms > 0.0 && e.intensity > 0.0 && e.intensity <= 1.0
        });
        let sequential = self
            .events
            .windows(2)
            .all(|w| w[0].end_ms() <= w[1].start_ms);
        each && sequential
    }

    pub fn to_document(&self, grid: &GridSpec, target: TargetIndex) -> TrainDocument {
        TrainDocument {
            scheme: self.scheme,
            density: grid.density(),
            frame_cm: grid.frame_size_cm(),
            target,
            events: self.events.clone(),
        }
    }
}

/// JSON exchange form of an encoded target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainDocument {
    pub scheme: EncodingScheme,
    pub density: u32,
    pub frame_cm: f64,
    pub target: TargetIndex,
    pub events: Vec<PulseEvent>,
}

impl TrainDocument {
    pub fn grid(&self) -> Result<GridSpec, EncodingError> {
        super::make_grid(self.density, self.frame_cm)
    }

    /// Train with default timing parameters.
    pub fn into_train(self) -> PulseTrain {
        PulseTrain {
            events: self.events,
            scheme: self.scheme,
            params: EncodingParams::default(),
        }
    }
}

/// End of the last event, measured from the train start.
pub fn train_duration(train: &PulseTrain) -> Result<f64, EncodingError> {
    train
        .events
        .iter()
        .map(PulseEvent::end_ms)
        .reduce(f64::max)
        .ok_or(EncodingError::EmptyTrain)
}
