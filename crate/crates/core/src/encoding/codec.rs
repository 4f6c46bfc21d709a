use super::{
    Axis, AxisCode, EncodingError, EncodingParams, EncodingScheme, GridSpec, PulseEvent,
    PulseTrain, TargetIndex,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("cannot decode {segment} segment: {reason}")]
pub struct DecodeError {
    pub segment: Axis,
    pub reason: String,
}

impl DecodeError {
    fn new(segment: Axis, reason: impl Into<String>) -> Self {
        Self {
            segment,
            reason: reason.into(),
        }
    }
}

/// Pulses for one coordinate, timed from the start of its segment.
pub fn encode_axis(
    value: i32,
    axis: Axis,
    code: AxisCode,
    max_index: i32,
    params: &EncodingParams,
) -> Result<Vec<PulseEvent>, EncodingError> {
    if max_index < 1 {
        return Err(EncodingError::InvalidParams("max_index must be at least 1"));
    }
    if value.abs() > max_index {
        return Err(EncodingError::OutOfBounds { value, max_index });
    }
    let pulse = |motor, start_ms, duration_ms| PulseEvent {
        motor,
        start_ms,
        duration_ms,
        intensity: params.intensity,
    };
    if value == 0 {
        let lead = axis.zero_lead_motor();
        return Ok(vec![
            pulse(lead, 0.0, params.zero_pulse_ms),
            pulse(
                lead.opposite(),
                params.zero_pulse_ms + params.zero_gap_ms,
                params.zero_pulse_ms,
            ),
        ]);
    }
    let motor = axis.motor_for(value);
    let magnitude = value.abs();
    Ok(match code {
        AxisCode::Discrete => {
            let step = params.discrete_pulse_ms + params.discrete_gap_ms;
            (0..magnitude)
                .map(|k| pulse(motor, f64::from(k) * step, params.discrete_pulse_ms))
                .collect()
        }
        AxisCode::Continuous => {
            vec![pulse(
                motor,
                0.0,
                params.continuous_duration_ms(magnitude, max_index),
            )]
        }
    })
}

/// Vertical segment, inter-axis pause, horizontal segment.
///
/// The pause runs from the end of the last vertical pulse to the first
/// horizontal pulse.
pub fn encode_target(
    t: TargetIndex,
    scheme: EncodingScheme,
    grid: &GridSpec,
    params: &EncodingParams,
) -> Result<PulseTrain, EncodingError> {
    params.validate()?;
    grid.check(t)?;
    let max_index = grid.max_index();
    let mut events = encode_axis(t.iy, Axis::Vertical, scheme.vertical, max_index, params)?;
    let vertical_end = events.last().map_or(0.0, PulseEvent::end_ms);
    let offset = vertical_end + params.inter_axis_gap_ms;
    events.extend(
        encode_axis(t.ix, Axis::Horizontal, scheme.horizontal, max_index, params)?
            .into_iter()
            .map(|e| e.shifted(offset)),
    );
    Ok(PulseTrain {
        events,
        scheme,
        params: *params,
    })
}

/// Inverse of [`encode_target`].
///
/// Motors identify the axis and sign, pulse count gives discrete magnitudes,
/// and continuous pulses snap to the nearest encoded length (ties go to the
/// smaller magnitude). Start times are not inspected, so a train whose
/// durations drift by less than half a bin still decodes exactly.
pub fn decode_train(
    train: &PulseTrain,
    scheme: EncodingScheme,
    grid: &GridSpec,
    params: &EncodingParams,
) -> Result<TargetIndex, DecodeError> {
    let events = &train.events;
    let split = events
        .iter()
        .position(|e| e.motor.axis() == Axis::Horizontal)
        .unwrap_or(events.len());
    let (vertical, horizontal) = events.split_at(split);
    if horizontal.iter().any(|e| e.motor.axis() == Axis::Vertical) {
        return Err(DecodeError::new(
            Axis::Horizontal,
            "vertical pulse after the horizontal segment began",
        ));
    }
    let max_index = grid.max_index();
    let iy = decode_segment(Axis::Vertical, scheme.vertical, vertical, max_index, params)?;
    let ix = decode_segment(
        Axis::Horizontal,
        scheme.horizontal,
        horizontal,
        max_index,
        params,
    )?;
    Ok(TargetIndex::new(ix, iy))
}

pub(crate) fn decode_segment(
    axis: Axis,
    code: AxisCode,
    events: &[PulseEvent],
    max_index: i32,
    params: &EncodingParams,
) -> Result<i32, DecodeError> {
    let first = events
        .first()
        .ok_or_else(|| DecodeError::new(axis, "no pulses"))?
        .motor;
    let lead = axis.zero_lead_motor();
    if events.iter().any(|e| e.motor != first) {
        return match events {
            [a, b] if a.motor == lead && b.motor == lead.opposite() => Ok(0),
            _ => Err(DecodeError::new(
                axis,
                "mixed motors do not form the zero pattern",
            )),
        };
    }
    let sign = if first == axis.positive_motor() {
        1
    } else {
        -1
    };
    let magnitude = match code {
        AxisCode::Discrete => {
            let count = events.len() as i32;
            if count > max_index {
                return Err(DecodeError::new(
                    axis,
                    format!("{count} pulses exceed the maximum of {max_index}"),
                ));
            }
            count
        }
        AxisCode::Continuous => {
            let [pulse] = events else {
                return Err(DecodeError::new(
                    axis,
                    format!("continuous code expects one pulse, found {}", events.len()),
                ));
            };
            nearest_bin(pulse.duration_ms, max_index, params)
        }
    };
    Ok(sign * magnitude)
}

/// Magnitude whose continuous pulse length is closest to `duration_ms`.
pub(crate) fn nearest_bin(duration_ms: f64, max_index: i32, params: &EncodingParams) -> i32 {
    let mut best = 1;
    let mut best_err = f64::INFINITY;
    for k in 1..=max_index {
        let err = (params.continuous_duration_ms(k, max_index) - duration_ms).abs();
        // strict comparison keeps the smaller magnitude on ties
        if err < best_err {
            best = k;
            best_err = err;
        }
    }
    best
}
