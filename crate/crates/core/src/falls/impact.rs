//! Freefall-gated impact detection on an accelerometer stream.

use crate::spaces::types::{NormalizedSample, PayloadValue};

use super::{DetectorParams, FallsError, ImpactEvent};

enum State {
    Rest,
    Freefall { start_t: f64 },
    AwaitImpact { deadline_t: f64 },
    InImpact { peak: f64, peak_t: f64 },
}

fn magnitude(sample: &NormalizedSample) -> Result<f64, FallsError> {
    match &sample.payload.value {
        PayloadValue::Accel3 { ax, ay, az } => Ok((ax * ax + ay * ay + az * az).sqrt()),
        other => Err(FallsError::WrongPayloadSpace {
            expected: "acceleration",
            got: other.kind().as_str().to_string(),
        }),
    }
}

/// Scan one entity's time-ordered accelerometer samples for the fall
/// signature: magnitude below `theta_freefall_g` for at least
/// `d_freefall_ms`, then above `theta_impact_g` within `max_gap_ms`.
/// One event per freefall episode, stamped at the impact peak.
pub fn detect_impacts(
    entity_id: &str,
    samples: &[NormalizedSample],
    params: &DetectorParams,
) -> Result<Vec<ImpactEvent>, FallsError> {
    params.validate()?;
    let mut events = Vec::new();
    let mut state = State::Rest;
    let mut last_t = f64::NEG_INFINITY;

    for sample in samples {
        let t = sample.time.t_s;
        if t < last_t {
            return Err(FallsError::UnsortedInput);
        }
        last_t = t;
        let mag = magnitude(sample)?;

        state = match state {
            State::Rest => {
                if mag < params.theta_freefall_g {
                    State::Freefall { start_t: t }
                } else {
                    State::Rest
                }
            }
            State::Freefall { start_t } => {
                if mag < params.theta_freefall_g {
                    State::Freefall { start_t }
                } else if (t - start_t) * 1_000.0 >= params.d_freefall_ms {
                    // Freefall long enough; the exiting sample may already be
                    // the impact itself.
                    if mag > params.theta_impact_g {
                        State::InImpact { peak: mag, peak_t: t }
                    } else {
                        State::AwaitImpact {
                            deadline_t: t + params.max_gap_ms / 1_000.0,
                        }
                    }
                } else {
                    State::Rest
                }
            }
            State::AwaitImpact { deadline_t } => {
                if mag > params.theta_impact_g && t <= deadline_t {
                    State::InImpact { peak: mag, peak_t: t }
                } else if t > deadline_t {
                    State::Rest
                } else if mag < params.theta_freefall_g {
                    State::Freefall { start_t: t }
                } else {
                    State::AwaitImpact { deadline_t }
                }
            }
            State::InImpact { peak, peak_t } => {
                if mag > params.theta_impact_g {
                    if mag > peak {
                        State::InImpact { peak: mag, peak_t: t }
                    } else {
                        State::InImpact { peak, peak_t }
                    }
                } else {
                    events.push(ImpactEvent {
                        t_s: peak_t,
                        entity_id: entity_id.to_string(),
                        peak_magnitude_g: peak,
                        freefall_observed: true,
                    });
                    State::Rest
                }
            }
        };
    }

    if let State::InImpact { peak, peak_t } = state {
        events.push(ImpactEvent {
            t_s: peak_t,
            entity_id: entity_id.to_string(),
            peak_magnitude_g: peak,
            freefall_observed: true,
        });
    }
    Ok(events)
}
