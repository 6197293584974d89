//! Loudness-threshold sound-event detection over microphone-array frames.

use crate::spaces::types::{NormalizedSample, PayloadValue};

use super::{DetectorParams, FallsError};

/// A loud frame, carrying its TDOA offsets for height estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundCandidate {
    pub t_s: f64,
    pub loudness_db: f64,
    pub offsets_us: Vec<f64>,
}

/// One candidate per crossing of `theta_loud_db`; further crossings within
/// `refractory_ms` of the last emitted candidate are suppressed.
pub fn detect_sound_events(
    frames: &[NormalizedSample],
    params: &DetectorParams,
) -> Result<Vec<SoundCandidate>, FallsError> {
    params.validate()?;
    let mut candidates = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    let mut last_emitted: Option<f64> = None;

    for frame in frames {
        let t = frame.time.t_s;
        if t < last_t {
            return Err(FallsError::UnsortedInput);
        }
        last_t = t;
        let (offsets_us, loudness_db) = match &frame.payload.value {
            PayloadValue::SoundFrame { offsets_us, loudness_db } => (offsets_us, *loudness_db),
            other => {
                return Err(FallsError::WrongPayloadSpace {
                    expected: "sound",
                    got: other.kind().as_str().to_string(),
                })
            }
        };
        if loudness_db < params.theta_loud_db {
            continue;
        }
        if let Some(prev) = last_emitted {
            if (t - prev) * 1_000.0 < params.refractory_ms {
                continue;
            }
        }
        last_emitted = Some(t);
        candidates.push(SoundCandidate {
            t_s: t,
            loudness_db,
            offsets_us: offsets_us.clone(),
        });
    }
    Ok(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::standard::{SPACE_SOUND_FRAME, SPACE_TIME, SPACE_WORLD};
    use crate::spaces::types::{Payload, Position, TemporalCoordinate};

    fn frame(t_s: f64, loudness_db: f64) -> NormalizedSample {
        NormalizedSample {
            position: Position::cartesian(SPACE_WORLD, 0.05, 1.5, 1.0),
            payload: Payload {
                space_id: SPACE_SOUND_FRAME.into(),
                value: PayloadValue::SoundFrame {
                    offsets_us: vec![0.0, -10.0, 20.0],
                    loudness_db,
                },
            },
            time: TemporalCoordinate { t_s, space_id: SPACE_TIME.into() },
            provenance: None,
        }
    }

    #[test]
    fn loud_frame_becomes_a_candidate() {
        let out = detect_sound_events(&[frame(1.0, 80.0)], &DetectorParams::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].t_s, 1.0);
        assert_eq!(out[0].offsets_us, vec![0.0, -10.0, 20.0]);
    }

    #[test]
    fn quiet_frames_are_ignored() {
        let out = detect_sound_events(&[frame(1.0, 60.0)], &DetectorParams::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn refractory_suppresses_nearby_crossings() {
        let out = detect_sound_events(&[frame(1.0, 80.0), frame(1.1, 80.0)], &DetectorParams::default()).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn crossings_past_the_refractory_emit_again() {
        let out = detect_sound_events(&[frame(1.0, 80.0), frame(1.6, 80.0)], &DetectorParams::default()).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn wrong_payload_is_rejected() {
        let mut f = frame(1.0, 80.0);
        f.payload.value = PayloadValue::Temperature { degrees: 20.0 };
        assert!(matches!(
            detect_sound_events(&[f], &DetectorParams::default()),
            Err(FallsError::WrongPayloadSpace { .. })
        ));
    }
}
