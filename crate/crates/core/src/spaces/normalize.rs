//! From raw counts to normalized samples, and from normalized samples to
//! the subjective spaces an application prefers.

use crate::kernel::{RawSample, SampleStatus, SensorDescriptor, SensorKind};

use super::registry::{SpaceRegistry, SpaceValue, SubjectiveView};
use super::standard::{SPACE_ACCEL_G, SPACE_CELSIUS, SPACE_SOUND_FRAME, SPACE_TIME};
use super::types::{NormalizedSample, Payload, PayloadValue, Position, Provenance, TemporalCoordinate};
use super::SpacesError;

/// Turn one ok raw sample into the normalized triple. Raw counts become
/// engineering units via the descriptor's scale and offset; the position is
/// the descriptor's placement; the temporal coordinate is the fire tick
/// times the quantum. The origin is kept only in the quarantine envelope.
pub fn normalize_sample(
    raw: &RawSample,
    descriptor: &SensorDescriptor,
    tick_quantum_us: u32,
) -> Result<NormalizedSample, SpacesError> {
    if raw.status != SampleStatus::Ok {
        return Err(SpacesError::FaultedSample);
    }
    if &*raw.sensor_id != descriptor.sensor_id.as_str() {
        return Err(SpacesError::DescriptorMismatch {
            descriptor: descriptor.sensor_id.clone(),
            sample: raw.sensor_id.to_string(),
        });
    }
    let expected = descriptor.expected_value_count();
    if raw.values.len() != expected {
        return Err(SpacesError::ChannelMismatch {
            sensor_id: descriptor.sensor_id.clone(),
            expected,
            got: raw.values.len(),
        });
    }

    let engineering: Vec<f64> = raw
        .values
        .iter()
        .map(|&count| count as f64 * descriptor.scale + descriptor.offset)
        .collect();

    let payload = match descriptor.kind {
        SensorKind::Accelerometer => Payload {
            space_id: SPACE_ACCEL_G.into(),
            value: PayloadValue::Accel3 {
                ax: engineering[0],
                ay: engineering[1],
                az: engineering[2],
            },
        },
        SensorKind::Thermometer => Payload {
            space_id: SPACE_CELSIUS.into(),
            value: PayloadValue::Temperature { degrees: engineering[0] },
        },
        SensorKind::MicrophoneArray => {
            let mics = descriptor.channel_count;
            Payload {
                space_id: SPACE_SOUND_FRAME.into(),
                value: PayloadValue::SoundFrame {
                    offsets_us: engineering[..mics].to_vec(),
                    loudness_db: engineering[mics],
                },
            }
        }
    };

    Ok(NormalizedSample {
        position: descriptor.placement.clone(),
        payload,
        time: TemporalCoordinate {
            t_s: raw.tick as f64 * tick_quantum_us as f64 / 1e6,
            space_id: SPACE_TIME.into(),
        },
        provenance: Some(Provenance {
            sensor_id: descriptor.sensor_id.clone(),
            sequence_no: raw.sequence_no,
        }),
    })
}

/// Map a sample into the view's preferred spaces. Time passes through
/// unchanged; provenance is always stripped. A sample already in the
/// preferred spaces comes back otherwise identical.
pub fn apply_view(
    sample: &NormalizedSample,
    view: &SubjectiveView,
    registry: &SpaceRegistry,
) -> Result<NormalizedSample, SpacesError> {
    let mut out = sample.clone();
    out.provenance = None;

    if let Some(preferred) = &view.physical_space_id {
        if preferred != &out.position.space_id {
            let path = registry.resolve_mapping_path(&out.position.space_id, preferred)?;
            let mapped = registry.apply_path(SpaceValue::Position(out.position.place.clone()), &path)?;
            match mapped {
                SpaceValue::Position(place) => {
                    out.position = Position {
                        space_id: preferred.clone(),
                        place,
                    };
                }
                SpaceValue::Payload(_) => {
                    return Err(SpacesError::PartialMappingUndefined {
                        mapping_id: path.last().map(|s| s.mapping_id.clone()).unwrap_or_default(),
                        reason: "position mapping produced a payload".into(),
                    })
                }
            }
        }
    }

    if let Some(preferred) = view.value_space_by_kind.get(&out.payload.value.kind()) {
        if preferred != &out.payload.space_id {
            let path = registry.resolve_mapping_path(&out.payload.space_id, preferred)?;
            let mapped = registry.apply_path(SpaceValue::Payload(out.payload.value.clone()), &path)?;
            match mapped {
                SpaceValue::Payload(value) => {
                    out.payload = Payload {
                        space_id: preferred.clone(),
                        value,
                    };
                }
                SpaceValue::Position(_) => {
                    return Err(SpacesError::PartialMappingUndefined {
                        mapping_id: path.last().map(|s| s.mapping_id.clone()).unwrap_or_default(),
                        reason: "payload mapping produced a position".into(),
                    })
                }
            }
        }
    }

    Ok(out)
}
