//! Impact/sound fusion into fall alarms.

use crate::spaces::types::Cartesian3;

use super::{AccelOnlyPolicy, AlarmConfidence, DetectorParams, FallAlarm, ImpactEvent, SoundEvent};

/// Fuse time-sorted impacts and height-annotated sound events.
///
/// An impact corroborated by a near-floor sound (height at most
/// `h_floor_m`, within `fuse_window_s`) raises a corroborated alarm at the
/// impact time, in the room of the sound source. A lone impact raises an
/// accel-only alarm when the policy allows. Loud sounds above the floor
/// gate raise nothing on their own: that is the music case.
pub fn fuse_events(
    impacts: &[ImpactEvent],
    sounds: &[SoundEvent],
    params: &DetectorParams,
    room_of: impl Fn(&Cartesian3) -> Option<String>,
) -> Vec<FallAlarm> {
    let mut alarms = Vec::new();
    for impact in impacts {
        let mut best: Option<&SoundEvent> = None;
        for sound in sounds {
            if sound.estimated_height_m > params.h_floor_m {
                continue;
            }
            let dt = (sound.t_s - impact.t_s).abs();
            if dt > params.fuse_window_s {
                continue;
            }
            let better = match best {
                None => true,
                Some(current) => dt < (current.t_s - impact.t_s).abs(),
            };
            if better {
                best = Some(sound);
            }
        }
        match best {
            Some(sound) => alarms.push(FallAlarm {
                t_s: impact.t_s,
                entity_id: impact.entity_id.clone(),
                confidence: AlarmConfidence::Corroborated,
                room: room_of(&sound.position),
            }),
            None => {
                if params.accel_only_policy == AccelOnlyPolicy::Suspected {
                    alarms.push(FallAlarm {
                        t_s: impact.t_s,
                        entity_id: impact.entity_id.clone(),
                        confidence: AlarmConfidence::AccelOnly,
                        room: None,
                    });
                }
            }
        }
    }
    alarms
}
