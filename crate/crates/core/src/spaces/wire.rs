//! The consumer-facing wire form of a normalized sample: one JSON object
//! per line, fixed field order, and structurally no provenance keys.

use serde::Serialize;

use super::types::{NormalizedSample, Place};

#[derive(Serialize)]
struct WireSample<'a> {
    t_s: f64,
    position: WirePosition<'a>,
    payload: WirePayload<'a>,
}

#[derive(Serialize)]
struct WirePosition<'a> {
    space: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    room: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worn: Option<WireWorn<'a>>,
}

#[derive(Serialize)]
struct WireWorn<'a> {
    entity: &'a str,
    attachment: &'a str,
}

#[derive(Serialize)]
struct WirePayload<'a> {
    space: &'a str,
    values: Vec<f64>,
}

/// Serialize a sample for a subjective view. The wire struct has no
/// provenance field at all, so sensor identity cannot leak through here.
pub fn sample_to_wire_json(sample: &NormalizedSample) -> String {
    let (coords, room, worn) = match &sample.position.place {
        Place::Cartesian(p) => (Some([p.x, p.y, p.z]), None, None),
        Place::Room { room_id } => (None, Some(room_id.as_str()), None),
        Place::Worn { entity_id, attachment } => (
            None,
            None,
            Some(WireWorn {
                entity: entity_id,
                attachment,
            }),
        ),
    };
    let wire = WireSample {
        t_s: sample.time.t_s,
        position: WirePosition {
            space: &sample.position.space_id,
            coords,
            room,
            worn,
        },
        payload: WirePayload {
            space: &sample.payload.space_id,
            values: sample.payload.value.components(),
        },
    };
    serde_json::to_string(&wire).expect("wire sample serializes")
}
