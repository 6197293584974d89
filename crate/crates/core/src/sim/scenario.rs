//! Scenario documents: the JSON schema, validation, and defaults.

use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::falls::{AccelOnlyPolicy, DetectorParams};
use crate::kernel::{ScheduleEntry, SensorDescriptor, SensorKind};
use crate::spaces::floorplan::{BoxBounds, BuildingGraph, Room};
use crate::spaces::standard::{SPACE_BUILDING, SPACE_WORLD, SPACE_WORN};
use crate::spaces::types::{Cartesian3, Position};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("geometry error at {path}: {reason}")]
    Geometry { path: String, reason: String },
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

fn geometry(path: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Geometry {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Per-sensor noise magnitudes. Defaults apply when the document omits them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub accel_sigma_g: f64,
    pub tdoa_jitter_us: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            accel_sigma_g: 0.05,
            tdoa_jitter_us: 20.0,
        }
    }
}

/// Three-phase fall signature: freefall, impact spike, settle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelWaveformTemplate {
    pub rest_magnitude_g: f64,
    pub freefall_magnitude_g: f64,
    pub freefall_duration_ms: f64,
    pub impact_peak_g: f64,
    pub impact_width_ms: f64,
    pub settle_ms: f64,
}

impl Default for AccelWaveformTemplate {
    fn default() -> Self {
        Self {
            rest_magnitude_g: 1.0,
            freefall_magnitude_g: 0.05,
            freefall_duration_ms: 300.0,
            impact_peak_g: 3.0,
            impact_width_ms: 40.0,
            settle_ms: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Fall,
    Music,
    Footstep,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Fall => "fall",
            EventKind::Music => "music",
            EventKind::Footstep => "footstep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedEvent {
    pub kind: EventKind,
    pub t_start_ticks: u64,
    pub position: Cartesian3,
    /// Sound pressure level at 1 m from the source.
    pub loudness_db: f64,
    pub entity_id: Option<String>,
    pub duration_ticks: Option<u64>,
}

/// Geometry and acoustics of the environment microphone array.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArrayModel {
    pub mic_positions: Vec<Cartesian3>,
    pub speed_of_sound_mps: f64,
    pub frame_period_ticks: u64,
    pub loudness_floor_db: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioSensor {
    pub descriptor: SensorDescriptor,
    pub period_ticks: u32,
    pub phase_ticks: u32,
    pub enabled: bool,
    pub mic_model: Option<MicArrayModel>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub duration_ticks: u64,
    pub tick_quantum_us: u32,
    pub floorplan: Arc<BuildingGraph>,
    pub sensors: Vec<ScenarioSensor>,
    pub events: Vec<ScriptedEvent>,
    pub noise: NoiseParams,
    pub ambient_c: f64,
    pub accel_template: AccelWaveformTemplate,
    pub detector: DetectorParams,
}

impl Scenario {
    pub fn schedule_entries(&self) -> Vec<ScheduleEntry> {
        self.sensors
            .iter()
            .map(|s| ScheduleEntry {
                sensor_id: s.descriptor.sensor_id.clone(),
                period_ticks: s.period_ticks,
                phase_ticks: s.phase_ticks,
                enabled: s.enabled,
            })
            .collect()
    }

    /// Entity ids that wear a sensor.
    pub fn worn_entities(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .sensors
            .iter()
            .filter_map(|s| match &s.descriptor.placement.place {
                crate::spaces::types::Place::Worn { entity_id, .. } => Some(entity_id.as_str()),
                _ => None,
            })
            .collect();
        out.dedup();
        out
    }

    /// The environment microphone array, when the scenario has one.
    pub fn mic_array(&self) -> Option<(&SensorDescriptor, &MicArrayModel)> {
        self.sensors
            .iter()
            .find_map(|s| s.mic_model.as_ref().map(|m| (&s.descriptor, m)))
    }

    pub fn tick_to_seconds(&self, tick: u64) -> f64 {
        tick as f64 * self.tick_quantum_us as f64 / 1e6
    }
}

// ---------------------------------------------------------------------------
// Document shapes (the JSON schema, all keys lowercase)
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    seed: u64,
    duration_ticks: u64,
    tick_quantum_us: u32,
    floorplan: FloorplanDoc,
    sensors: Vec<SensorDoc>,
    #[serde(default)]
    events: Vec<EventDoc>,
    noise: Option<NoiseDoc>,
    ambient_c: Option<f64>,
    accel_template: Option<TemplateDoc>,
    detector: Option<DetectorDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FloorplanDoc {
    rooms: Vec<RoomDoc>,
    #[serde(default)]
    adjacency: Vec<(String, String)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomDoc {
    id: String,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    z_min: f64,
    z_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorDoc {
    sensor_id: String,
    kind: String,
    channel_count: Option<usize>,
    native_unit: Option<String>,
    scale: f64,
    #[serde(default)]
    offset: f64,
    placement: PlacementDoc,
    min_period_ticks: Option<u32>,
    max_period_ticks: Option<u32>,
    period_ticks: u32,
    #[serde(default)]
    phase_ticks: u32,
    enabled: Option<bool>,
    mic_positions: Option<Vec<[f64; 3]>>,
    speed_of_sound_mps: Option<f64>,
    loudness_floor_db: Option<f64>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PlacementDoc {
    Cartesian { coords: [f64; 3] },
    Room { room_id: String },
    BodyWorn { entity_id: String, attachment: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    kind: String,
    t_start_ticks: u64,
    position: [f64; 3],
    loudness_db: f64,
    entity_id: Option<String>,
    duration_ticks: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseDoc {
    accel_sigma_g: Option<f64>,
    tdoa_jitter_us: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateDoc {
    rest_magnitude_g: Option<f64>,
    freefall_magnitude_g: Option<f64>,
    freefall_duration_ms: Option<f64>,
    impact_peak_g: Option<f64>,
    impact_width_ms: Option<f64>,
    settle_ms: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorDoc {
    theta_freefall_g: Option<f64>,
    d_freefall_ms: Option<f64>,
    theta_impact_g: Option<f64>,
    max_gap_ms: Option<f64>,
    theta_loud_db: Option<f64>,
    refractory_ms: Option<f64>,
    h_floor_m: Option<f64>,
    fuse_window_s: Option<f64>,
    grid_resolution_m: Option<f64>,
    accel_only_policy: Option<String>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

const DEFAULT_MAX_PERIOD: u32 = 1_000_000;

/// Parse and fully validate a scenario document. Omitted noise, template,
/// and detector fields take their defaults; microphone geometry defaults to
/// a vertical 3-mic wall array at 0.5/1.0/1.5 m above the array placement.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let mut deserializer = serde_json::Deserializer::from_str(document);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| schema(e.path().to_string(), e.inner().to_string()))?;

    if doc.tick_quantum_us < 1 {
        return Err(schema("tick_quantum_us", "must be at least 1 µs"));
    }

    let rooms: Vec<Room> = doc
        .floorplan
        .rooms
        .into_iter()
        .map(|r| Room {
            id: r.id,
            bounds: BoxBounds {
                x_min: r.x_min,
                x_max: r.x_max,
                y_min: r.y_min,
                y_max: r.y_max,
                z_min: r.z_min,
                z_max: r.z_max,
            },
        })
        .collect();
    let floorplan = BuildingGraph::new(rooms, doc.floorplan.adjacency)
        .map_err(|e| geometry("floorplan", e.to_string()))?;
    let floorplan = Arc::new(floorplan);
    let bbox = floorplan.bounding_box();

    let mut sensors = Vec::with_capacity(doc.sensors.len());
    let mut mic_arrays = 0usize;
    for (i, s) in doc.sensors.into_iter().enumerate() {
        let path = |field: &str| format!("sensors[{i}].{field}");
        let kind = SensorKind::parse(&s.kind)
            .ok_or_else(|| schema(path("kind"), format!("unknown sensor kind {:?}", s.kind)))?;

        let placement = match &s.placement {
            PlacementDoc::Cartesian { coords } => {
                Position::cartesian(SPACE_WORLD, coords[0], coords[1], coords[2])
            }
            PlacementDoc::Room { room_id } => {
                if floorplan.rooms().iter().all(|r| r.id != *room_id) {
                    return Err(schema(path("placement.room_id"), format!("unknown room {room_id:?}")));
                }
                Position::room(SPACE_BUILDING, room_id.clone())
            }
            PlacementDoc::BodyWorn { entity_id, attachment } => {
                Position::worn(SPACE_WORN, entity_id.clone(), attachment.clone())
            }
        };

        let mic_model = if kind == SensorKind::MicrophoneArray {
            mic_arrays += 1;
            if mic_arrays > 1 {
                return Err(schema(path("kind"), "at most one microphone-array sensor is supported"));
            }
            let positions: Vec<Cartesian3> = match &s.mic_positions {
                Some(list) => list.iter().map(|p| Cartesian3::new(p[0], p[1], p[2])).collect(),
                None => match &s.placement {
                    PlacementDoc::Cartesian { coords } => vec![
                        Cartesian3::new(coords[0], coords[1], 0.5),
                        Cartesian3::new(coords[0], coords[1], 1.0),
                        Cartesian3::new(coords[0], coords[1], 1.5),
                    ],
                    _ => {
                        return Err(schema(
                            path("mic_positions"),
                            "required unless the array placement is cartesian",
                        ))
                    }
                },
            };
            if positions.len() < 3 {
                return Err(schema(path("mic_positions"), "need at least 3 microphones"));
            }
            let spread = positions
                .iter()
                .flat_map(|a| positions.iter().map(move |b| a.distance(b)))
                .fold(0.0f64, f64::max);
            if spread < 1e-9 {
                return Err(schema(path("mic_positions"), "microphones must not all be coincident"));
            }
            Some(MicArrayModel {
                mic_positions: positions,
                speed_of_sound_mps: s.speed_of_sound_mps.unwrap_or(343.0),
                frame_period_ticks: s.period_ticks as u64,
                loudness_floor_db: s.loudness_floor_db.unwrap_or(35.0),
            })
        } else {
            if s.mic_positions.is_some() || s.speed_of_sound_mps.is_some() || s.loudness_floor_db.is_some() {
                return Err(schema(path("mic_positions"), "microphone fields on a non-array sensor"));
            }
            None
        };

        let channel_count = s.channel_count.unwrap_or(match kind {
            SensorKind::Accelerometer => 3,
            SensorKind::Thermometer => 1,
            SensorKind::MicrophoneArray => mic_model.as_ref().map(|m| m.mic_positions.len()).unwrap_or(3),
        });
        if let Some(model) = &mic_model {
            if channel_count != model.mic_positions.len() {
                return Err(schema(
                    path("channel_count"),
                    format!("{} microphones but channel_count {}", model.mic_positions.len(), channel_count),
                ));
            }
        }

        let descriptor = SensorDescriptor {
            sensor_id: s.sensor_id,
            kind,
            channel_count,
            native_unit: s.native_unit.unwrap_or_else(|| "count".into()),
            scale: s.scale,
            offset: s.offset,
            placement,
            min_period_ticks: s.min_period_ticks.unwrap_or(1),
            max_period_ticks: s.max_period_ticks.unwrap_or(DEFAULT_MAX_PERIOD),
        };
        descriptor
            .validate()
            .map_err(|e| schema(format!("sensors[{i}]"), e.to_string()))?;
        if sensors
            .iter()
            .any(|prev: &ScenarioSensor| prev.descriptor.sensor_id == descriptor.sensor_id)
        {
            return Err(schema(path("sensor_id"), format!("duplicate sensor id {:?}", descriptor.sensor_id)));
        }
        if s.period_ticks < descriptor.min_period_ticks || s.period_ticks > descriptor.max_period_ticks {
            return Err(schema(
                path("period_ticks"),
                format!(
                    "{} outside [{}, {}]",
                    s.period_ticks, descriptor.min_period_ticks, descriptor.max_period_ticks
                ),
            ));
        }
        if s.phase_ticks >= s.period_ticks {
            return Err(schema(path("phase_ticks"), "phase must be below the period"));
        }

        sensors.push(ScenarioSensor {
            descriptor,
            period_ticks: s.period_ticks,
            phase_ticks: s.phase_ticks,
            enabled: s.enabled.unwrap_or(true),
            mic_model,
        });
    }

    let mut events = Vec::with_capacity(doc.events.len());
    for (i, e) in doc.events.into_iter().enumerate() {
        let path = |field: &str| format!("events[{i}].{field}");
        let kind = match e.kind.as_str() {
            "fall" => EventKind::Fall,
            "music" => EventKind::Music,
            "footstep" => EventKind::Footstep,
            other => return Err(schema(path("kind"), format!("unknown event kind {other:?}"))),
        };
        if e.t_start_ticks >= doc.duration_ticks {
            return Err(schema(path("t_start_ticks"), "event starts at or after the run end"));
        }
        if !(0.0..=140.0).contains(&e.loudness_db) {
            return Err(schema(path("loudness_db"), "must lie in [0, 140] dB"));
        }
        if kind == EventKind::Fall && e.entity_id.is_none() {
            return Err(schema(path("entity_id"), "fall events must name the falling entity"));
        }
        let position = Cartesian3::new(e.position[0], e.position[1], e.position[2]);
        if !bbox.contains(&position) {
            return Err(geometry(
                path("position"),
                format!(
                    "({}, {}, {}) lies outside the floorplan bounding volume",
                    position.x, position.y, position.z
                ),
            ));
        }
        events.push(ScriptedEvent {
            kind,
            t_start_ticks: e.t_start_ticks,
            position,
            loudness_db: e.loudness_db,
            entity_id: e.entity_id,
            duration_ticks: e.duration_ticks,
        });
    }

    let noise = match doc.noise {
        None => NoiseParams::default(),
        Some(n) => {
            let defaults = NoiseParams::default();
            let noise = NoiseParams {
                accel_sigma_g: n.accel_sigma_g.unwrap_or(defaults.accel_sigma_g),
                tdoa_jitter_us: n.tdoa_jitter_us.unwrap_or(defaults.tdoa_jitter_us),
            };
            if noise.accel_sigma_g < 0.0 {
                return Err(schema("noise.accel_sigma_g", "must be non-negative"));
            }
            if noise.tdoa_jitter_us < 0.0 {
                return Err(schema("noise.tdoa_jitter_us", "must be non-negative"));
            }
            noise
        }
    };

    let accel_template = {
        let d = AccelWaveformTemplate::default();
        let t = doc.accel_template.as_ref();
        let template = AccelWaveformTemplate {
            rest_magnitude_g: t.and_then(|t| t.rest_magnitude_g).unwrap_or(d.rest_magnitude_g),
            freefall_magnitude_g: t.and_then(|t| t.freefall_magnitude_g).unwrap_or(d.freefall_magnitude_g),
            freefall_duration_ms: t.and_then(|t| t.freefall_duration_ms).unwrap_or(d.freefall_duration_ms),
            impact_peak_g: t.and_then(|t| t.impact_peak_g).unwrap_or(d.impact_peak_g),
            impact_width_ms: t.and_then(|t| t.impact_width_ms).unwrap_or(d.impact_width_ms),
            settle_ms: t.and_then(|t| t.settle_ms).unwrap_or(d.settle_ms),
        };
        for (field, v) in [
            ("freefall_duration_ms", template.freefall_duration_ms),
            ("impact_width_ms", template.impact_width_ms),
            ("settle_ms", template.settle_ms),
        ] {
            if !(v > 0.0) {
                return Err(schema(format!("accel_template.{field}"), "must be positive"));
            }
        }
        if !(0.0..=0.1).contains(&template.freefall_magnitude_g) {
            return Err(schema("accel_template.freefall_magnitude_g", "must lie in [0, 0.1] g"));
        }
        if template.impact_peak_g <= template.rest_magnitude_g {
            return Err(schema("accel_template.impact_peak_g", "must exceed the rest magnitude"));
        }
        template
    };

    let detector = {
        let d = DetectorParams::default();
        let doc_d = doc.detector.as_ref();
        let policy = match doc_d.and_then(|d| d.accel_only_policy.as_deref()) {
            None => AccelOnlyPolicy::Suspected,
            Some("suspected") => AccelOnlyPolicy::Suspected,
            Some("suppressed") => AccelOnlyPolicy::Suppressed,
            Some(other) => {
                return Err(schema(
                    "detector.accel_only_policy",
                    format!("expected \"suspected\" or \"suppressed\", got {other:?}"),
                ))
            }
        };
        let params = DetectorParams {
            theta_freefall_g: doc_d.and_then(|x| x.theta_freefall_g).unwrap_or(d.theta_freefall_g),
            d_freefall_ms: doc_d.and_then(|x| x.d_freefall_ms).unwrap_or(d.d_freefall_ms),
            theta_impact_g: doc_d.and_then(|x| x.theta_impact_g).unwrap_or(d.theta_impact_g),
            max_gap_ms: doc_d.and_then(|x| x.max_gap_ms).unwrap_or(d.max_gap_ms),
            theta_loud_db: doc_d.and_then(|x| x.theta_loud_db).unwrap_or(d.theta_loud_db),
            refractory_ms: doc_d.and_then(|x| x.refractory_ms).unwrap_or(d.refractory_ms),
            h_floor_m: doc_d.and_then(|x| x.h_floor_m).unwrap_or(d.h_floor_m),
            fuse_window_s: doc_d.and_then(|x| x.fuse_window_s).unwrap_or(d.fuse_window_s),
            grid_resolution_m: doc_d.and_then(|x| x.grid_resolution_m).unwrap_or(d.grid_resolution_m),
            accel_only_policy: policy,
        };
        params.validate().map_err(|e| schema("detector", e.to_string()))?;
        params
    };

    let ambient_c = doc.ambient_c.unwrap_or(22.0);
    if !ambient_c.is_finite() {
        return Err(schema("ambient_c", "must be finite"));
    }

    Ok(Scenario {
        name: doc.name,
        seed: doc.seed,
        duration_ticks: doc.duration_ticks,
        tick_quantum_us: doc.tick_quantum_us,
        floorplan,
        sensors,
        events,
        noise,
        ambient_c,
        accel_template,
        detector,
    })
}
