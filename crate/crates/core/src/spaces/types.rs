//! Domain types for the normalization layer: spaces, positions, payloads,
//! temporal coordinates, and the normalized sample triple.
//!
//! A normalized sample is a position in a physical space, a payload in a
//! value space, and a temporal coordinate. Where the sample came from is
//! quarantined in an optional provenance envelope that never survives a
//! subjective view.

use serde::{Deserialize, Serialize};

/// What sort of space a descriptor declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    PhysicalCartesian,
    BuildingGraph,
    Temporal,
    Value,
    /// Positions attached to a wearer rather than to world coordinates.
    BodyWorn,
}

/// Registry entry describing one space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceDescriptor {
    pub space_id: String,
    pub kind: SpaceKind,
    pub unit: String,
    pub dimensionality: usize,
}

impl SpaceDescriptor {
    pub fn new(space_id: impl Into<String>, kind: SpaceKind, unit: impl Into<String>, dimensionality: usize) -> Self {
        Self {
            space_id: space_id.into(),
            kind,
            unit: unit.into(),
            dimensionality,
        }
    }
}

/// A point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cartesian3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Cartesian3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Cartesian3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Where a sample is, in one of the physical space models.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Cartesian(Cartesian3),
    Room { room_id: String },
    Worn { entity_id: String, attachment: String },
}

/// A place together with the physical space it inhabits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Position {
    pub space_id: String,
    pub place: Place,
}

impl Position {
    pub fn cartesian(space_id: impl Into<String>, x: f64, y: f64, z: f64) -> Self {
        Self {
            space_id: space_id.into(),
            place: Place::Cartesian(Cartesian3::new(x, y, z)),
        }
    }

    pub fn room(space_id: impl Into<String>, room_id: impl Into<String>) -> Self {
        Self {
            space_id: space_id.into(),
            place: Place::Room { room_id: room_id.into() },
        }
    }

    pub fn worn(space_id: impl Into<String>, entity_id: impl Into<String>, attachment: impl Into<String>) -> Self {
        Self {
            space_id: space_id.into(),
            place: Place::Worn {
                entity_id: entity_id.into(),
                attachment: attachment.into(),
            },
        }
    }

    /// Kind of space this place variant belongs in.
    pub fn place_kind(&self) -> SpaceKind {
        match self.place {
            Place::Cartesian(_) => SpaceKind::PhysicalCartesian,
            Place::Room { .. } => SpaceKind::BuildingGraph,
            Place::Worn { .. } => SpaceKind::BodyWorn,
        }
    }
}

/// Families of value payloads, used for view preferences and stream filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    Acceleration,
    Sound,
    Temperature,
    Color,
}

impl PayloadKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PayloadKind::Acceleration => "acceleration",
            PayloadKind::Sound => "sound",
            PayloadKind::Temperature => "temperature",
            PayloadKind::Color => "color",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "acceleration" => Some(PayloadKind::Acceleration),
            "sound" => Some(PayloadKind::Sound),
            "temperature" => Some(PayloadKind::Temperature),
            "color" => Some(PayloadKind::Color),
            _ => None,
        }
    }
}

/// The measured value of a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum PayloadValue {
    /// Device-frame acceleration in g.
    Accel3 { ax: f64, ay: f64, az: f64 },
    /// Per-microphone arrival offsets relative to mic 0 (µs) plus frame loudness (dB SPL).
    SoundFrame { offsets_us: Vec<f64>, loudness_db: f64 },
    /// Degrees in whatever temperature space the payload declares.
    Temperature { degrees: f64 },
    /// Color components in [0, 255].
    Rgb { r: f64, g: f64, b: f64 },
}

impl PayloadValue {
    pub fn kind(&self) -> PayloadKind {
        match self {
            PayloadValue::Accel3 { .. } => PayloadKind::Acceleration,
            PayloadValue::SoundFrame { .. } => PayloadKind::Sound,
            PayloadValue::Temperature { .. } => PayloadKind::Temperature,
            PayloadValue::Rgb { .. } => PayloadKind::Color,
        }
    }

    /// Flat numeric components, in wire order.
    pub fn components(&self) -> Vec<f64> {
        match self {
            PayloadValue::Accel3 { ax, ay, az } => vec![*ax, *ay, *az],
            PayloadValue::SoundFrame { offsets_us, loudness_db } => {
                let mut v = offsets_us.clone();
                v.push(*loudness_db);
                v
            }
            PayloadValue::Temperature { degrees } => vec![*degrees],
            PayloadValue::Rgb { r, g, b } => vec![*r, *g, *b],
        }
    }
}

/// A payload value together with the value space it inhabits.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub space_id: String,
    pub value: PayloadValue,
}

/// Seconds since run start, in a declared temporal space.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalCoordinate {
    pub t_s: f64,
    pub space_id: String,
}

/// Quarantined origin of a sample. Never serialized into a consumer view.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub sensor_id: String,
    pub sequence_no: u64,
}

/// The normalization layer's output triple plus quarantined provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSample {
    pub position: Position,
    pub payload: Payload,
    pub time: TemporalCoordinate,
    pub provenance: Option<Provenance>,
}
