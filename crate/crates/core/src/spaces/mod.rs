//! The normalization layer: raw samples become source-agnostic triples
//! (position, payload, temporal coordinate), and applications read them
//! through subjective views backed by a registry of mapping functions.

pub mod convert;
pub mod floorplan;
pub mod normalize;
pub mod registry;
pub mod standard;
pub mod types;
pub mod wire;

pub use convert::{cartesian_to_room, celsius_to_fahrenheit, fahrenheit_to_celsius};
pub use floorplan::{BoxBounds, BuildingGraph, FloorplanError, Room};
pub use normalize::{apply_view, normalize_sample};
pub use registry::{
    MappingFunction, MappingStep, SpaceRegistry, SpaceRegistryBuilder, SpaceValue, SubjectiveView, Transform,
    TransformError,
};
pub use types::{
    Cartesian3, NormalizedSample, Payload, PayloadKind, PayloadValue, Place, Position, Provenance,
    SpaceDescriptor, SpaceKind, TemporalCoordinate,
};
pub use wire::sample_to_wire_json;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacesError {
    #[error("space id already registered: {0}")]
    DuplicateSpaceId(String),
    #[error("mapping id already registered: {0}")]
    DuplicateMappingId(String),
    #[error("view id already registered: {0}")]
    DuplicateViewId(String),
    #[error("unknown space: {0}")]
    UnknownSpace(String),
    #[error("unknown view: {0}")]
    UnknownView(String),
    #[error("invalid space descriptor {space_id}: {reason}")]
    InvalidSpace { space_id: String, reason: String },
    #[error("invalid mapping {mapping_id}: {reason}")]
    InvalidMapping { mapping_id: String, reason: String },
    #[error("no mapping path from {from} to {to}")]
    NoPath { from: String, to: String },
    #[error("mapping {mapping_id} is undefined at this input: {reason}")]
    PartialMappingUndefined { mapping_id: String, reason: String },
    #[error("cannot normalize a faulted sample")]
    FaultedSample,
    #[error("sample from {sensor_id} carries {got} values, descriptor expects {expected}")]
    ChannelMismatch {
        sensor_id: String,
        expected: usize,
        got: usize,
    },
    #[error("descriptor {descriptor} does not match sample from {sample}")]
    DescriptorMismatch { descriptor: String, sample: String },
    #[error("input is not finite")]
    NonFiniteInput,
    #[error("point ({x}, {y}, {z}) lies outside the floorplan")]
    OutsideFloorplan { x: f64, y: f64, z: f64 },
}
