//! The canonical space catalogue a hub instance starts from: world
//! coordinates, the building graph, body-worn placement, a temporal space,
//! and the value spaces the built-in sensor kinds normalize into, plus the
//! stock mappings and views.

use std::sync::Arc;

use super::convert::{celsius_transform_pair, world_to_building_mapping};
use super::floorplan::BuildingGraph;
use super::registry::{SpaceRegistry, SpaceRegistryBuilder, SubjectiveView};
use super::types::{PayloadKind, SpaceDescriptor, SpaceKind};
use super::SpacesError;

pub const SPACE_TIME: &str = "run-time";
pub const SPACE_WORLD: &str = "world";
pub const SPACE_BUILDING: &str = "building";
pub const SPACE_WORN: &str = "worn";
pub const SPACE_ACCEL_G: &str = "accel-g";
pub const SPACE_SOUND_FRAME: &str = "sound-frame";
pub const SPACE_CELSIUS: &str = "celsius";
pub const SPACE_FAHRENHEIT: &str = "fahrenheit";
pub const SPACE_RGB: &str = "rgb";

pub const VIEW_NATIVE: &str = "native";
pub const VIEW_FAHRENHEIT: &str = "fahrenheit";
pub const VIEW_ROOMS: &str = "rooms";

/// Build the standard registry for a deployment with the given floorplan.
/// `mic_count` sizes the sound-frame value space (offsets plus loudness).
pub fn standard_registry(floorplan: Arc<BuildingGraph>, mic_count: usize) -> Result<SpaceRegistry, SpacesError> {
    let mut b = SpaceRegistryBuilder::new();
    b.register_space(SpaceDescriptor::new(SPACE_TIME, SpaceKind::Temporal, "s", 1))?;
    b.register_space(SpaceDescriptor::new(SPACE_WORLD, SpaceKind::PhysicalCartesian, "m", 3))?;
    b.register_space(SpaceDescriptor::new(SPACE_BUILDING, SpaceKind::BuildingGraph, "room", 1))?;
    b.register_space(SpaceDescriptor::new(SPACE_WORN, SpaceKind::BodyWorn, "attachment", 1))?;
    b.register_space(SpaceDescriptor::new(SPACE_ACCEL_G, SpaceKind::Value, "g", 3))?;
    b.register_space(SpaceDescriptor::new(
        SPACE_SOUND_FRAME,
        SpaceKind::Value,
        "µs+dB",
        mic_count.max(1) + 1,
    ))?;
    b.register_space(SpaceDescriptor::new(SPACE_CELSIUS, SpaceKind::Value, "celsius", 1))?;
    b.register_space(SpaceDescriptor::new(SPACE_FAHRENHEIT, SpaceKind::Value, "fahrenheit", 1))?;
    b.register_space(SpaceDescriptor::new(SPACE_RGB, SpaceKind::Value, "rgb", 3))?;

    let (meta, forward, inverse) = celsius_transform_pair();
    b.register_mapping(meta, forward, Some(inverse))?;
    let (meta, transform) = world_to_building_mapping(floorplan);
    b.register_mapping(meta, transform, None)?;

    b.register_view(SubjectiveView::passthrough(VIEW_NATIVE))?;

    let mut fahrenheit = SubjectiveView::passthrough(VIEW_FAHRENHEIT);
    fahrenheit
        .value_space_by_kind
        .insert(PayloadKind::Temperature, SPACE_FAHRENHEIT.into());
    b.register_view(fahrenheit)?;

    let mut rooms = SubjectiveView::passthrough(VIEW_ROOMS);
    rooms.physical_space_id = Some(SPACE_BUILDING.into());
    b.register_view(rooms)?;

    Ok(b.freeze())
}
