//! Concrete mapping functions: Celsius↔Fahrenheit and Cartesian→room.

use std::sync::Arc;

use super::floorplan::BuildingGraph;
use super::registry::{MappingFunction, SpaceValue, Transform, TransformError};
use super::standard::{SPACE_BUILDING, SPACE_CELSIUS, SPACE_FAHRENHEIT, SPACE_WORLD};
use super::types::{Cartesian3, Place, PayloadValue};
use super::SpacesError;

pub const CELSIUS_TO_FAHRENHEIT_ID: &str = "celsius-to-fahrenheit";
pub const WORLD_TO_BUILDING_ID: &str = "world-to-building";

pub fn celsius_to_fahrenheit(degrees_c: f64) -> Result<f64, SpacesError> {
    if !degrees_c.is_finite() {
        return Err(SpacesError::NonFiniteInput);
    }
    Ok(degrees_c * 9.0 / 5.0 + 32.0)
}

pub fn fahrenheit_to_celsius(degrees_f: f64) -> Result<f64, SpacesError> {
    if !degrees_f.is_finite() {
        return Err(SpacesError::NonFiniteInput);
    }
    Ok((degrees_f - 32.0) * 5.0 / 9.0)
}

/// The room whose half-open box contains the point.
pub fn cartesian_to_room<'a>(point: &Cartesian3, floorplan: &'a BuildingGraph) -> Result<&'a str, SpacesError> {
    floorplan
        .room_of(point)
        .map(|r| r.id.as_str())
        .ok_or(SpacesError::OutsideFloorplan {
            x: point.x,
            y: point.y,
            z: point.z,
        })
}

fn temperature_map(value: &SpaceValue, f: impl Fn(f64) -> Result<f64, SpacesError>) -> Result<SpaceValue, TransformError> {
    match value {
        SpaceValue::Payload(PayloadValue::Temperature { degrees }) => {
            let mapped = f(*degrees).map_err(|_| TransformError::Undefined("non-finite temperature".into()))?;
            Ok(SpaceValue::Payload(PayloadValue::Temperature { degrees: mapped }))
        }
        _ => Err(TransformError::WrongValueShape),
    }
}

/// Metadata plus forward/inverse transforms for the Celsius↔Fahrenheit
/// mapping, ready to register.
pub fn celsius_transform_pair() -> (MappingFunction, Arc<dyn Transform>, Arc<dyn Transform>) {
    let meta = MappingFunction {
        mapping_id: CELSIUS_TO_FAHRENHEIT_ID.into(),
        from_space_id: SPACE_CELSIUS.into(),
        to_space_id: SPACE_FAHRENHEIT.into(),
        invertible: true,
        total: true,
    };
    let forward: Arc<dyn Transform> = Arc::new(|v: &SpaceValue| temperature_map(v, celsius_to_fahrenheit));
    let inverse: Arc<dyn Transform> = Arc::new(|v: &SpaceValue| temperature_map(v, fahrenheit_to_celsius));
    (meta, forward, inverse)
}

/// Partial, non-invertible mapping from world coordinates into the building
/// graph of the given floorplan.
pub fn world_to_building_mapping(floorplan: Arc<BuildingGraph>) -> (MappingFunction, Arc<dyn Transform>) {
    let meta = MappingFunction {
        mapping_id: WORLD_TO_BUILDING_ID.into(),
        from_space_id: SPACE_WORLD.into(),
        to_space_id: SPACE_BUILDING.into(),
        invertible: false,
        total: false,
    };
    let transform: Arc<dyn Transform> = Arc::new(move |v: &SpaceValue| match v {
        SpaceValue::Position(Place::Cartesian(p)) => match floorplan.room_of(p) {
            Some(room) => Ok(SpaceValue::Position(Place::Room { room_id: room.id.clone() })),
            None => Err(TransformError::Undefined(format!(
                "point ({}, {}, {}) lies outside the floorplan",
                p.x, p.y, p.z
            ))),
        },
        _ => Err(TransformError::WrongValueShape),
    });
    (meta, transform)
}
