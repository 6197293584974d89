//! Building graph: axis-aligned rooms with half-open extents plus an
//! adjacency relation. Half-open boxes make shared walls unambiguous.

use serde::Serialize;
use thiserror::Error;

use super::types::Cartesian3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloorplanError {
    #[error("floorplan has no rooms")]
    Empty,
    #[error("room {0} has an empty extent on axis {1}")]
    EmptyExtent(String, char),
    #[error("duplicate room id: {0}")]
    DuplicateRoom(String),
    #[error("rooms {0} and {1} overlap")]
    Overlap(String, String),
    #[error("adjacency references unknown room: {0}")]
    UnknownAdjacency(String),
}

/// Axis-aligned box, half-open on every axis: [min, max).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl BoxBounds {
    pub fn contains(&self, p: &Cartesian3) -> bool {
        p.x >= self.x_min
            && p.x < self.x_max
            && p.y >= self.y_min
            && p.y < self.y_max
            && p.z >= self.z_min
            && p.z < self.z_max
    }

    fn overlaps(&self, other: &BoxBounds) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.y_min < other.y_max
            && other.y_min < self.y_max
            && self.z_min < other.z_max
            && other.z_min < self.z_max
    }

    fn union(&self, other: &BoxBounds) -> BoxBounds {
        BoxBounds {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
            z_min: self.z_min.min(other.z_min),
            z_max: self.z_max.max(other.z_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Room {
    pub id: String,
    pub bounds: BoxBounds,
}

/// Rooms plus adjacency. Validated on construction: at least one room,
/// non-empty extents, unique ids, pairwise-disjoint boxes, known adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingGraph {
    rooms: Vec<Room>,
    adjacency: Vec<(String, String)>,
}

impl BuildingGraph {
    pub fn new(rooms: Vec<Room>, adjacency: Vec<(String, String)>) -> Result<Self, FloorplanError> {
        if rooms.is_empty() {
            return Err(FloorplanError::Empty);
        }
        for room in &rooms {
            let b = &room.bounds;
            for (lo, hi, axis) in [
                (b.x_min, b.x_max, 'x'),
                (b.y_min, b.y_max, 'y'),
                (b.z_min, b.z_max, 'z'),
            ] {
                if !(lo < hi) {
                    return Err(FloorplanError::EmptyExtent(room.id.clone(), axis));
                }
            }
        }
        for (i, a) in rooms.iter().enumerate() {
            for b in &rooms[i + 1..] {
                if a.id == b.id {
                    return Err(FloorplanError::DuplicateRoom(a.id.clone()));
                }
                if a.bounds.overlaps(&b.bounds) {
                    return Err(FloorplanError::Overlap(a.id.clone(), b.id.clone()));
                }
            }
        }
        for (a, b) in &adjacency {
            for id in [a, b] {
                if !rooms.iter().any(|r| &r.id == id) {
                    return Err(FloorplanError::UnknownAdjacency(id.clone()));
                }
            }
        }
        Ok(Self { rooms, adjacency })
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn adjacency(&self) -> &[(String, String)] {
        &self.adjacency
    }

    /// The room whose half-open box contains the point, if any.
    pub fn room_of(&self, p: &Cartesian3) -> Option<&Room> {
        self.rooms.iter().find(|r| r.bounds.contains(p))
    }

    pub fn contains(&self, p: &Cartesian3) -> bool {
        self.room_of(p).is_some()
    }

    /// Bounding volume of every room (used for event validation and as the
    /// default sound-source search volume).
    pub fn bounding_box(&self) -> BoxBounds {
        let mut bb = self.rooms[0].bounds;
        for r in &self.rooms[1..] {
            bb = bb.union(&r.bounds);
        }
        bb
    }

    pub fn neighbors(&self, room_id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        for (a, b) in &self.adjacency {
            if a == room_id {
                out.push(b.as_str());
            } else if b == room_id {
                out.push(a.as_str());
            }
        }
        out
    }
}
