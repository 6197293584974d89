//! Reference fruition-layer application: fall detection.
//!
//! Impacts come from the wearable accelerometer stream (freefall then
//! shock), sound events come from the microphone array (loudness threshold
//! plus TDOA height estimation), and fusion labels impacts corroborated
//! when a near-floor sound lands inside the fusion window.

mod eval;
mod fuse;
mod height;
mod impact;
mod sound;

pub use eval::{evaluate_against_truth, EvalReport};
pub use fuse::fuse_events;
pub use height::{estimate_source_height, predicted_offsets_us, HeightEstimate};
pub use impact::detect_impacts;
pub use sound::{detect_sound_events, SoundCandidate};

use serde::Serialize;
use thiserror::Error;

use crate::spaces::types::Cartesian3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FallsError {
    #[error("sample payload is not in the expected value space: expected {expected}, got {got}")]
    WrongPayloadSpace { expected: &'static str, got: String },
    #[error("samples must be sorted by time")]
    UnsortedInput,
    #[error("microphone array is degenerate: {0}")]
    DegenerateArray(String),
    #[error("search volume contains no cells")]
    EmptyVolume,
    #[error("got {got} arrival offsets for {mics} microphones")]
    OffsetCountMismatch { mics: usize, got: usize },
    #[error("invalid detector parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
}

/// What to do with an impact no sound corroborates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AccelOnlyPolicy {
    /// Raise a lower-confidence alarm.
    Suspected,
    /// Raise nothing.
    Suppressed,
}

/// Detection thresholds. These are configuration, not claims: every scenario
/// may override them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorParams {
    pub theta_freefall_g: f64,
    pub d_freefall_ms: f64,
    pub theta_impact_g: f64,
    pub max_gap_ms: f64,
    pub theta_loud_db: f64,
    pub refractory_ms: f64,
    pub h_floor_m: f64,
    pub fuse_window_s: f64,
    pub grid_resolution_m: f64,
    pub accel_only_policy: AccelOnlyPolicy,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            theta_freefall_g: 0.3,
            d_freefall_ms: 200.0,
            theta_impact_g: 2.5,
            max_gap_ms: 800.0,
            theta_loud_db: 70.0,
            refractory_ms: 500.0,
            h_floor_m: 0.5,
            fuse_window_s: 1.0,
            grid_resolution_m: 0.025,
            accel_only_policy: AccelOnlyPolicy::Suspected,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), FallsError> {
        let positives = [
            ("theta_freefall_g", self.theta_freefall_g),
            ("d_freefall_ms", self.d_freefall_ms),
            ("theta_impact_g", self.theta_impact_g),
            ("max_gap_ms", self.max_gap_ms),
            ("theta_loud_db", self.theta_loud_db),
            ("refractory_ms", self.refractory_ms),
            ("h_floor_m", self.h_floor_m),
            ("fuse_window_s", self.fuse_window_s),
            ("grid_resolution_m", self.grid_resolution_m),
        ];
        for (field, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                return Err(FallsError::InvalidParams {
                    field,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(self.theta_freefall_g < 1.0) {
            return Err(FallsError::InvalidParams {
                field: "theta_freefall_g",
                reason: "must be below 1 g".into(),
            });
        }
        if !(self.theta_impact_g > 1.0) {
            return Err(FallsError::InvalidParams {
                field: "theta_impact_g",
                reason: "must be above 1 g".into(),
            });
        }
        Ok(())
    }
}

/// An accelerometer impact preceded by freefall.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactEvent {
    pub t_s: f64,
    pub entity_id: String,
    pub peak_magnitude_g: f64,
    pub freefall_observed: bool,
}

/// A loud sound with its estimated source height.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundEvent {
    pub t_s: f64,
    pub loudness_db: f64,
    pub estimated_height_m: f64,
    /// Root-mean-square TDOA residual at the best cell, in µs.
    pub residual_us: f64,
    /// Best grid cell, kept for room attribution.
    pub position: Cartesian3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmConfidence {
    Corroborated,
    AccelOnly,
}

/// Fused fruition-layer output.
#[derive(Debug, Clone, PartialEq)]
pub struct FallAlarm {
    pub t_s: f64,
    pub entity_id: String,
    pub confidence: AlarmConfidence,
    /// Room of the corroborating sound source; a body-worn accelerometer
    /// alone carries no coordinates to look up.
    pub room: Option<String>,
}

#[derive(Serialize)]
struct WireAlarm<'a> {
    #[serde(rename = "type")]
    record_type: &'static str,
    t_s: f64,
    entity: &'a str,
    confidence: AlarmConfidence,
    room: Option<&'a str>,
}

impl FallAlarm {
    /// The alarm's JSONL wire form.
    pub fn to_wire_json(&self) -> String {
        serde_json::to_string(&WireAlarm {
            record_type: "fall_alarm",
            t_s: self.t_s,
            entity: &self.entity_id,
            confidence: self.confidence,
            room: self.room.as_deref(),
        })
        .expect("alarm serializes")
    }
}
