//! Synthetic signal models: the accelerometer fall template, analytic
//! microphone-array TDOA frames, and the constant-temperature channel.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::spaces::types::{Cartesian3, Place};

use super::scenario::{EventKind, MicArrayModel, Scenario, ScriptedEvent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no body-worn sensor is attached to entity {0}")]
    UnknownEntity(String),
}

/// One analytic microphone-array frame: arrival offsets relative to mic 0
/// plus the frame loudness at the array.
#[derive(Debug, Clone, PartialEq)]
pub struct MicFrame {
    pub offsets_us: Vec<f64>,
    pub loudness_db: f64,
}

/// A labeled ground-truth record for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthEvent {
    pub kind: EventKind,
    pub time_s: f64,
    pub position: Cartesian3,
    pub entity_id: Option<String>,
}

fn ms_to_ticks(ms: f64, quantum_us: u32) -> u64 {
    (ms * 1_000.0 / quantum_us as f64).round() as u64
}

/// The tick at which a fall event's body hits the floor (freefall end).
pub fn fall_impact_tick(event: &ScriptedEvent, scenario: &Scenario) -> u64 {
    event.t_start_ticks + ms_to_ticks(scenario.accel_template.freefall_duration_ms, scenario.tick_quantum_us)
}

/// Template magnitude for one entity at one tick: rest gravity, the
/// freefall dip, the impact spike decaying linearly back to rest, then
/// rest again through the settle phase.
pub fn accel_magnitude_g(scenario: &Scenario, entity_id: &str, tick: u64) -> f64 {
    let t = &scenario.accel_template;
    for event in &scenario.events {
        if event.kind != EventKind::Fall || event.entity_id.as_deref() != Some(entity_id) {
            continue;
        }
        let impact = fall_impact_tick(event, scenario);
        let width = ms_to_ticks(t.impact_width_ms, scenario.tick_quantum_us).max(1);
        if tick >= event.t_start_ticks && tick < impact {
            return t.freefall_magnitude_g;
        }
        if tick >= impact && tick < impact + width {
            let progress = (tick - impact) as f64 / width as f64;
            return t.impact_peak_g + (t.rest_magnitude_g - t.impact_peak_g) * progress;
        }
    }
    t.rest_magnitude_g
}

/// Device-frame acceleration in g for a worn accelerometer: the template
/// magnitude on the z axis plus independent zero-mean Gaussian noise per
/// channel, drawn from the caller's per-sensor stream.
pub fn synth_accel_sample(
    scenario: &Scenario,
    entity_id: &str,
    tick: u64,
    rng: &mut impl Rng,
) -> Result<[f64; 3], SimError> {
    if !scenario.worn_entities().contains(&entity_id) {
        return Err(SimError::UnknownEntity(entity_id.to_string()));
    }
    let magnitude = accel_magnitude_g(scenario, entity_id, tick);
    let sigma = scenario.noise.accel_sigma_g;
    let mut draw = || {
        let n: f64 = rng.sample(StandardNormal);
        n * sigma
    };
    Ok([draw(), draw(), magnitude + draw()])
}

/// Whether a scripted event is audible at `tick`, and where the bang comes
/// from. Falls ring at the impact, lasting the impact width; music plays
/// from its start until its duration (default: the rest of the run);
/// footsteps default to 100 ms.
fn sound_window(event: &ScriptedEvent, scenario: &Scenario) -> (u64, u64) {
    match event.kind {
        EventKind::Fall => {
            let start = fall_impact_tick(event, scenario);
            let width = ms_to_ticks(scenario.accel_template.impact_width_ms, scenario.tick_quantum_us).max(1);
            (start, start.saturating_add(width))
        }
        EventKind::Music => {
            let end = match event.duration_ticks {
                Some(d) => event.t_start_ticks.saturating_add(d),
                None => scenario.duration_ticks,
            };
            (event.t_start_ticks, end)
        }
        EventKind::Footstep => {
            let dur = event
                .duration_ticks
                .unwrap_or_else(|| ms_to_ticks(100.0, scenario.tick_quantum_us).max(1));
            (event.t_start_ticks, event.t_start_ticks.saturating_add(dur))
        }
    }
}

/// Analytic TDOA frame for the array at one tick. With an active source,
/// offset_i = (dist(mic_i, source) − dist(mic_0, source)) / c in µs plus
/// per-mic jitter (mic 0 is the reference and stays 0), and the loudness is
/// the source level attenuated by 20·log10 of the mic-0 distance. With no
/// active source the frame is the ambient floor with zero offsets. When
/// several sources are active the loudest at the array wins.
pub fn synth_mic_frame(scenario: &Scenario, model: &MicArrayModel, tick: u64, rng: &mut impl Rng) -> MicFrame {
    let mut active: Option<(&ScriptedEvent, f64, f64)> = None; // (event, mic0 distance, attenuated dB)
    for event in &scenario.events {
        let (start, end) = sound_window(event, scenario);
        if tick < start || tick >= end {
            continue;
        }
        let d0 = model.mic_positions[0].distance(&event.position).max(1e-6);
        let attenuated = event.loudness_db - 20.0 * d0.log10();
        let louder = match &active {
            None => true,
            Some((_, _, current)) => attenuated > *current,
        };
        if louder {
            active = Some((event, d0, attenuated));
        }
    }

    match active {
        None => MicFrame {
            offsets_us: vec![0.0; model.mic_positions.len()],
            loudness_db: model.loudness_floor_db,
        },
        Some((event, d0, loudness_db)) => {
            let c = model.speed_of_sound_mps;
            let sigma = scenario.noise.tdoa_jitter_us;
            let offsets_us = model
                .mic_positions
                .iter()
                .enumerate()
                .map(|(i, mic)| {
                    if i == 0 {
                        return 0.0;
                    }
                    let exact = (mic.distance(&event.position) - d0) / c * 1e6;
                    let jitter: f64 = rng.sample(StandardNormal);
                    exact + jitter * sigma
                })
                .collect();
            MicFrame { offsets_us, loudness_db }
        }
    }
}

/// Constant ambient temperature encoded through the descriptor's scale and
/// offset: counts = round((ambient − offset) / scale).
pub fn synth_temp_sample(ambient_c: f64, scale: f64, offset: f64) -> i64 {
    ((ambient_c - offset) / scale).round() as i64
}

/// One labeled record per scripted event, times in seconds, in time order.
pub fn ground_truth_events(scenario: &Scenario) -> Vec<GroundTruthEvent> {
    let mut out: Vec<GroundTruthEvent> = scenario
        .events
        .iter()
        .map(|e| GroundTruthEvent {
            kind: e.kind,
            time_s: scenario.tick_to_seconds(e.t_start_ticks),
            position: e.position,
            entity_id: e.entity_id.clone(),
        })
        .collect();
    out.sort_by(|a, b| a.time_s.partial_cmp(&b.time_s).expect("finite event times"));
    out
}

/// Entities referenced by worn sensors, for driver construction.
impl Scenario {
    pub(crate) fn entity_of_sensor(&self, sensor_id: &str) -> Option<&str> {
        self.sensors
            .iter()
            .find(|s| s.descriptor.sensor_id == sensor_id)
            .and_then(|s| match &s.descriptor.placement.place {
                Place::Worn { entity_id, .. } => Some(entity_id.as_str()),
                _ => None,
            })
    }
}
