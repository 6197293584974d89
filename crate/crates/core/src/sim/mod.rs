//! Scenario-driven synthetic sensor drivers with exportable ground truth.
//!
//! A scenario script places sensors in a floorplan, schedules them, and
//! scripts events (falls, music, footsteps). Drivers are pure functions of
//! (scenario, tick, per-sensor rng substream), so runs are reproducible
//! bit for bit from the scenario seed.

mod drivers;
mod scenario;
mod synth;

pub use drivers::{build_registry, sensor_rng};
pub use scenario::{
    load_scenario, AccelWaveformTemplate, EventKind, MicArrayModel, NoiseParams, Scenario, ScenarioError,
    ScenarioSensor, ScriptedEvent,
};
pub use synth::{
    accel_magnitude_g, fall_impact_tick, ground_truth_events, synth_accel_sample, synth_mic_frame,
    synth_temp_sample, GroundTruthEvent, MicFrame, SimError,
};
