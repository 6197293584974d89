//! Kernel drivers backed by the synthetic signal models.
//!
//! Each sensor gets an independent rng substream derived from the scenario
//! seed and the sensor's *index* in the scenario list, so renaming a sensor
//! never changes its stream and appending a sensor never perturbs the
//! others.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::{DriverFault, KernelError, SensorDriver, SensorKind, SensorRegistry};

use super::scenario::Scenario;
use super::synth::{synth_accel_sample, synth_mic_frame, synth_temp_sample};

/// The per-sensor rng substream: one ChaCha stream per sensor index, all
/// keyed by the scenario seed.
pub fn sensor_rng(seed: u64, sensor_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sensor_index as u64 + 1);
    rng
}

fn to_counts(value: f64, scale: f64, offset: f64) -> i64 {
    ((value - offset) / scale).round() as i64
}

/// Build a sensor registry with one synthetic driver per scenario sensor,
/// in scenario order.
pub fn build_registry(scenario: &Arc<Scenario>) -> Result<SensorRegistry, KernelError> {
    let mut registry = SensorRegistry::new();
    for (index, sensor) in scenario.sensors.iter().enumerate() {
        let descriptor = sensor.descriptor.clone();
        let scale = descriptor.scale;
        let offset = descriptor.offset;
        let rng = sensor_rng(scenario.seed, index);

        let driver: Box<dyn SensorDriver> = match descriptor.kind {
            SensorKind::Accelerometer => {
                let scenario = Arc::clone(scenario);
                let entity: Option<String> = scenario
                    .entity_of_sensor(&descriptor.sensor_id)
                    .map(|e| e.to_string());
                let mut rng = rng;
                Box::new(move |tick: u64| match &entity {
                    Some(entity_id) => {
                        let g = synth_accel_sample(&scenario, entity_id, tick, &mut rng)
                            .map_err(|e| DriverFault::new(e.to_string()))?;
                        Ok(g.iter().map(|&v| to_counts(v, scale, offset)).collect())
                    }
                    None => {
                        // A fixed accelerometer sees gravity plus noise.
                        use rand::Rng;
                        use rand_distr::StandardNormal;
                        let sigma = scenario.noise.accel_sigma_g;
                        let mut draw = || rng.sample::<f64, _>(StandardNormal) * sigma;
                        let g = [draw(), draw(), 1.0 + draw()];
                        Ok(g.iter().map(|&v| to_counts(v, scale, offset)).collect())
                    }
                })
            }
            SensorKind::MicrophoneArray => {
                let scenario = Arc::clone(scenario);
                let model = sensor.mic_model.clone().expect("mic sensors carry a model");
                let mut rng = rng;
                Box::new(move |tick: u64| {
                    let frame = synth_mic_frame(&scenario, &model, tick, &mut rng);
                    let mut counts: Vec<i64> = frame
                        .offsets_us
                        .iter()
                        .map(|&v| to_counts(v, scale, offset))
                        .collect();
                    counts.push(to_counts(frame.loudness_db, scale, offset));
                    Ok(counts)
                })
            }
            SensorKind::Thermometer => {
                let ambient = scenario.ambient_c;
                Box::new(move |_tick: u64| Ok(vec![synth_temp_sample(ambient, scale, offset)]))
            }
        };
        registry.register_driver(descriptor, driver)?;
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_schedule, run_acquisition, NoCommands, PacingMode, TickClock, VecSink};
    use std::sync::atomic::AtomicBool;

    fn scenario() -> Arc<Scenario> {
        let doc = serde_json::json!({
            "name": "drivers-test",
            "seed": 42,
            "duration_ticks": 2_000,
            "tick_quantum_us": 1_000,
            "floorplan": {
                "rooms": [
                    {"id": "kitchen", "x_min": 0.0, "x_max": 4.0, "y_min": 0.0, "y_max": 3.0, "z_min": 0.0, "z_max": 3.0}
                ]
            },
            "sensors": [
                {
                    "sensor_id": "wrist-1",
                    "kind": "accelerometer",
                    "scale": 0.001,
                    "placement": {"kind": "body_worn", "entity_id": "resident-1", "attachment": "wrist"},
                    "period_ticks": 20
                },
                {
                    "sensor_id": "temp-1",
                    "kind": "thermometer",
                    "scale": 0.01,
                    "placement": {"kind": "cartesian", "coords": [2.0, 1.0, 1.5]},
                    "period_ticks": 1_000
                }
            ],
            "ambient_c": 25.5,
            "noise": {"accel_sigma_g": 0.1, "tdoa_jitter_us": 0.0}
        });
        Arc::new(super::super::scenario::load_scenario(&doc.to_string()).unwrap())
    }

    fn run_once(s: &Arc<Scenario>) -> Vec<crate::kernel::RawSample> {
        let mut registry = build_registry(s).unwrap();
        let schedule = build_schedule(s.schedule_entries(), &registry).unwrap();
        let mut clock = TickClock::new(s.tick_quantum_us, PacingMode::Fast).unwrap();
        let mut sink = VecSink::new();
        run_acquisition(
            &mut registry,
            &schedule,
            &mut clock,
            s.duration_ticks,
            &mut NoCommands,
            &mut sink,
            &AtomicBool::new(false),
        )
        .unwrap();
        sink.samples().cloned().collect()
    }

    #[test]
    fn identical_scenarios_produce_identical_streams() {
        let s = scenario();
        assert_eq!(run_once(&s), run_once(&s));
    }

    #[test]
    fn thermometer_counts_encode_the_ambient() {
        let s = scenario();
        let samples = run_once(&s);
        let temp: Vec<_> = samples.iter().filter(|x| &*x.sensor_id == "temp-1").collect();
        assert_eq!(temp.len(), 2);
        assert!(temp.iter().all(|x| x.values == vec![2_550]));
    }

    #[test]
    fn substreams_are_keyed_by_index_not_id() {
        let s = scenario();
        let baseline = run_once(&s);

        // Same scenario with the accelerometer renamed: its values must not
        // change (only the id labels do).
        let doc = serde_json::json!({
            "name": "drivers-test",
            "seed": 42,
            "duration_ticks": 2_000,
            "tick_quantum_us": 1_000,
            "floorplan": {
                "rooms": [
                    {"id": "kitchen", "x_min": 0.0, "x_max": 4.0, "y_min": 0.0, "y_max": 3.0, "z_min": 0.0, "z_max": 3.0}
                ]
            },
            "sensors": [
                {
                    "sensor_id": "renamed-accel",
                    "kind": "accelerometer",
                    "scale": 0.001,
                    "placement": {"kind": "body_worn", "entity_id": "resident-1", "attachment": "wrist"},
                    "period_ticks": 20
                },
                {
                    "sensor_id": "temp-1",
                    "kind": "thermometer",
                    "scale": 0.01,
                    "placement": {"kind": "cartesian", "coords": [2.0, 1.0, 1.5]},
                    "period_ticks": 1_000
                }
            ],
            "ambient_c": 25.5,
            "noise": {"accel_sigma_g": 0.1, "tdoa_jitter_us": 0.0}
        });
        let renamed = Arc::new(super::super::scenario::load_scenario(&doc.to_string()).unwrap());
        let renamed_samples = run_once(&renamed);

        let values = |samples: &[crate::kernel::RawSample], id: &str| -> Vec<Vec<i64>> {
            samples.iter().filter(|x| &*x.sensor_id == id).map(|x| x.values.clone()).collect()
        };
        assert_eq!(values(&baseline, "wrist-1"), values(&renamed_samples, "renamed-accel"));
        assert_eq!(values(&baseline, "temp-1"), values(&renamed_samples, "temp-1"));
    }
}
