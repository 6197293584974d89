//! Forward-model oracles for the fall-detection stages, plus end-to-end
//! source agnosticism of the pipeline.

use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use tana_core::falls::{estimate_source_height, predicted_offsets_us};
use tana_core::kernel::{NoCommands, PacingMode};
use tana_core::runtime::{build_runtime, run_scenario};
use tana_core::sim::load_scenario;
use tana_core::spaces::floorplan::BoxBounds;
use tana_core::Cartesian3;

fn wall_array() -> Vec<Cartesian3> {
    vec![
        Cartesian3::new(0.0, 0.0, 0.5),
        Cartesian3::new(0.0, 0.0, 1.0),
        Cartesian3::new(0.0, 0.0, 1.5),
    ]
}

fn search_volume() -> BoxBounds {
    BoxBounds {
        x_min: 0.0,
        x_max: 4.5,
        y_min: -1.0,
        y_max: 1.0,
        z_min: 0.0,
        z_max: 2.0,
    }
}

/// Height-estimator consistency: jitterless sources *on the search grid*
/// come back within one grid cell over a 15-point height sweep at ranges
/// 1–4 m.
#[test]
fn on_grid_height_sweep_recovers_every_height() {
    let mics = wall_array();
    let volume = search_volume();
    let resolution = 0.025;
    // Cell centers sit at odd multiples of 0.0125; pick 15 of them spanning
    // 0.1–1.8 m and three ranges.
    let heights: Vec<f64> = (0..15).map(|k| 0.1125 + k as f64 * 0.1208).map(|h| {
        // snap to the nearest cell center
        let idx = ((h - volume.z_min) / resolution).floor();
        volume.z_min + idx * resolution + resolution / 2.0
    }).collect();
    for &range in &[1.0125, 2.5125, 3.9875] {
        for &h in &heights {
            let truth = Cartesian3::new(range, 0.0125, h);
            let offsets = predicted_offsets_us(&mics, &truth, 343.0);
            let est = estimate_source_height(&mics, &offsets, 343.0, &volume, resolution).unwrap();
            assert!(
                (est.estimated_height_m - h).abs() <= resolution + 1e-9,
                "range {range}, height {h}: estimated {}",
                est.estimated_height_m
            );
        }
    }
}

/// The residual at the true cell of a jitterless source is numerically zero.
#[test]
fn residual_is_zero_at_the_truth_cell() {
    let mics = wall_array();
    let truth = Cartesian3::new(1.5125, 0.0125, 0.7125);
    let offsets = predicted_offsets_us(&mics, &truth, 343.0);
    let est = estimate_source_height(&mics, &offsets, 343.0, &search_volume(), 0.025).unwrap();
    assert!(est.residual_us <= 1e-6, "residual {} µs", est.residual_us);
}

fn noisy_fall_doc(accel_id: &str, mic_id: &str) -> String {
    serde_json::json!({
        "name": "agnosticism",
        "seed": 42,
        "duration_ticks": 12_000,
        "tick_quantum_us": 1_000,
        "floorplan": {
            "rooms": [
                {"id": "kitchen", "x_min": 0.0, "x_max": 4.0, "y_min": 0.0, "y_max": 3.0, "z_min": 0.0, "z_max": 2.5}
            ]
        },
        "sensors": [
            {
                "sensor_id": accel_id,
                "kind": "accelerometer",
                "scale": 0.001,
                "placement": {"kind": "body_worn", "entity_id": "resident-1", "attachment": "wrist"},
                "period_ticks": 20
            },
            {
                "sensor_id": mic_id,
                "kind": "microphone-array",
                "scale": 1.0,
                "placement": {"kind": "cartesian", "coords": [0.05, 1.5, 1.0]},
                "period_ticks": 25
            }
        ],
        "events": [
            {"kind": "fall", "t_start_ticks": 5_000, "position": [2.0, 1.0, 0.2], "loudness_db": 85.0, "entity_id": "resident-1"}
        ]
    })
    .to_string()
}

/// Renaming every sensor_id leaves the alarm lines byte-identical, even
/// with default (non-zero) noise: the detector sees only normalized
/// samples and the noise substreams key off sensor position, not name.
#[test]
fn alarms_are_source_agnostic_under_rename() {
    let run = |doc: &str| {
        let scenario = Arc::new(load_scenario(doc).unwrap());
        let runtime = build_runtime(scenario).unwrap();
        let out = run_scenario(runtime, PacingMode::Fast, NoCommands, &AtomicBool::new(false), |_, _| {}).unwrap();
        out.alarms.iter().map(|a| a.to_wire_json()).collect::<Vec<_>>()
    };
    let baseline = run(&noisy_fall_doc("wrist-1", "array-1"));
    let renamed = run(&noisy_fall_doc("totally-different", "mic-bank-9"));
    assert!(!baseline.is_empty(), "the noisy fall scenario must alarm");
    assert_eq!(baseline, renamed);
}

/// The noisy fall still corroborates: jitter at the default 20 µs moves the
/// height estimate well under the 0.5 m floor gate.
#[test]
fn noisy_fall_corroborates() {
    let scenario = Arc::new(load_scenario(&noisy_fall_doc("wrist-1", "array-1")).unwrap());
    let runtime = build_runtime(scenario).unwrap();
    let out = run_scenario(runtime, PacingMode::Fast, NoCommands, &AtomicBool::new(false), |_, _| {}).unwrap();
    assert_eq!(out.alarms.len(), 1);
    assert!(out.sounds.iter().any(|s| s.estimated_height_m <= 0.5));
}
