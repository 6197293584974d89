//! Scenario execution: wire the synthetic drivers into the kernel, pump the
//! raw stream through normalization, and run the fall pipeline over the
//! finished streams. Both the CLI runner and the service share this path.

use std::collections::BTreeMap;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use thiserror::Error;

use crate::falls::{
    detect_impacts, detect_sound_events, estimate_source_height, fuse_events, FallAlarm, FallsError,
    ImpactEvent, SoundEvent,
};
use crate::kernel::{
    build_schedule, bounded_event_queue, run_acquisition, CommandSource, KernelError, KernelEvent,
    OverflowPolicy, PacingMode, RunSummary, SamplingSchedule, SensorDescriptor, SensorRegistry, TickClock,
    DEFAULT_QUEUE_CAPACITY,
};
use crate::sim::{build_registry, Scenario};
use crate::spaces::standard::{standard_registry, VIEW_NATIVE};
use crate::spaces::types::{NormalizedSample, PayloadKind, Place};
use crate::spaces::{apply_view, normalize_sample, SpaceRegistry, SpacesError};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spaces(#[from] SpacesError),
    #[error(transparent)]
    Falls(#[from] FallsError),
}

/// Everything needed to execute one scenario.
pub struct ScenarioRuntime {
    pub scenario: Arc<Scenario>,
    pub registry: SensorRegistry,
    pub schedule: SamplingSchedule,
    pub spaces: Arc<SpaceRegistry>,
}

pub fn build_runtime(scenario: Arc<Scenario>) -> Result<ScenarioRuntime, RuntimeError> {
    let registry = build_registry(&scenario)?;
    let schedule = build_schedule(scenario.schedule_entries(), &registry)?;
    let mic_count = scenario.mic_array().map(|(_, m)| m.mic_positions.len()).unwrap_or(3);
    let spaces = Arc::new(standard_registry(Arc::clone(&scenario.floorplan), mic_count)?);
    Ok(ScenarioRuntime {
        scenario,
        registry,
        schedule,
        spaces,
    })
}

/// Finished-run artifacts.
pub struct PipelineOutput {
    /// Native normalized samples (ok fires only), in stream order.
    pub samples: Vec<NormalizedSample>,
    pub summary: RunSummary,
    pub impacts: Vec<ImpactEvent>,
    pub sounds: Vec<SoundEvent>,
    pub alarms: Vec<FallAlarm>,
}

/// Run the scenario to completion. The kernel runs on its own thread and
/// feeds the bounded queue; this thread normalizes each ok sample, hands it
/// to `on_sample` in stream order, and runs detection once the stream ends.
pub fn run_scenario(
    runtime: ScenarioRuntime,
    pacing: PacingMode,
    mut commands: impl CommandSource + Send,
    stop: &AtomicBool,
    mut on_sample: impl FnMut(u64, &NormalizedSample),
) -> Result<PipelineOutput, RuntimeError> {
    let ScenarioRuntime {
        scenario,
        mut registry,
        schedule,
        spaces,
    } = runtime;
    let descriptors: BTreeMap<String, SensorDescriptor> = registry
        .descriptors()
        .map(|d| (d.sensor_id.clone(), d.clone()))
        .collect();
    let quantum_us = scenario.tick_quantum_us;
    let duration = scenario.duration_ticks;

    let (mut writer, reader) = bounded_event_queue(DEFAULT_QUEUE_CAPACITY, OverflowPolicy::BlockProducer);
    let (samples, summary) = std::thread::scope(|scope| -> Result<_, RuntimeError> {
        let kernel = scope.spawn(move || -> Result<RunSummary, KernelError> {
            let mut clock = TickClock::new(quantum_us, pacing)?;
            run_acquisition(
                &mut registry,
                &schedule,
                &mut clock,
                duration,
                &mut commands,
                &mut writer,
                stop,
            )
        });

        let mut samples = Vec::new();
        let mut summary = None;
        for event in reader.iter() {
            match event {
                KernelEvent::Sample(raw) => {
                    if raw.status != crate::kernel::SampleStatus::Ok {
                        continue;
                    }
                    let descriptor = &descriptors[&*raw.sensor_id];
                    let normalized = normalize_sample(&raw, descriptor, quantum_us)?;
                    on_sample(raw.tick, &normalized);
                    samples.push(normalized);
                }
                KernelEvent::Summary(s) => {
                    summary = Some(s);
                    break;
                }
            }
        }
        let kernel_summary = kernel.join().expect("kernel thread must not panic")?;
        Ok((samples, summary.unwrap_or(kernel_summary)))
    })?;

    // Fruition stage over the finished stream: detectors consume only
    // view-applied (provenance-free) samples.
    let native = spaces.view(VIEW_NATIVE).expect("standard registry has the native view");
    let mut stripped = Vec::with_capacity(samples.len());
    for s in &samples {
        stripped.push(apply_view(s, native, &spaces)?);
    }

    let params = &scenario.detector;
    let mut by_entity: BTreeMap<&str, Vec<NormalizedSample>> = BTreeMap::new();
    let mut sound_frames = Vec::new();
    for s in &stripped {
        match s.payload.value.kind() {
            PayloadKind::Acceleration => {
                if let Place::Worn { entity_id, .. } = &s.position.place {
                    by_entity.entry(entity_id.as_str()).or_default().push(s.clone());
                }
            }
            PayloadKind::Sound => sound_frames.push(s.clone()),
            _ => {}
        }
    }

    let mut impacts = Vec::new();
    for (entity, stream) in &by_entity {
        impacts.extend(detect_impacts(entity, stream, params)?);
    }
    impacts.sort_by(|a, b| a.t_s.partial_cmp(&b.t_s).expect("finite times"));

    let mut sounds = Vec::new();
    if let Some((_, model)) = scenario.mic_array() {
        let volume = scenario.floorplan.bounding_box();
        for candidate in detect_sound_events(&sound_frames, params)? {
            let estimate = estimate_source_height(
                &model.mic_positions,
                &candidate.offsets_us,
                model.speed_of_sound_mps,
                &volume,
                params.grid_resolution_m,
            )?;
            sounds.push(SoundEvent {
                t_s: candidate.t_s,
                loudness_db: candidate.loudness_db,
                estimated_height_m: estimate.estimated_height_m,
                residual_us: estimate.residual_us,
                position: estimate.position,
            });
        }
    }

    let floorplan = Arc::clone(&scenario.floorplan);
    let alarms = fuse_events(&impacts, &sounds, params, |p| {
        floorplan.room_of(p).map(|r| r.id.clone())
    });

    Ok(PipelineOutput {
        samples,
        summary,
        impacts,
        sounds,
        alarms,
    })
}
