//! The acquisition loop: advances the tick clock, fires due entries in
//! ascending sensor_id order, applies queued rate commands at tick
//! boundaries, and emits a totally ordered raw-sample stream capped by a
//! run summary.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crossbeam_channel::{Receiver, Sender};
use serde::Serialize;

use super::{
    EventSink, KernelError, SamplingSchedule, SensorRegistry, SinkError, TickClock,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStatus {
    Ok,
    DriverFault,
}

/// One timed reading from one sensor driver, in raw device counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub sensor_id: Arc<str>,
    pub tick: u64,
    /// Counts only ok samples; a faulted fire carries the value the next ok
    /// sample will use, so ok sequences stay gapless.
    pub sequence_no: u64,
    pub values: Vec<i64>,
    pub status: SampleStatus,
}

/// Request to change one sensor's period at its next fire boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCommand {
    pub sensor_id: String,
    pub new_period_ticks: u32,
    pub issued_at_tick: u64,
}

/// What a rate command resolved to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateAck {
    pub sensor_id: String,
    pub applied_period_ticks: u32,
    /// The fire tick the new period is anchored to. That fire still lands on
    /// the old grid; every later fire is new-period spaced from it.
    pub effective_from_tick: u64,
}

/// Per-run accounting, emitted as the final record of every stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub ticks_elapsed: u64,
    pub samples_per_sensor: BTreeMap<String, u64>,
    pub faults_per_sensor: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct WireSummary<'a> {
    #[serde(rename = "type")]
    record_type: &'static str,
    ticks_elapsed: u64,
    samples_per_sensor: &'a BTreeMap<String, u64>,
    faults_per_sensor: &'a BTreeMap<String, u64>,
}

impl RunSummary {
    /// The summary's JSONL wire form, the final line of every run.
    pub fn to_wire_json(&self) -> String {
        serde_json::to_string(&WireSummary {
            record_type: "run_summary",
            ticks_elapsed: self.ticks_elapsed,
            samples_per_sensor: &self.samples_per_sensor,
            faults_per_sensor: &self.faults_per_sensor,
        })
        .expect("summary serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelEvent {
    Sample(RawSample),
    Summary(RunSummary),
}

/// A rate command plus an optional reply slot for the resolved ack.
pub struct CommandEnvelope {
    pub command: RateCommand,
    pub reply: Option<Sender<Result<RateAck, KernelError>>>,
}

impl CommandEnvelope {
    pub fn fire_and_forget(command: RateCommand) -> Self {
        Self { command, reply: None }
    }
}

/// Where rate commands come from. Drained once per tick at the boundary;
/// commands issued during tick t become visible at the boundary of t+1.
pub trait CommandSource {
    fn drain(&mut self, boundary_tick: u64) -> Vec<CommandEnvelope>;
}

/// No runtime rate control.
pub struct NoCommands;

impl CommandSource for NoCommands {
    fn drain(&mut self, _boundary_tick: u64) -> Vec<CommandEnvelope> {
        Vec::new()
    }
}

/// A fixed command trace for deterministic runs and tests.
pub struct ScriptedCommands {
    commands: Vec<RateCommand>,
    cursor: usize,
}

impl ScriptedCommands {
    pub fn new(mut commands: Vec<RateCommand>) -> Self {
        commands.sort_by_key(|c| c.issued_at_tick);
        Self { commands, cursor: 0 }
    }
}

impl CommandSource for ScriptedCommands {
    fn drain(&mut self, boundary_tick: u64) -> Vec<CommandEnvelope> {
        let mut out = Vec::new();
        while self.cursor < self.commands.len() && self.commands[self.cursor].issued_at_tick < boundary_tick {
            out.push(CommandEnvelope::fire_and_forget(self.commands[self.cursor].clone()));
            self.cursor += 1;
        }
        out
    }
}

/// Commands arriving live from other threads (the service pathway).
pub struct ChannelCommands {
    rx: Receiver<CommandEnvelope>,
}

impl ChannelCommands {
    pub fn new(rx: Receiver<CommandEnvelope>) -> Self {
        Self { rx }
    }
}

impl CommandSource for ChannelCommands {
    fn drain(&mut self, _boundary_tick: u64) -> Vec<CommandEnvelope> {
        self.rx.try_iter().collect()
    }
}

/// Collects events in memory; never full.
#[derive(Default)]
pub struct VecSink {
    pub events: Vec<KernelEvent>,
}

impl VecSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> impl Iterator<Item = &RawSample> {
        self.events.iter().filter_map(|e| match e {
            KernelEvent::Sample(s) => Some(s),
            KernelEvent::Summary(_) => None,
        })
    }
}

impl EventSink for VecSink {
    fn emit(&mut self, event: KernelEvent) -> Result<(), SinkError> {
        self.events.push(event);
        Ok(())
    }
}

struct PendingSwitch {
    period: u32,
    at_fire_tick: u64,
}

struct EntryState {
    sensor_id: Arc<str>,
    enabled: bool,
    period: u64,
    next_fire: u64,
    pending: Option<PendingSwitch>,
    min_period: u32,
    max_period: u32,
    ok_seq: u64,
    fault_count: u64,
}

/// Live schedule state during a run. Owns the boundary semantics of rate
/// commands so they can be tested without spinning the whole loop.
pub struct ScheduleRuntime {
    entries: Vec<EntryState>,
}

impl ScheduleRuntime {
    pub fn new(schedule: &SamplingSchedule, registry: &SensorRegistry) -> Self {
        let entries = schedule
            .entries()
            .iter()
            .map(|e| {
                let descriptor = registry
                    .descriptor(&e.sensor_id)
                    .expect("schedule validated against this registry");
                EntryState {
                    sensor_id: e.sensor_id.as_str().into(),
                    enabled: e.enabled,
                    period: e.period_ticks as u64,
                    next_fire: e.phase_ticks as u64,
                    pending: None,
                    min_period: descriptor.min_period_ticks,
                    max_period: descriptor.max_period_ticks,
                    ok_seq: 0,
                    fault_count: 0,
                }
            })
            .collect();
        Self { entries }
    }

    /// Arm a period switch at the entry's next fire strictly after the
    /// command's issue tick. That fire happens at its old-grid position;
    /// the new period takes over from it, re-anchoring the phase.
    pub fn apply_rate_command(&mut self, cmd: &RateCommand) -> Result<RateAck, KernelError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| &*e.sensor_id == cmd.sensor_id.as_str())
            .ok_or_else(|| KernelError::UnknownSensor(cmd.sensor_id.clone()))?;
        if cmd.new_period_ticks < entry.min_period || cmd.new_period_ticks > entry.max_period {
            return Err(KernelError::PeriodOutOfBounds {
                sensor_id: cmd.sensor_id.clone(),
                period: cmd.new_period_ticks,
                min: entry.min_period,
                max: entry.max_period,
            });
        }
        let mut switch_tick = entry.next_fire;
        if switch_tick <= cmd.issued_at_tick {
            let behind = cmd.issued_at_tick - switch_tick;
            switch_tick += (behind / entry.period + 1) * entry.period;
        }
        entry.pending = Some(PendingSwitch {
            period: cmd.new_period_ticks,
            at_fire_tick: switch_tick,
        });
        Ok(RateAck {
            sensor_id: cmd.sensor_id.clone(),
            applied_period_ticks: cmd.new_period_ticks,
            effective_from_tick: switch_tick,
        })
    }

    fn due(&self, tick: u64) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.enabled && e.next_fire == tick)
            .map(|(i, _)| i)
            .collect()
    }

    fn advance_after_fire(&mut self, idx: usize, tick: u64) {
        let entry = &mut self.entries[idx];
        if let Some(pending) = &entry.pending {
            if pending.at_fire_tick <= tick {
                entry.period = pending.period as u64;
                entry.pending = None;
            }
        }
        entry.next_fire = tick + entry.period;
    }
}

/// Run the kernel for `duration_ticks` ticks (or until `stop` is raised).
///
/// Driver faults are captured as fault-status samples and never abort the
/// run. The returned summary is also emitted in-band as the final event.
pub fn run_acquisition(
    registry: &mut SensorRegistry,
    schedule: &SamplingSchedule,
    clock: &mut TickClock,
    duration_ticks: u64,
    commands: &mut dyn CommandSource,
    sink: &mut dyn EventSink,
    stop: &AtomicBool,
) -> Result<RunSummary, KernelError> {
    let mut runtime = ScheduleRuntime::new(schedule, registry);
    let mut ticks_elapsed = 0u64;

    while clock.current_tick() < duration_ticks {
        if stop.load(Ordering::Relaxed) {
            break;
        }
        clock.pace();
        let tick = clock.current_tick();

        for envelope in commands.drain(tick) {
            let result = runtime.apply_rate_command(&envelope.command);
            if let Err(err) = &result {
                log::warn!("rate command for {} rejected: {err}", envelope.command.sensor_id);
            }
            if let Some(reply) = envelope.reply {
                let _ = reply.send(result);
            }
        }

        for idx in runtime.due(tick) {
            let sensor_id = Arc::clone(&runtime.entries[idx].sensor_id);
            let sensor = registry
                .sensors
                .iter_mut()
                .find(|s| s.sensor_id == sensor_id)
                .expect("schedule validated against this registry");
            let sample = match sensor.driver.sample(tick) {
                Ok(values) => {
                    let seq = runtime.entries[idx].ok_seq;
                    runtime.entries[idx].ok_seq += 1;
                    RawSample {
                        sensor_id: Arc::clone(&sensor_id),
                        tick,
                        sequence_no: seq,
                        values,
                        status: SampleStatus::Ok,
                    }
                }
                Err(fault) => {
                    log::debug!("driver fault on {sensor_id} at tick {tick}: {}", fault.reason);
                    runtime.entries[idx].fault_count += 1;
                    RawSample {
                        sensor_id: Arc::clone(&sensor_id),
                        tick,
                        sequence_no: runtime.entries[idx].ok_seq,
                        values: Vec::new(),
                        status: SampleStatus::DriverFault,
                    }
                }
            };
            sink.emit(KernelEvent::Sample(sample))?;
            runtime.advance_after_fire(idx, tick);
        }

        clock.advance();
        ticks_elapsed += 1;
    }

    let mut summary = RunSummary {
        ticks_elapsed,
        ..RunSummary::default()
    };
    for descriptor in registry.descriptors() {
        summary.samples_per_sensor.insert(descriptor.sensor_id.clone(), 0);
        summary.faults_per_sensor.insert(descriptor.sensor_id.clone(), 0);
    }
    for entry in &runtime.entries {
        summary.samples_per_sensor.insert(entry.sensor_id.to_string(), entry.ok_seq);
        summary.faults_per_sensor.insert(entry.sensor_id.to_string(), entry.fault_count);
    }
    sink.emit(KernelEvent::Summary(summary.clone()))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_schedule, expected_sample_count, PacingMode, ScheduleEntry, SensorDescriptor, SensorKind};
    use crate::spaces::types::Position;

    fn descriptor(id: &str) -> SensorDescriptor {
        SensorDescriptor {
            sensor_id: id.into(),
            kind: SensorKind::Accelerometer,
            channel_count: 3,
            native_unit: "count".into(),
            scale: 0.001,
            offset: 0.0,
            placement: Position::worn("worn", "resident-1", "wrist"),
            min_period_ticks: 1,
            max_period_ticks: 10_000,
        }
    }

    fn run_collect(
        registry: &mut SensorRegistry,
        entries: Vec<ScheduleEntry>,
        duration: u64,
        commands: &mut dyn CommandSource,
    ) -> (Vec<RawSample>, RunSummary) {
        let schedule = build_schedule(entries, registry).unwrap();
        let mut clock = TickClock::new(1_000, PacingMode::Fast).unwrap();
        let mut sink = VecSink::new();
        let stop = AtomicBool::new(false);
        let summary =
            run_acquisition(registry, &schedule, &mut clock, duration, commands, &mut sink, &stop).unwrap();
        let samples = sink.samples().cloned().collect();
        (samples, summary)
    }

    #[test]
    fn fifty_hz_run_emits_exactly_the_expected_count() {
        // 50 Hz over 10 000 ticks at 1 ms quantum: the counting oracle says 500.
        let oracle = expected_sample_count(20, 0, 10_000);
        assert_eq!(oracle, 500);

        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000])))
            .unwrap();
        let (samples, summary) =
            run_collect(&mut reg, vec![ScheduleEntry::new("wrist-1", 20, 0)], 10_000, &mut NoCommands);

        assert_eq!(samples.len() as u64, oracle);
        assert!(samples.iter().all(|s| s.status == SampleStatus::Ok));
        let seqs: Vec<u64> = samples.iter().map(|s| s.sequence_no).collect();
        assert_eq!(seqs, (0..500).collect::<Vec<u64>>());
        assert_eq!(summary.samples_per_sensor["wrist-1"], 500);
        assert_eq!(summary.ticks_elapsed, 10_000);
    }

    #[test]
    fn same_tick_fires_are_ordered_by_sensor_id() {
        let mut reg = SensorRegistry::new();
        // Register out of lexicographic order on purpose.
        reg.register_driver(descriptor("zeta"), Box::new(|_t: u64| Ok(vec![0, 0, 0]))).unwrap();
        reg.register_driver(descriptor("alpha"), Box::new(|_t: u64| Ok(vec![0, 0, 0]))).unwrap();
        let (samples, _) = run_collect(
            &mut reg,
            vec![ScheduleEntry::new("zeta", 10, 0), ScheduleEntry::new("alpha", 10, 0)],
            20,
            &mut NoCommands,
        );
        assert_eq!(samples.len(), 4);
        assert_eq!(&*samples[0].sensor_id, "alpha");
        assert_eq!(&*samples[1].sensor_id, "zeta");
        assert_eq!(samples[0].tick, samples[1].tick);
    }

    #[test]
    fn faulting_driver_is_captured_and_ok_sequences_stay_gapless() {
        // Driver faults on every 3rd call. 9 fires: direct enumeration says
        // calls 3, 6, 9 fault, so 6 ok + 3 faulted samples.
        let mut calls = 0u64;
        let mut reg = SensorRegistry::new();
        reg.register_driver(
            descriptor("flaky"),
            Box::new(move |_t: u64| {
                calls += 1;
                if calls % 3 == 0 {
                    Err(crate::kernel::DriverFault::new("injected"))
                } else {
                    Ok(vec![0, 0, 1_000])
                }
            }),
        )
        .unwrap();
        let (samples, summary) = run_collect(&mut reg, vec![ScheduleEntry::new("flaky", 10, 0)], 90, &mut NoCommands);

        assert_eq!(samples.len(), 9);
        let ok: Vec<&RawSample> = samples.iter().filter(|s| s.status == SampleStatus::Ok).collect();
        let faulty: Vec<&RawSample> = samples.iter().filter(|s| s.status == SampleStatus::DriverFault).collect();
        assert_eq!(ok.len(), 6);
        assert_eq!(faulty.len(), 3);
        assert!(faulty.iter().all(|s| s.values.is_empty()));
        let seqs: Vec<u64> = ok.iter().map(|s| s.sequence_no).collect();
        assert_eq!(seqs, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(summary.samples_per_sensor["flaky"], 6);
        assert_eq!(summary.faults_per_sensor["flaky"], 3);
    }

    #[test]
    fn rate_command_switches_at_the_next_fire_after_issue() {
        // Period 20, phase 0; command to period 10 issued at tick 47.
        // Expected fire set by direct enumeration: old grid through the
        // switch fire at 60, then 70, 80, 90.
        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let mut commands = ScriptedCommands::new(vec![RateCommand {
            sensor_id: "wrist-1".into(),
            new_period_ticks: 10,
            issued_at_tick: 47,
        }]);
        let (samples, _) = run_collect(&mut reg, vec![ScheduleEntry::new("wrist-1", 20, 0)], 100, &mut commands);
        let fires: Vec<u64> = samples.iter().map(|s| s.tick).collect();
        assert_eq!(fires, vec![0, 20, 40, 60, 70, 80, 90]);
    }

    #[test]
    fn command_with_the_current_period_only_reanchors() {
        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let mut commands = ScriptedCommands::new(vec![RateCommand {
            sensor_id: "wrist-1".into(),
            new_period_ticks: 20,
            issued_at_tick: 30,
        }]);
        let (samples, _) = run_collect(&mut reg, vec![ScheduleEntry::new("wrist-1", 20, 5)], 120, &mut commands);
        let fires: Vec<u64> = samples.iter().map(|s| s.tick).collect();
        assert_eq!(fires, vec![5, 25, 45, 65, 85, 105]);
    }

    #[test]
    fn out_of_bounds_command_is_rejected() {
        let mut d = descriptor("wrist-1");
        d.min_period_ticks = 10;
        let mut reg = SensorRegistry::new();
        reg.register_driver(d, Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let schedule = build_schedule(vec![ScheduleEntry::new("wrist-1", 20, 0)], &reg).unwrap();
        let mut runtime = ScheduleRuntime::new(&schedule, &reg);
        let err = runtime
            .apply_rate_command(&RateCommand {
                sensor_id: "wrist-1".into(),
                new_period_ticks: 5,
                issued_at_tick: 0,
            })
            .unwrap_err();
        assert!(matches!(err, KernelError::PeriodOutOfBounds { period: 5, min: 10, .. }));
    }

    #[test]
    fn ack_reports_the_switch_fire() {
        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let schedule = build_schedule(vec![ScheduleEntry::new("wrist-1", 20, 0)], &reg).unwrap();
        let mut runtime = ScheduleRuntime::new(&schedule, &reg);
        let ack = runtime
            .apply_rate_command(&RateCommand {
                sensor_id: "wrist-1".into(),
                new_period_ticks: 10,
                issued_at_tick: 47,
            })
            .unwrap();
        assert_eq!(ack.applied_period_ticks, 10);
        assert_eq!(ack.effective_from_tick, 60);
    }

    #[test]
    fn disabled_entries_never_fire() {
        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let mut entry = ScheduleEntry::new("wrist-1", 10, 0);
        entry.enabled = false;
        let (samples, summary) = run_collect(&mut reg, vec![entry], 100, &mut NoCommands);
        assert!(samples.is_empty());
        assert_eq!(summary.samples_per_sensor["wrist-1"], 0);
    }

    #[test]
    fn stop_flag_ends_the_run_with_a_summary() {
        let mut reg = SensorRegistry::new();
        reg.register_driver(descriptor("wrist-1"), Box::new(|_t: u64| Ok(vec![0, 0, 1_000]))).unwrap();
        let schedule = build_schedule(vec![ScheduleEntry::new("wrist-1", 10, 0)], &reg).unwrap();
        let mut clock = TickClock::new(1_000, PacingMode::Fast).unwrap();
        let mut sink = VecSink::new();
        let stop = AtomicBool::new(true);
        let summary = run_acquisition(
            &mut reg,
            &schedule,
            &mut clock,
            1_000,
            &mut NoCommands,
            &mut sink,
            &stop,
        )
        .unwrap();
        assert_eq!(summary.ticks_elapsed, 0);
        assert!(matches!(sink.events.last(), Some(KernelEvent::Summary(_))));
    }
}
