//! Sampling schedules: which sensor fires when.

use super::{KernelError, SensorRegistry};

/// One sensor's firing rule: fires at every tick t ≥ phase with
/// (t − phase) mod period = 0, while enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub sensor_id: String,
    pub period_ticks: u32,
    pub phase_ticks: u32,
    pub enabled: bool,
}

impl ScheduleEntry {
    pub fn new(sensor_id: impl Into<String>, period_ticks: u32, phase_ticks: u32) -> Self {
        Self {
            sensor_id: sensor_id.into(),
            period_ticks,
            phase_ticks,
            enabled: true,
        }
    }
}

/// The smallest tick strictly after `now` at which the entry fires.
pub fn next_fire_tick(entry: &ScheduleEntry, now: u64) -> Result<u64, KernelError> {
    if !entry.enabled {
        return Err(KernelError::DisabledEntry(entry.sensor_id.clone()));
    }
    let phase = entry.phase_ticks as u64;
    let period = entry.period_ticks as u64;
    if now < phase {
        return Ok(phase);
    }
    Ok(phase + ((now - phase) / period + 1) * period)
}

/// |{k ≥ 0 : phase + k·period < duration}| — how many fires a constant
/// schedule produces over a run.
pub fn expected_sample_count(period_ticks: u64, phase_ticks: u64, duration_ticks: u64) -> u64 {
    if duration_ticks <= phase_ticks {
        return 0;
    }
    (duration_ticks - 1 - phase_ticks) / period_ticks + 1
}

/// A validated set of schedule entries, held in ascending sensor_id order so
/// that same-tick fires are emitted deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule {
    entries: Vec<ScheduleEntry>,
}

impl SamplingSchedule {
    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn entry(&self, sensor_id: &str) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.sensor_id == sensor_id)
    }
}

/// Validate entries against the registry: every sensor known, at most one
/// entry per sensor, periods inside descriptor bounds, phase below period.
pub fn build_schedule(entries: Vec<ScheduleEntry>, registry: &SensorRegistry) -> Result<SamplingSchedule, KernelError> {
    let mut validated: Vec<ScheduleEntry> = Vec::with_capacity(entries.len());
    for entry in entries {
        let descriptor = registry
            .descriptor(&entry.sensor_id)
            .ok_or_else(|| KernelError::UnknownSensor(entry.sensor_id.clone()))?;
        if validated.iter().any(|e| e.sensor_id == entry.sensor_id) {
            return Err(KernelError::DuplicateEntry(entry.sensor_id.clone()));
        }
        if entry.period_ticks < descriptor.min_period_ticks || entry.period_ticks > descriptor.max_period_ticks {
            return Err(KernelError::PeriodOutOfBounds {
                sensor_id: entry.sensor_id.clone(),
                period: entry.period_ticks,
                min: descriptor.min_period_ticks,
                max: descriptor.max_period_ticks,
            });
        }
        if entry.phase_ticks >= entry.period_ticks {
            return Err(KernelError::PhaseOutOfRange {
                sensor_id: entry.sensor_id.clone(),
                phase: entry.phase_ticks,
                period: entry.period_ticks,
            });
        }
        validated.push(entry);
    }
    validated.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id));
    Ok(SamplingSchedule { entries: validated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{SensorDriver, SensorKind};
    use crate::spaces::types::Position;

    fn registry_with(ids: &[&str]) -> SensorRegistry {
        let mut reg = SensorRegistry::new();
        for id in ids {
            let d = crate::kernel::SensorDescriptor {
                sensor_id: (*id).into(),
                kind: SensorKind::Accelerometer,
                channel_count: 3,
                native_unit: "count".into(),
                scale: 0.001,
                offset: 0.0,
                placement: Position::worn("worn", "resident-1", "wrist"),
                min_period_ticks: 1,
                max_period_ticks: 10_000,
            };
            let driver: Box<dyn SensorDriver> = Box::new(|_t: u64| Ok(vec![0, 0, 1_000]));
            reg.register_driver(d, driver).unwrap();
        }
        reg
    }

    #[test]
    fn fifty_hz_schedule_validates() {
        // Period 20 at a 1 ms quantum is 50 Hz.
        let reg = registry_with(&["wrist-1"]);
        let schedule = build_schedule(vec![ScheduleEntry::new("wrist-1", 20, 0)], &reg).unwrap();
        assert_eq!(schedule.entries().len(), 1);
        assert_eq!(schedule.entry("wrist-1").unwrap().period_ticks, 20);
    }

    #[test]
    fn zero_period_is_out_of_bounds() {
        let reg = registry_with(&["wrist-1"]);
        let err = build_schedule(vec![ScheduleEntry::new("wrist-1", 0, 0)], &reg).unwrap_err();
        assert!(matches!(err, KernelError::PeriodOutOfBounds { period: 0, .. }));
    }

    #[test]
    fn duplicate_entries_are_rejected() {
        let reg = registry_with(&["wrist-1"]);
        let err = build_schedule(
            vec![ScheduleEntry::new("wrist-1", 20, 0), ScheduleEntry::new("wrist-1", 10, 0)],
            &reg,
        )
        .unwrap_err();
        assert_eq!(err, KernelError::DuplicateEntry("wrist-1".into()));
    }

    #[test]
    fn unknown_sensor_is_rejected() {
        let reg = registry_with(&["wrist-1"]);
        let err = build_schedule(vec![ScheduleEntry::new("ghost", 20, 0)], &reg).unwrap_err();
        assert_eq!(err, KernelError::UnknownSensor("ghost".into()));
    }

    #[test]
    fn phase_must_be_below_period() {
        let reg = registry_with(&["wrist-1"]);
        let err = build_schedule(vec![ScheduleEntry::new("wrist-1", 20, 20)], &reg).unwrap_err();
        assert!(matches!(err, KernelError::PhaseOutOfRange { .. }));
    }

    #[test]
    fn next_fire_is_strictly_after_now() {
        let entry = ScheduleEntry::new("a", 20, 5);
        assert_eq!(next_fire_tick(&entry, 47).unwrap(), 65);
        let entry = ScheduleEntry::new("a", 20, 0);
        assert_eq!(next_fire_tick(&entry, 0).unwrap(), 20);
        let entry = ScheduleEntry::new("a", 7, 3);
        assert_eq!(next_fire_tick(&entry, 2).unwrap(), 3);
    }

    #[test]
    fn disabled_entries_have_no_next_fire() {
        let mut entry = ScheduleEntry::new("a", 20, 0);
        entry.enabled = false;
        assert_eq!(next_fire_tick(&entry, 0).unwrap_err(), KernelError::DisabledEntry("a".into()));
    }

    #[test]
    fn expected_counts_match_the_examples() {
        assert_eq!(expected_sample_count(20, 0, 10_000), 500);
        assert_eq!(expected_sample_count(20, 5, 10_000), 500);
        assert_eq!(expected_sample_count(100, 0, 50), 1);
        assert_eq!(expected_sample_count(20, 5, 5), 0);
        assert_eq!(expected_sample_count(20, 5, 0), 0);
    }
}
