//! The time-driven acquisition kernel.
//!
//! A deterministic tick loop fires registered sensor drivers at configured
//! periods, applies runtime rate-change commands at fire boundaries, and
//! emits a totally ordered stream of raw samples followed by a run summary.

mod clock;
mod queue;
mod registry;
mod run;
mod schedule;

pub use clock::{PacingMode, TickClock, DEFAULT_TICK_QUANTUM_US};
pub use queue::{bounded_event_queue, OverflowPolicy, QueueReader, QueueWriter, DEFAULT_QUEUE_CAPACITY};
pub use registry::{DriverFault, SensorDescriptor, SensorDriver, SensorHandle, SensorKind, SensorRegistry};
pub use run::{
    run_acquisition, ChannelCommands, CommandEnvelope, CommandSource, KernelEvent, NoCommands, RateAck,
    RateCommand, RawSample, RunSummary, SampleStatus, ScheduleRuntime, ScriptedCommands, VecSink,
};
pub use schedule::{build_schedule, expected_sample_count, next_fire_tick, SamplingSchedule, ScheduleEntry};

use thiserror::Error;

/// Sink for kernel events. Implementations decide what "full" means.
pub trait EventSink {
    fn emit(&mut self, event: KernelEvent) -> Result<(), SinkError>;
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SinkError {
    #[error("sink rejected the event: queue full")]
    Full,
    #[error("sink closed")]
    Closed,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("sensor id already registered: {0}")]
    DuplicateSensorId(String),
    #[error("invalid descriptor for sensor {sensor_id}: field {field}: {reason}")]
    InvalidDescriptor {
        sensor_id: String,
        field: &'static str,
        reason: String,
    },
    #[error("unknown sensor: {0}")]
    UnknownSensor(String),
    #[error("period {period} outside [{min}, {max}] for sensor {sensor_id}")]
    PeriodOutOfBounds {
        sensor_id: String,
        period: u32,
        min: u32,
        max: u32,
    },
    #[error("duplicate schedule entry for sensor {0}")]
    DuplicateEntry(String),
    #[error("phase {phase} must be below period {period} for sensor {sensor_id}")]
    PhaseOutOfRange {
        sensor_id: String,
        phase: u32,
        period: u32,
    },
    #[error("schedule entry for sensor {0} is disabled")]
    DisabledEntry(String),
    #[error("tick quantum must be at least 1 µs")]
    InvalidQuantum,
    #[error("bounded output queue overflowed under the fail policy")]
    QueueOverflow,
    #[error("event sink closed before the run completed")]
    SinkClosed,
}

impl From<SinkError> for KernelError {
    fn from(e: SinkError) -> Self {
        match e {
            SinkError::Full => KernelError::QueueOverflow,
            SinkError::Closed => KernelError::SinkClosed,
        }
    }
}
