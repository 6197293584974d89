//! A two-layer sensor hub for ambient assisted living experiments.
//!
//! The acquisition layer ([`kernel`]) is a deterministic tick-driven
//! scheduler firing sensor drivers at configured, runtime-adjustable
//! periods. The normalization layer ([`spaces`]) re-expresses every reading
//! as a position in a physical space, a payload in a value space, and a
//! temporal coordinate, decoupled from the sensor that produced it.
//! On top of those sit scenario-driven synthetic drivers ([`sim`]), a
//! reference fall-detection application ([`falls`]), and a streaming
//! service ([`hub`]).

pub mod falls;
pub mod hub;
pub mod kernel;
pub mod runtime;
pub mod sim;
pub mod spaces;

pub use kernel::{
    build_schedule, expected_sample_count, run_acquisition, KernelError, PacingMode, RateAck, RateCommand,
    RawSample, RunSummary, SamplingSchedule, ScheduleEntry, SensorDescriptor, SensorKind, SensorRegistry,
    TickClock,
};
pub use spaces::{
    apply_view, normalize_sample, BuildingGraph, Cartesian3, NormalizedSample, Payload, PayloadKind,
    PayloadValue, Place, Position, SpaceDescriptor, SpaceKind, SpaceRegistry, SpacesError, SubjectiveView,
};
