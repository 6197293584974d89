//! Sensor descriptors and the driver registry.

use std::sync::Arc;

use serde::Serialize;

use super::KernelError;
use crate::spaces::types::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensorKind {
    Accelerometer,
    MicrophoneArray,
    Thermometer,
}

impl SensorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SensorKind::Accelerometer => "accelerometer",
            SensorKind::MicrophoneArray => "microphone-array",
            SensorKind::Thermometer => "thermometer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "accelerometer" => Some(SensorKind::Accelerometer),
            "microphone-array" => Some(SensorKind::MicrophoneArray),
            "thermometer" => Some(SensorKind::Thermometer),
            _ => None,
        }
    }
}

/// Static description of one sensor: identity, geometry, unit conversion,
/// and the period bounds rate commands must respect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorDescriptor {
    pub sensor_id: String,
    pub kind: SensorKind,
    /// Accelerometer: 3 axes. Thermometer: 1. Microphone array: number of mics.
    pub channel_count: usize,
    pub native_unit: String,
    /// Engineering units per raw count.
    pub scale: f64,
    /// Engineering-unit offset added after scaling.
    pub offset: f64,
    pub placement: Position,
    pub min_period_ticks: u32,
    pub max_period_ticks: u32,
}

impl SensorDescriptor {
    pub fn validate(&self) -> Result<(), KernelError> {
        let fail = |field: &'static str, reason: String| KernelError::InvalidDescriptor {
            sensor_id: self.sensor_id.clone(),
            field,
            reason,
        };
        if self.sensor_id.is_empty() {
            return Err(fail("sensor_id", "must not be empty".into()));
        }
        if self.scale == 0.0 || !self.scale.is_finite() {
            return Err(fail("scale", format!("must be finite and non-zero, got {}", self.scale)));
        }
        if !self.offset.is_finite() {
            return Err(fail("offset", "must be finite".into()));
        }
        let channels_ok = match self.kind {
            SensorKind::Accelerometer => self.channel_count == 3,
            SensorKind::Thermometer => self.channel_count == 1,
            SensorKind::MicrophoneArray => self.channel_count >= 1,
        };
        if !channels_ok {
            return Err(fail(
                "channel_count",
                format!("{} is inconsistent with kind {}", self.channel_count, self.kind.as_str()),
            ));
        }
        if self.min_period_ticks < 1 {
            return Err(fail("min_period_ticks", "must be at least 1".into()));
        }
        if self.min_period_ticks > self.max_period_ticks {
            return Err(fail(
                "min_period_ticks",
                format!("{} exceeds max_period_ticks {}", self.min_period_ticks, self.max_period_ticks),
            ));
        }
        Ok(())
    }

    /// How many raw readings one fire must produce. Microphone arrays carry
    /// one arrival offset per mic plus a trailing loudness reading.
    pub fn expected_value_count(&self) -> usize {
        match self.kind {
            SensorKind::Accelerometer | SensorKind::Thermometer => self.channel_count,
            SensorKind::MicrophoneArray => self.channel_count + 1,
        }
    }
}

/// Why a driver call failed.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverFault {
    pub reason: String,
}

impl DriverFault {
    pub fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }
}

/// The acquisition callback: takes the current tick, returns raw counts.
pub trait SensorDriver: Send {
    fn sample(&mut self, tick: u64) -> Result<Vec<i64>, DriverFault>;
}

impl<F> SensorDriver for F
where
    F: FnMut(u64) -> Result<Vec<i64>, DriverFault> + Send,
{
    fn sample(&mut self, tick: u64) -> Result<Vec<i64>, DriverFault> {
        self(tick)
    }
}

/// Opaque registration handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorHandle(pub(crate) usize);

pub(crate) struct RegisteredSensor {
    pub descriptor: SensorDescriptor,
    pub sensor_id: Arc<str>,
    pub driver: Box<dyn SensorDriver>,
}

/// Registered sensors plus their drivers, in registration order.
#[derive(Default)]
pub struct SensorRegistry {
    pub(crate) sensors: Vec<RegisteredSensor>,
}

impl SensorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_driver(
        &mut self,
        descriptor: SensorDescriptor,
        driver: Box<dyn SensorDriver>,
    ) -> Result<SensorHandle, KernelError> {
        descriptor.validate()?;
        if self.contains(&descriptor.sensor_id) {
            return Err(KernelError::DuplicateSensorId(descriptor.sensor_id));
        }
        let sensor_id: Arc<str> = descriptor.sensor_id.as_str().into();
        self.sensors.push(RegisteredSensor {
            descriptor,
            sensor_id,
            driver,
        });
        Ok(SensorHandle(self.sensors.len() - 1))
    }

    pub fn contains(&self, sensor_id: &str) -> bool {
        self.sensors.iter().any(|s| s.descriptor.sensor_id == sensor_id)
    }

    pub fn descriptor(&self, sensor_id: &str) -> Option<&SensorDescriptor> {
        self.sensors
            .iter()
            .find(|s| s.descriptor.sensor_id == sensor_id)
            .map(|s| &s.descriptor)
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &SensorDescriptor> {
        self.sensors.iter().map(|s| &s.descriptor)
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}
