//! Specular room acoustics: image sources over planar surfaces, per-band attenuation,
//! two-ear impulse responses and convolved stereo frames.

mod air;
mod filter;
mod ir;
mod paths;

use thiserror::Error;

use crate::scene::BAND_COUNT;

pub use air::{derive_air_absorption, reference_row, REFERENCE_TABLE};
pub use filter::{FilterBank, CROSSOVERS, FILTER_DELAY, FILTER_TAPS};
pub use ir::{build_ir, render_frame, signal_sample, ImpulseResponse, ListenerRig, SourceFeed, StereoFrame, EAR_OFFSET};
pub use paths::{
    band_attenuation, trace_paths, trace_paths_in, AcousticPath, AcousticScene, Surface, SurfaceOrigin,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcousticError {
    #[error("RangeError: {0}")]
    Range(String),
    #[error("DegenerateGeometry: {0}")]
    DegenerateGeometry(String),
    #[error("EmptyPaths: no propagation paths, impulse response is silent")]
    EmptyPaths { silent: ImpulseResponse },
    #[error("RateMismatch: expected {expected} Hz, found {found} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("invalid acoustic input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticConfig {
    pub max_order: usize,
    pub sample_rate: u32,
    /// m/s
    pub speed_of_sound: f64,
    /// Np/m per band.
    pub air_absorption: [f64; BAND_COUNT],
    /// Objects whose AABB volume reaches this (m³) contribute reflecting faces.
    pub object_volume_threshold: f64,
}

pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_SAMPLE_RATE: u32 = 16000;
pub const DEFAULT_MAX_ORDER: usize = 2;
pub const DEFAULT_TEMPERATURE: f64 = 20.0;
pub const DEFAULT_PRESSURE: f64 = 101.325;
pub const DEFAULT_HUMIDITY: f64 = 50.0;

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig {
            max_order: DEFAULT_MAX_ORDER,
            sample_rate: DEFAULT_SAMPLE_RATE,
            speed_of_sound: DEFAULT_SPEED_OF_SOUND,
            air_absorption: derive_air_absorption(DEFAULT_TEMPERATURE, DEFAULT_PRESSURE, DEFAULT_HUMIDITY)
                .expect("default atmosphere is in range"),
            object_volume_threshold: 0.5,
        }
    }
}

impl AcousticConfig {
    /// Default config with air absorption derived from the given atmosphere.
    pub fn with_atmosphere(temperature_c: f64, pressure_kpa: f64, humidity: f64) -> Result<Self, AcousticError> {
        Ok(AcousticConfig {
            air_absorption: derive_air_absorption(temperature_c, pressure_kpa, humidity)?,
            ..AcousticConfig::default()
        })
    }

    /// Same config with no air absorption.
    pub fn without_air(mut self) -> Self {
        self.air_absorption = [0.0; BAND_COUNT];
        self
    }

    pub fn validate(&self) -> Result<(), AcousticError> {
        if self.sample_rate < 8000 {
            return Err(AcousticError::Invalid(format!("sample_rate {} below 8000", self.sample_rate)));
        }
        if !(self.speed_of_sound > 0.0 && self.speed_of_sound.is_finite()) {
            return Err(AcousticError::Invalid("speed_of_sound must be positive".into()));
        }
        if self.air_absorption.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(AcousticError::Invalid("air absorption must be non-negative".into()));
        }
        if !(self.object_volume_threshold >= 0.0) {
            return Err(AcousticError::Invalid("object volume threshold must be non-negative".into()));
        }
        Ok(())
    }
}
