use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acoustics::AcousticConfig;
use crate::physics::PhysicsConfig;
use crate::render::{DEFAULT_FOV, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::scene::{GeneratorParams, House};

use super::EnvError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HouseSource {
    /// Houses `generate_house(first_seed + k)` for `k` in `0..count`.
    Generator { first_seed: u64, count: u64 },
    /// Every `*.json` scene document in a directory, in file-name order.
    Corpus { dir: PathBuf },
    /// Houses supplied in memory; not expressible in config files.
    #[serde(skip)]
    Inline(Vec<Arc<House>>),
}

impl Default for HouseSource {
    fn default() -> Self {
        HouseSource::Generator {
            first_seed: 0,
            count: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Modalities {
    pub rgb: bool,
    pub depth: bool,
    /// Fine-category plane plus the object instance plane.
    pub segmentation: bool,
    pub audio: bool,
    pub semantics: bool,
}

impl Default for Modalities {
    fn default() -> Self {
        Modalities {
            rgb: true,
            depth: true,
            segmentation: true,
            audio: true,
            semantics: true,
        }
    }
}

impl Modalities {
    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.rgb, "rgb"),
            (self.depth, "depth"),
            (self.segmentation, "segmentation"),
            (self.audio, "audio"),
            (self.semantics, "semantics"),
        ]
        .into_iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| n)
        .collect()
    }

    pub fn needs_frame(&self) -> bool {
        self.rgb || self.depth || self.segmentation || self.semantics
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioSettings {
    pub max_order: usize,
    pub sample_rate: u32,
    #[serde(alias = "temperature")]
    pub temperature_c: f64,
    #[serde(alias = "pressure")]
    pub pressure_kpa: f64,
    pub humidity: f64,
    /// Paths are retraced once the head or a source has moved this far (m).
    pub recompute_distance: f64,
    pub object_volume_threshold: f64,
}

impl Default for AudioSettings {
    fn default() -> Self {
        AudioSettings {
            max_order: 1,
            sample_rate: 16000,
            temperature_c: crate::acoustics::DEFAULT_TEMPERATURE,
            pressure_kpa: crate::acoustics::DEFAULT_PRESSURE,
            humidity: crate::acoustics::DEFAULT_HUMIDITY,
            recompute_distance: 0.1,
            object_volume_threshold: 0.5,
        }
    }
}

impl AudioSettings {
    pub fn acoustic_config(&self) -> Result<AcousticConfig, EnvError> {
        let mut cfg = AcousticConfig::with_atmosphere(self.temperature_c, self.pressure_kpa, self.humidity)
            .map_err(|e| EnvError::Config(format!("audio: {e}")))?;
        cfg.max_order = self.max_order;
        cfg.sample_rate = self.sample_rate;
        cfg.object_volume_threshold = self.object_volume_threshold;
        cfg.validate().map_err(|e| EnvError::Config(format!("audio: {e}")))?;
        Ok(cfg)
    }
}

/// Kinematic agent body and action magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSettings {
    pub radius: f64,
    pub height: f64,
    pub eye_height: f64,
    /// Obstacles whose top is at most this far above the feet do not block.
    pub step_height: f64,
    pub move_distance: f64,
    pub turn_deg: f64,
    pub look_deg: f64,
    /// N·s, along the facing direction.
    pub push_impulse: f64,
    /// Sweep sample spacing (m).
    pub sweep_step: f64,
    pub spawn_attempts: usize,
}

impl Default for AgentSettings {
    fn default() -> Self {
        AgentSettings {
            radius: 0.3,
            height: 1.7,
            eye_height: 1.6,
            step_height: 0.1,
            move_distance: 0.25,
            turn_deg: 10.0,
            look_deg: 10.0,
            push_impulse: 5.0,
            sweep_step: 0.05,
            spawn_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSettings {
    pub min_rooms: usize,
    pub max_rooms: usize,
    pub min_objects_per_room: usize,
    pub max_objects_per_room: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        let p = GeneratorParams::default();
        GeneratorSettings {
            min_rooms: p.min_rooms,
            max_rooms: p.max_rooms,
            min_objects_per_room: p.min_objects_per_room,
            max_objects_per_room: p.max_objects_per_room,
        }
    }
}

impl From<GeneratorSettings> for GeneratorParams {
    fn from(s: GeneratorSettings) -> Self {
        GeneratorParams {
            min_rooms: s.min_rooms,
            max_rooms: s.max_rooms,
            min_objects_per_room: s.min_objects_per_room,
            max_objects_per_room: s.max_objects_per_room,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub houses: HouseSource,
    pub agents: usize,
    /// Actions per simulated second.
    pub step_rate: f64,
    pub width: u32,
    pub height: u32,
    /// Vertical field of view, radians.
    pub fov: f64,
    pub lights: bool,
    pub modalities: Modalities,
    pub episode_length: u64,
    pub seed: u64,
    /// Worker threads for this env; `None` uses the global pool.
    pub threads: Option<usize>,
    pub physics: PhysicsConfig,
    #[serde(alias = "acoustics")]
    pub audio: AudioSettings,
    pub agent: AgentSettings,
    pub generator: GeneratorSettings,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            houses: HouseSource::default(),
            agents: 1,
            step_rate: 10.0,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            fov: DEFAULT_FOV,
            lights: true,
            modalities: Modalities::default(),
            episode_length: 500,
            seed: 0,
            threads: None,
            physics: PhysicsConfig::default(),
            audio: AudioSettings::default(),
            agent: AgentSettings::default(),
            generator: GeneratorSettings::default(),
        }
    }
}

impl EnvConfig {
    /// Physics substeps per action.
    pub fn substeps(&self) -> u64 {
        (1.0 / (self.physics.dt * self.step_rate)).round() as u64
    }

    /// Audio samples per step and channel.
    pub fn audio_frame_len(&self) -> usize {
        (self.audio.sample_rate as f64 / self.step_rate).round() as usize
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::Config(m));
        if self.agents == 0 {
            return bad("agents must be at least 1".into());
        }
        if !(self.step_rate.is_finite() && self.step_rate > 0.0) {
            return bad("step_rate must be positive".into());
        }
        self.physics.validate().map_err(|e| EnvError::Config(e.to_string()))?;
        let ratio = 1.0 / (self.physics.dt * self.step_rate);
        if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return bad(format!(
                "step_rate {} Hz does not divide the physics rate {} Hz",
                self.step_rate,
                1.0 / self.physics.dt
            ));
        }
        if self.width == 0 || self.height == 0 {
            return bad("width and height must be at least 1".into());
        }
        if !(self.fov > 0.0 && self.fov < std::f64::consts::PI) {
            return bad("fov must lie in (0, pi)".into());
        }
        if self.episode_length == 0 {
            return bad("episode_length must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if self.audio.recompute_distance < 0.0 || !self.audio.recompute_distance.is_finite() {
            return bad("audio.recompute_distance must be non-negative".into());
        }
        if self.audio_frame_len() == 0 {
            return bad("audio frame is empty at this step_rate".into());
        }
        self.audio.acoustic_config()?;
        let a = &self.agent;
        let positive = [a.radius, a.height, a.eye_height, a.move_distance, a.sweep_step];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("agent sizes and distances must be positive".into());
        }
        if a.eye_height > a.height || a.height < 2.0 * a.radius {
            return bad("agent eye must sit within a capsule at least 2 radii tall".into());
        }
        if [a.step_height, a.turn_deg, a.look_deg, a.push_impulse].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("agent step height, angles and impulse must be non-negative".into());
        }
        if a.spawn_attempts == 0 {
            return bad("agent.spawn_attempts must be at least 1".into());
        }
        match &self.houses {
            HouseSource::Generator { count, .. } if *count == 0 => return bad("generator count must be at least 1".into()),
            HouseSource::Generator { first_seed, count } if first_seed.checked_add(*count).is_none() => {
                return bad("generator seed range overflows".into())
            }
            _ => {}
        }
        Ok(())
    }
}
