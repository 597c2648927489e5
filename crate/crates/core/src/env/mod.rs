//! Episode layer: loads a house, spawns kinematic agents, maps discrete actions onto the
//! engines and assembles per-agent observations.
//!
//! An `Env` is single-owner. Separate envs share no mutable state and may run in parallel.

mod agent;
mod config;
mod obs;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::acoustics::{
    build_ir, render_frame, trace_paths_in, AcousticConfig, AcousticError, AcousticPath, AcousticScene, ImpulseResponse,
    ListenerRig, SourceFeed, StereoFrame,
};
use crate::geom::{Transform, Vec3};
use crate::physics::{PhysicsError, PhysicsWorld};
use crate::render::{render_scene, FrameBundle, RayScene, RenderError};
use crate::scene::{generate_house, load_scene_file, GeneratorParams, House, SceneError};
use crate::semantics::{CategoryVolumeStats, SemanticIndex};

pub use agent::{on_floor, static_clearance, AgentState};
pub use config::{AgentSettings, AudioSettings, EnvConfig, GeneratorSettings, HouseSource, Modalities};
pub use obs::{
    decode_observations, encode_observations, Action, BlobSpec, Event, EventKind, Observation, ObservationHeader, Pose,
    StepHeader, StepInfo, StepResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("NoHousesAvailable: the house source is empty")]
    NoHousesAvailable,
    #[error("SpawnFailure: no free spot for an agent in house {0:?}")]
    SpawnFailure(String),
    #[error("NotReset: call reset before stepping")]
    NotReset,
    #[error("UnknownAgent: {0:?}")]
    UnknownAgent(String),
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("render: {0}")]
    Render(#[from] RenderError),
    #[error("audio: {0}")]
    Audio(String),
    #[error("physics: {0}")]
    Physics(#[from] PhysicsError),
    #[error("Blocked: {0}")]
    Blocked(String),
    #[error("CodecError: {0}")]
    Codec(String),
}

/// What a reward hook sees after each step's simulation.
pub struct RewardContext<'a> {
    pub house: &'a House,
    pub agents: &'a BTreeMap<String, AgentState>,
    pub events: &'a [Event],
    /// Steps completed, including this one.
    pub step: u64,
}

/// Per-agent rewards; agents left out get 0.
pub type RewardHook = Box<dyn FnMut(&RewardContext) -> BTreeMap<String, f64> + Send>;

/// Wall-clock totals per engine, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EngineTimings {
    pub steps: u64,
    pub render_ms: f64,
    pub audio_ms: f64,
    pub physics_ms: f64,
    pub semantics_ms: f64,
    pub total_ms: f64,
}

enum Provider {
    Generator { first_seed: u64, count: u64, params: GeneratorParams },
    Files(Vec<PathBuf>),
    Inline(Vec<Arc<House>>),
}

impl Provider {
    fn new(cfg: &EnvConfig) -> Result<Provider, EnvError> {
        Ok(match &cfg.houses {
            HouseSource::Generator { first_seed, count } => Provider::Generator {
                first_seed: *first_seed,
                count: *count,
                params: cfg.generator.into(),
            },
            HouseSource::Corpus { dir } => {
                let entries = std::fs::read_dir(dir).map_err(|e| EnvError::Config(format!("corpus {}: {e}", dir.display())))?;
                let mut files: Vec<PathBuf> = entries
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                    .collect();
                files.sort();
                Provider::Files(files)
            }
            HouseSource::Inline(h) => Provider::Inline(h.clone()),
        })
    }

    fn len(&self) -> u64 {
        match self {
            Provider::Generator { count, .. } => *count,
            Provider::Files(f) => f.len() as u64,
            Provider::Inline(h) => h.len() as u64,
        }
    }

    fn load(&self, k: u64) -> Result<Arc<House>, EnvError> {
        Ok(match self {
            Provider::Generator { first_seed, params, .. } => Arc::new(generate_house(first_seed + k, params)?),
            Provider::Files(f) => Arc::new(load_scene_file(&f[k as usize])?),
            Provider::Inline(h) => h[k as usize].clone(),
        })
    }
}

/// Paths from one source to one agent's head, plus the IR built from them.
#[derive(Debug, Clone)]
struct AudioLink {
    head: Vec3,
    source: Vec3,
    yaw: f64,
    paths: Vec<AcousticPath>,
    ir: ImpulseResponse,
}

struct Episode {
    house: Arc<House>,
    world: PhysicsWorld,
    scene: AcousticScene,
    scene_transforms: Vec<Transform>,
    semantics: SemanticIndex,
    agents: BTreeMap<String, AgentState>,
    audio: BTreeMap<String, Vec<AudioLink>>,
    pending_events: Vec<Event>,
    step: u64,
    done: bool,
    next_agent: usize,
}

pub struct Env {
    config: EnvConfig,
    acoustic: AcousticConfig,
    provider: Provider,
    rng: ChaCha8Rng,
    hook: RewardHook,
    pool: Option<Arc<rayon::ThreadPool>>,
    episode: Option<Episode>,
    cached_house: Option<(u64, Arc<House>)>,
    timings: EngineTimings,
}

pub fn make_env(cfg: EnvConfig) -> Result<Env, EnvError> {
    Env::new(cfg)
}

fn zero_rewards() -> RewardHook {
    Box::new(|_| BTreeMap::new())
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Env, EnvError> {
        config.validate()?;
        let acoustic = config.audio.acoustic_config()?;
        let provider = Provider::new(&config)?;
        let pool = match config.threads {
            Some(n) => Some(Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| EnvError::Config(format!("thread pool: {e}")))?,
            )),
            None => None,
        };
        Ok(Env {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            acoustic,
            provider,
            hook: zero_rewards(),
            pool,
            episode: None,
            cached_house: None,
            timings: EngineTimings::default(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn set_reward_hook(&mut self, hook: RewardHook) {
        self.hook = hook;
    }

    pub fn clear_reward_hook(&mut self) {
        self.hook = zero_rewards();
    }

    pub fn timings(&self) -> EngineTimings {
        self.timings
    }

    pub fn reset_timings(&mut self) {
        self.timings = EngineTimings::default();
    }

    pub fn house(&self) -> Option<&Arc<House>> {
        self.episode.as_ref().map(|e| &e.house)
    }

    pub fn agents(&self) -> Option<&BTreeMap<String, AgentState>> {
        self.episode.as_ref().map(|e| &e.agents)
    }

    pub fn world(&self) -> Option<&PhysicsWorld> {
        self.episode.as_ref().map(|e| &e.world)
    }

    /// Steps taken in the current episode.
    pub fn step_count(&self) -> Option<u64> {
        self.episode.as_ref().map(|e| e.step)
    }

    fn in_pool<T: Send>(&mut self, f: impl FnOnce(&mut Env) -> T + Send) -> T {
        match self.pool.clone() {
            Some(p) => p.install(|| f(self)),
            None => f(self),
        }
    }

    /// Starts an episode. With `seed` the env rng restarts from it; otherwise it continues.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<BTreeMap<String, Observation>, EnvError> {
        self.in_pool(|env| env.reset_inner(seed))
    }

    pub fn step(&mut self, actions: &BTreeMap<String, Action>) -> Result<StepResult, EnvError> {
        self.in_pool(|env| env.step_inner(actions))
    }

    /// Adds an agent to the running episode; it appears in the next step's results.
    pub fn spawn_agent(&mut self) -> Result<String, EnvError> {
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        let id = spawn_into(ep, &self.config, &mut self.rng)?;
        let links = audio_links(ep, &self.config, &self.acoustic, &ep.agents[&id])?.0;
        ep.audio.insert(id.clone(), links);
        ep.pending_events.push(Event {
            agent_id: id.clone(),
            kind: EventKind::Spawn,
            object: None,
            detail: None,
        });
        Ok(id)
    }

    /// Moves an agent without a sweep. The capsule must fit at `feet`; pitch is clamped.
    pub fn place_agent(&mut self, agent_id: &str, feet: Vec3, yaw: f64, pitch: f64) -> Result<(), EnvError> {
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if !ep.agents.contains_key(agent_id) {
            return Err(EnvError::UnknownAgent(agent_id.into()));
        }
        if !(feet.is_finite() && yaw.is_finite() && pitch.is_finite()) {
            return Err(EnvError::Blocked("non-finite pose".into()));
        }
        let others: Vec<Vec3> = ep.agents.iter().filter(|(k, _)| k.as_str() != agent_id).map(|(_, a)| a.position).collect();
        if !agent::capsule_free(&ep.house, &ep.world, &self.config.agent, feet, &others, &[]) {
            return Err(EnvError::Blocked(format!("capsule does not fit at {:?}", feet.to_array())));
        }
        let a = ep.agents.get_mut(agent_id).expect("checked above");
        a.position = feet;
        a.yaw = yaw;
        a.pitch = pitch.clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        Ok(())
    }

    /// Full frame from an agent's eye at a chosen resolution, independent of enabled modalities.
    pub fn render_view(&mut self, agent_id: &str, width: u32, height: u32) -> Result<FrameBundle, EnvError> {
        let cfg = self.config.clone();
        self.in_pool(move |env| {
            let ep = env.episode.as_ref().ok_or(EnvError::NotReset)?;
            let a = ep.agents.get(agent_id).ok_or_else(|| EnvError::UnknownAgent(agent_id.into()))?;
            let cam = a.camera(&cfg).with_size(width, height);
            Ok(render_scene(&ep.house, &ep.scene.rays, &cam, cfg.lights)?)
        })
    }

    fn select_house(&mut self) -> Result<Arc<House>, EnvError> {
        let n = self.provider.len();
        if n == 0 {
            return Err(EnvError::NoHousesAvailable);
        }
        let k = self.rng.gen_range(0..n);
        if let Some((ck, h)) = &self.cached_house {
            if *ck == k {
                return Ok(h.clone());
            }
        }
        let h = self.provider.load(k)?;
        self.cached_house = Some((k, h.clone()));
        Ok(h)
    }

    fn reset_inner(&mut self, seed: Option<u64>) -> Result<BTreeMap<String, Observation>, EnvError> {
        if let Some(s) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(s);
        }
        self.episode = None;
        let house = self.select_house()?;
        let world = PhysicsWorld::new(&house, self.config.physics.clone())?;
        let transforms = world.transforms();
        let scene = AcousticScene::with_rays(
            &house,
            &transforms,
            self.acoustic.object_volume_threshold,
            RayScene::build(&house, &transforms),
        );
        let semantics = SemanticIndex::new(&house, CategoryVolumeStats::shipped());
        let mut ep = Episode {
            house,
            world,
            scene,
            scene_transforms: transforms,
            semantics,
            agents: BTreeMap::new(),
            audio: BTreeMap::new(),
            pending_events: Vec::new(),
            step: 0,
            done: false,
            next_agent: 0,
        };
        for _ in 0..self.config.agents {
            spawn_into(&mut ep, &self.config, &mut self.rng)?;
        }
        if self.config.modalities.audio {
            for (id, a) in &ep.agents {
                let links = audio_links(&ep, &self.config, &self.acoustic, a)?.0;
                ep.audio.insert(id.clone(), links);
            }
        }
        let obs = self.observe(&ep)?;
        self.episode = Some(ep);
        Ok(obs)
    }

    fn step_inner(&mut self, actions: &BTreeMap<String, Action>) -> Result<StepResult, EnvError> {
        let mut ep = self.episode.take().ok_or(EnvError::NotReset)?;
        let r = self.advance(&mut ep, actions);
        self.episode = Some(ep);
        r
    }

    fn advance(&mut self, ep: &mut Episode, actions: &BTreeMap<String, Action>) -> Result<StepResult, EnvError> {
        let start = Instant::now();
        let cfg = self.config.clone();
        if let Some(id) = actions.keys().find(|id| !ep.agents.contains_key(*id)) {
            return Err(EnvError::UnknownAgent(id.clone()));
        }
        let mut events = std::mem::take(&mut ep.pending_events);
        let ids: Vec<String> = ep.agents.keys().cloned().collect();
        for id in &ids {
            let action = actions.get(id).copied().unwrap_or(Action::Noop);
            apply_action(ep, &cfg, id, action, &mut events);
        }
        let collisions: Vec<String> = ids.iter().filter(|id| ep.agents[*id].collided_last_step).cloned().collect();

        let t = Instant::now();
        for (id, a) in &ep.agents {
            if a.held.is_some() {
                ep.world.carry(id, &a.physics_pose(&cfg.agent));
            }
        }
        for _ in 0..cfg.substeps() {
            ep.world.step();
        }
        let transforms = ep.world.transforms();
        if transforms != ep.scene_transforms {
            ep.scene = AcousticScene::with_rays(
                &ep.house,
                &transforms,
                self.acoustic.object_volume_threshold,
                RayScene::build(&ep.house, &transforms),
            );
            ep.scene_transforms = transforms;
        }
        self.timings.physics_ms += ms(t);

        let t = Instant::now();
        let mut path_counts = BTreeMap::new();
        let mut ir_recomputes = 0;
        if cfg.modalities.audio {
            for id in &ids {
                let links = refresh_links(ep, &cfg, &self.acoustic, id, &mut ir_recomputes)?;
                path_counts.insert(id.clone(), links);
            }
        }
        self.timings.audio_ms += ms(t);

        ep.step += 1;
        ep.done = ep.done || ep.step >= cfg.episode_length;
        let observations = self.observe(ep)?;

        let ctx = RewardContext {
            house: &ep.house,
            agents: &ep.agents,
            events: &events,
            step: ep.step,
        };
        let given = (self.hook)(&ctx);
        let rewards = ep.agents.keys().map(|id| (id.clone(), given.get(id).copied().unwrap_or(0.0))).collect();
        let result = StepResult {
            observations,
            rewards,
            done: ep.done,
            info: StepInfo {
                step: ep.step,
                path_counts,
                ir_recomputes,
                collisions,
                events,
            },
        };
        self.timings.steps += 1;
        self.timings.total_ms += ms(start);
        Ok(result)
    }

    fn observe(&mut self, ep: &Episode) -> Result<BTreeMap<String, Observation>, EnvError> {
        let cfg = &self.config;
        let m = cfg.modalities;
        let frame_len = cfg.audio_frame_len();
        let transforms = &ep.scene_transforms;
        let mut out = BTreeMap::new();
        for (id, a) in &ep.agents {
            let t = Instant::now();
            let mut frame = if m.needs_frame() {
                render_scene(&ep.house, &ep.scene.rays, &a.camera(cfg), cfg.lights)?
            } else {
                FrameBundle {
                    width: cfg.width,
                    height: cfg.height,
                    rgb: Vec::new(),
                    depth: Vec::new(),
                    segmentation: Vec::new(),
                    instances: Vec::new(),
                }
            };
            self.timings.render_ms += ms(t);

            let t = Instant::now();
            let semantics = if m.semantics {
                frame
                    .visible_objects()
                    .into_iter()
                    .map(|i| ep.semantics.record(&ep.house, i, &transforms[i]))
                    .collect()
            } else {
                Vec::new()
            };
            self.timings.semantics_ms += ms(t);

            if !m.rgb {
                frame.rgb = Vec::new();
            }
            if !m.depth {
                frame.depth = Vec::new();
            }
            if !m.segmentation {
                frame.segmentation = Vec::new();
                frame.instances = Vec::new();
            }

            let t = Instant::now();
            let audio = match ep.audio.get(id) {
                Some(links) if m.audio => {
                    let feeds: Vec<SourceFeed> = ep
                        .house
                        .sound_sources
                        .iter()
                        .zip(links)
                        .map(|(s, l)| SourceFeed {
                            signal: &s.signal,
                            gain: s.reference_gain,
                            ir: &l.ir,
                        })
                        .collect();
                    render_frame(&feeds, frame_len, ep.step * frame_len as u64).map_err(|e| EnvError::Audio(e.to_string()))?
                }
                _ => StereoFrame {
                    left: Vec::new(),
                    right: Vec::new(),
                },
            };
            self.timings.audio_ms += ms(t);

            out.insert(
                id.clone(),
                Observation {
                    agent_id: id.clone(),
                    step: ep.step,
                    pose: a.pose(),
                    held: a.held.clone(),
                    collided: a.collided_last_step,
                    frame,
                    audio,
                    semantics,
                },
            );
        }
        Ok(out)
    }
}

fn spawn_into(ep: &mut Episode, cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> Result<String, EnvError> {
    let others: Vec<Vec3> = ep.agents.values().map(|a| a.position).collect();
    let occupied: Vec<usize> = others
        .iter()
        .filter_map(|p| ep.house.room_containing(*p + Vec3::Z * 1e-3))
        .collect();
    let (feet, yaw) = agent::sample_spawn(&ep.house, &ep.world, &cfg.agent, &others, &occupied, rng)
        .ok_or_else(|| EnvError::SpawnFailure(ep.house.id.clone()))?;
    let id = format!("agent{:03}", ep.next_agent);
    ep.next_agent += 1;
    ep.agents.insert(
        id.clone(),
        AgentState {
            id: id.clone(),
            position: feet,
            yaw,
            pitch: 0.0,
            held: None,
            collided_last_step: false,
        },
    );
    Ok(id)
}

/// Nearest free dynamic body inside the agent's reach cone, measured in the floor plane.
fn reach_target(ep: &Episode, cfg: &EnvConfig, a: &AgentState) -> Option<String> {
    let eye = a.eye(&cfg.agent);
    let fwd = a.forward();
    let cos_max = cfg.physics.reach_angle_deg.to_radians().cos();
    let mut best: Option<(f64, usize)> = None;
    for (i, b) in ep.world.bodies.iter().enumerate() {
        if !b.dynamic || b.held_by.is_some() {
            continue;
        }
        let c = b.center();
        let d = Vec3::new(c.x - eye.x, c.y - eye.y, 0.0);
        let dist = d.length();
        if dist > cfg.physics.reach {
            continue;
        }
        if dist > 1e-12 && d.dot(fwd) / dist < cos_max {
            continue;
        }
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, i));
        }
    }
    best.map(|(_, i)| ep.world.bodies[i].object_id.clone())
}

fn apply_action(ep: &mut Episode, cfg: &EnvConfig, id: &str, action: Action, events: &mut Vec<Event>) {
    let s = &cfg.agent;
    let mut a = ep.agents[id].clone();
    a.collided_last_step = false;
    let mut event = |kind: EventKind, object: Option<String>, detail: Option<String>| {
        events.push(Event {
            agent_id: id.to_owned(),
            kind,
            object,
            detail,
        })
    };
    let step = match action {
        Action::MoveForward => Some(a.forward() * s.move_distance),
        Action::MoveBackward => Some(a.forward() * -s.move_distance),
        Action::StrafeLeft => Some(a.left() * s.move_distance),
        Action::StrafeRight => Some(a.left() * -s.move_distance),
        _ => None,
    };
    match action {
        Action::Noop => {}
        Action::MoveForward | Action::MoveBackward | Action::StrafeLeft | Action::StrafeRight => {
            let delta = step.expect("motion action");
            let others: Vec<Vec3> = ep.agents.iter().filter(|(k, _)| k.as_str() != id).map(|(_, o)| o.position).collect();
            let ignore = agent::touching_bodies(&ep.world, s, a.position);
            let n = (delta.length() / s.sweep_step).ceil().max(1.0) as usize;
            let blocked = (1..=n).any(|k| {
                let p = a.position + delta * (k as f64 / n as f64);
                !agent::capsule_free(&ep.house, &ep.world, s, p, &others, &ignore)
            });
            if blocked {
                a.collided_last_step = true;
                event(EventKind::Collision, None, Some(action.name().into()));
            } else {
                a.position = a.position + delta;
            }
        }
        Action::TurnLeft => a.yaw += s.turn_deg.to_radians(),
        Action::TurnRight => a.yaw -= s.turn_deg.to_radians(),
        Action::LookUp => a.pitch = (a.pitch + s.look_deg.to_radians()).min(std::f64::consts::FRAC_PI_2),
        Action::LookDown => a.pitch = (a.pitch - s.look_deg.to_radians()).max(-std::f64::consts::FRAC_PI_2),
        Action::Pick => match reach_target(ep, cfg, &a) {
            None => event(EventKind::PickFailed, None, Some("nothing within reach".into())),
            Some(obj) => match ep.world.pick(id, &a.physics_pose(s), &obj) {
                Ok(()) => {
                    a.held = Some(obj.clone());
                    event(EventKind::Pick, Some(obj), None);
                }
                Err(e) => event(EventKind::PickFailed, Some(obj), Some(e.to_string())),
            },
        },
        Action::Drop => match ep.world.drop_held(id, &a.physics_pose(s)) {
            Ok(obj) => {
                a.held = None;
                event(EventKind::Drop, Some(obj), None);
            }
            Err(e) => event(EventKind::DropFailed, None, Some(e.to_string())),
        },
        Action::Push => match reach_target(ep, cfg, &a) {
            None => event(EventKind::PushFailed, None, Some("nothing within reach".into())),
            Some(obj) => match ep.world.apply_push(&obj, a.forward() * s.push_impulse) {
                Ok(()) => event(EventKind::Push, Some(obj), None),
                Err(e) => event(EventKind::PushFailed, Some(obj), Some(e.to_string())),
            },
        },
    }
    ep.agents.insert(id.to_owned(), a);
}

fn link_ir(paths: &[AcousticPath], head: Vec3, yaw: f64, acfg: &AcousticConfig) -> Result<ImpulseResponse, EnvError> {
    match build_ir(paths, &ListenerRig::new(head, yaw), acfg) {
        Ok(ir) => Ok(ir),
        Err(AcousticError::EmptyPaths { silent }) => Ok(silent),
        Err(e) => Err(EnvError::Audio(e.to_string())),
    }
}

fn trace(ep: &Episode, acfg: &AcousticConfig, source: Vec3, head: Vec3) -> Result<Vec<AcousticPath>, EnvError> {
    match trace_paths_in(&ep.scene, &ep.house.materials, source, head, acfg) {
        Ok(p) => Ok(p),
        Err(AcousticError::DegenerateGeometry(_)) => Ok(Vec::new()),
        Err(e) => Err(EnvError::Audio(e.to_string())),
    }
}

/// Fresh links for every source. Returns them with the total path count.
fn audio_links(ep: &Episode, cfg: &EnvConfig, acfg: &AcousticConfig, a: &AgentState) -> Result<(Vec<AudioLink>, usize), EnvError> {
    if !cfg.modalities.audio {
        return Ok((Vec::new(), 0));
    }
    let head = a.eye(&cfg.agent);
    let mut links = Vec::with_capacity(ep.house.sound_sources.len());
    let mut count = 0;
    for s in &ep.house.sound_sources {
        let paths = trace(ep, acfg, s.position, head)?;
        count += paths.len();
        links.push(AudioLink {
            head,
            source: s.position,
            yaw: a.yaw,
            ir: link_ir(&paths, head, a.yaw, acfg)?,
            paths,
        });
    }
    Ok((links, count))
}

/// Retraces links whose head or source moved past the threshold and rebuilds IRs whose yaw
/// changed. Returns the agent's total path count.
fn refresh_links(ep: &mut Episode, cfg: &EnvConfig, acfg: &AcousticConfig, id: &str, recomputes: &mut usize) -> Result<usize, EnvError> {
    let a = &ep.agents[id];
    let head = a.eye(&cfg.agent);
    let yaw = a.yaw;
    let limit = cfg.audio.recompute_distance;
    let mut links = ep.audio.remove(id).unwrap_or_default();
    let mut count = 0;
    for (k, s) in ep.house.sound_sources.iter().enumerate() {
        let stale = links
            .get(k)
            .is_none_or(|l| l.head.distance(head) > limit || l.source.distance(s.position) > limit);
        if stale {
            let paths = trace(ep, acfg, s.position, head)?;
            *recomputes += 1;
            let link = AudioLink {
                head,
                source: s.position,
                yaw,
                ir: link_ir(&paths, head, yaw, acfg)?,
                paths,
            };
            if k < links.len() {
                links[k] = link;
            } else {
                links.push(link);
            }
        } else if links[k].yaw != yaw {
            let l = &mut links[k];
            l.ir = link_ir(&l.paths, l.head, yaw, acfg)?;
            l.yaw = yaw;
        }
        count += links[k].paths.len();
    }
    ep.audio.insert(id.to_owned(), links);
    Ok(count)
}
