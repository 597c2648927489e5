use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acoustics::StereoFrame;
use crate::render::FrameBundle;
use crate::semantics::SemanticRecord;

use super::EnvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Noop,
    MoveForward,
    MoveBackward,
    StrafeLeft,
    StrafeRight,
    TurnLeft,
    TurnRight,
    LookUp,
    LookDown,
    Pick,
    Drop,
    Push,
}

impl Action {
    pub const ALL: [Action; 12] = [
        Action::Noop,
        Action::MoveForward,
        Action::MoveBackward,
        Action::StrafeLeft,
        Action::StrafeRight,
        Action::TurnLeft,
        Action::TurnRight,
        Action::LookUp,
        Action::LookDown,
        Action::Pick,
        Action::Drop,
        Action::Push,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Action> {
        Action::ALL.get(i as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Noop => "noop",
            Action::MoveForward => "move_forward",
            Action::MoveBackward => "move_backward",
            Action::StrafeLeft => "strafe_left",
            Action::StrafeRight => "strafe_right",
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::LookUp => "look_up",
            Action::LookDown => "look_down",
            Action::Pick => "pick",
            Action::Drop => "drop",
            Action::Push => "push",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Capsule base on the floor.
    pub position: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Spawn,
    Collision,
    Pick,
    PickFailed,
    Drop,
    DropFailed,
    Push,
    PushFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub agent_id: String,
    pub kind: EventKind,
    pub object: Option<String>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub agent_id: String,
    pub step: u64,
    pub pose: Pose,
    pub held: Option<String>,
    pub collided: bool,
    /// Planes of disabled modalities are empty.
    pub frame: FrameBundle,
    /// Empty when audio is disabled.
    pub audio: StereoFrame,
    /// Objects visible in `frame`, ascending object index.
    pub semantics: Vec<SemanticRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub name: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    pub bytes: usize,
}

/// Text part of an encoded observation; the planes follow as raw little-endian blobs in
/// `blobs` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationHeader {
    pub agent_id: String,
    pub step: u64,
    pub pose: Pose,
    pub held: Option<String>,
    pub collided: bool,
    pub width: u32,
    pub height: u32,
    pub semantics: Vec<SemanticRecord>,
    pub blobs: Vec<BlobSpec>,
}

fn le_bytes<T: Copy, const N: usize>(v: &[T], f: impl Fn(T) -> [u8; N]) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.len() * N);
    for &x in v {
        out.extend_from_slice(&f(x));
    }
    out
}

fn from_le<T, const N: usize>(b: &[u8], f: impl Fn([u8; N]) -> T) -> Vec<T> {
    b.chunks_exact(N).map(|c| f(c.try_into().expect("chunk of N bytes"))).collect()
}

fn codec(m: impl Into<String>) -> EnvError {
    EnvError::Codec(m.into())
}

impl Observation {
    pub fn encode(&self) -> (ObservationHeader, Vec<u8>) {
        let (w, h) = (self.frame.width as usize, self.frame.height as usize);
        let mut blobs = Vec::new();
        let mut data = Vec::new();
        let mut push = |name: &str, dtype: &str, shape: Vec<usize>, bytes: Vec<u8>| {
            blobs.push(BlobSpec {
                name: name.into(),
                dtype: dtype.into(),
                shape,
                bytes: bytes.len(),
            });
            data.extend_from_slice(&bytes);
        };
        let f = &self.frame;
        if !f.rgb.is_empty() {
            push("rgb", "u8", vec![h, w, 3], f.rgb.clone());
        }
        if !f.depth.is_empty() {
            push("depth", "f32", vec![h, w], le_bytes(&f.depth, f32::to_le_bytes));
        }
        if !f.segmentation.is_empty() {
            push("segmentation", "u16", vec![h, w], le_bytes(&f.segmentation, u16::to_le_bytes));
        }
        if !f.instances.is_empty() {
            push("instances", "u32", vec![h, w], le_bytes(&f.instances, u32::to_le_bytes));
        }
        if !self.audio.left.is_empty() {
            let mut b = le_bytes(&self.audio.left, f32::to_le_bytes);
            b.extend(le_bytes(&self.audio.right, f32::to_le_bytes));
            push("audio", "f32", vec![2, self.audio.left.len()], b);
        }
        let header = ObservationHeader {
            agent_id: self.agent_id.clone(),
            step: self.step,
            pose: self.pose,
            held: self.held.clone(),
            collided: self.collided,
            width: self.frame.width,
            height: self.frame.height,
            semantics: self.semantics.clone(),
            blobs,
        };
        (header, data)
    }

    /// Inverse of `encode`; `data` holds exactly this observation's blobs.
    pub fn decode(header: &ObservationHeader, data: &[u8]) -> Result<Observation, EnvError> {
        let total: usize = header.blobs.iter().map(|b| b.bytes).sum();
        if total != data.len() {
            return Err(codec(format!("blobs declare {total} bytes, got {}", data.len())));
        }
        let pixels = header.width as usize * header.height as usize;
        let mut frame = FrameBundle {
            width: header.width,
            height: header.height,
            rgb: Vec::new(),
            depth: Vec::new(),
            segmentation: Vec::new(),
            instances: Vec::new(),
        };
        let mut audio = StereoFrame {
            left: Vec::new(),
            right: Vec::new(),
        };
        let mut at = 0;
        for b in &header.blobs {
            let bytes = &data[at..at + b.bytes];
            at += b.bytes;
            let expect = |n: usize| {
                if b.bytes == n {
                    Ok(())
                } else {
                    Err(codec(format!("blob {:?} has {} bytes, expected {n}", b.name, b.bytes)))
                }
            };
            match (b.name.as_str(), b.dtype.as_str()) {
                ("rgb", "u8") => {
                    expect(pixels * 3)?;
                    frame.rgb = bytes.to_vec();
                }
                ("depth", "f32") => {
                    expect(pixels * 4)?;
                    frame.depth = from_le(bytes, f32::from_le_bytes);
                }
                ("segmentation", "u16") => {
                    expect(pixels * 2)?;
                    frame.segmentation = from_le(bytes, u16::from_le_bytes);
                }
                ("instances", "u32") => {
                    expect(pixels * 4)?;
                    frame.instances = from_le(bytes, u32::from_le_bytes);
                }
                ("audio", "f32") => {
                    if b.bytes % 8 != 0 {
                        return Err(codec("audio blob is not two f32 channels"));
                    }
                    let mut v = from_le(bytes, f32::from_le_bytes);
                    audio.right = v.split_off(v.len() / 2);
                    audio.left = v;
                }
                (n, t) => return Err(codec(format!("unknown blob {n:?} of type {t:?}"))),
            }
        }
        Ok(Observation {
            agent_id: header.agent_id.clone(),
            step: header.step,
            pose: header.pose,
            held: header.held.clone(),
            collided: header.collided,
            frame,
            audio,
            semantics: header.semantics.clone(),
        })
    }
}

/// Encodes observations in map order; blobs are concatenated in the same order.
pub fn encode_observations(obs: &BTreeMap<String, Observation>) -> (Vec<ObservationHeader>, Vec<u8>) {
    let mut headers = Vec::with_capacity(obs.len());
    let mut data = Vec::new();
    for o in obs.values() {
        let (h, d) = o.encode();
        headers.push(h);
        data.extend(d);
    }
    (headers, data)
}

pub fn decode_observations(headers: &[ObservationHeader], data: &[u8]) -> Result<BTreeMap<String, Observation>, EnvError> {
    let total: usize = headers.iter().flat_map(|h| &h.blobs).map(|b| b.bytes).sum();
    if total != data.len() {
        return Err(codec(format!("blobs declare {total} bytes, got {}", data.len())));
    }
    let mut out = BTreeMap::new();
    let mut at = 0;
    for h in headers {
        let n: usize = h.blobs.iter().map(|b| b.bytes).sum();
        let o = Observation::decode(h, &data[at..at + n])?;
        at += n;
        if out.insert(o.agent_id.clone(), o).is_some() {
            return Err(codec(format!("duplicate agent {:?}", h.agent_id)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub step: u64,
    /// Propagation paths summed over sources, per agent.
    pub path_counts: BTreeMap<String, usize>,
    /// Path retraces triggered by movement this step.
    pub ir_recomputes: usize,
    /// Agents whose motion was blocked this step.
    pub collisions: Vec<String>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observations: BTreeMap<String, Observation>,
    pub rewards: BTreeMap<String, f64>,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepHeader {
    pub rewards: BTreeMap<String, f64>,
    pub done: bool,
    pub info: StepInfo,
    pub observations: Vec<ObservationHeader>,
}

impl StepResult {
    pub fn encode(&self) -> (StepHeader, Vec<u8>) {
        let (observations, data) = encode_observations(&self.observations);
        let header = StepHeader {
            rewards: self.rewards.clone(),
            done: self.done,
            info: self.info.clone(),
            observations,
        };
        (header, data)
    }

    pub fn decode(header: &StepHeader, data: &[u8]) -> Result<StepResult, EnvError> {
        Ok(StepResult {
            observations: decode_observations(&header.observations, data)?,
            rewards: header.rewards.clone(),
            done: header.done,
            info: header.info.clone(),
        })
    }

    /// Canonical transcript bytes: u32 LE header length, JSON header, blobs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (header, data) = self.encode();
        let json = serde_json::to_vec(&header).expect("step header serializes");
        let mut out = Vec::with_capacity(4 + json.len() + data.len());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend(json);
        out.extend(data);
        out
    }
}
