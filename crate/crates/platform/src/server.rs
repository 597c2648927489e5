//! Episode server: one env per connection, requests answered in order.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::TcpListener;
use std::thread;

use home_core::env::{encode_observations, make_env, Action, Env, EnvConfig, EnvError, Observation};
use home_core::render::FrameBundle;
use serde_json::{json, Map, Value};

use crate::wire::{declared_blobs, parse_envelope, read_frame, write_message, Envelope, FrameError, MAX_PAYLOAD, PROTOCOL};

/// Protocol-level error name for an env error.
pub fn error_code(e: &EnvError) -> &'static str {
    match e {
        EnvError::Config(_) => "ConfigError",
        EnvError::NoHousesAvailable => "NoHousesAvailable",
        EnvError::SpawnFailure(_) => "SpawnFailure",
        EnvError::NotReset => "NotReset",
        EnvError::UnknownAgent(_) => "UnknownAgent",
        EnvError::Scene(_) => "SceneError",
        EnvError::Render(_) => "RenderError",
        EnvError::Audio(_) => "AudioError",
        EnvError::Physics(_) => "PhysicsError",
        EnvError::Blocked(_) => "Blocked",
        EnvError::Codec(_) => "CodecError",
    }
}

struct Fault {
    code: &'static str,
    message: String,
}

impl Fault {
    fn new(code: &'static str, message: impl Into<String>) -> Fault {
        Fault {
            code,
            message: message.into(),
        }
    }
}

impl From<EnvError> for Fault {
    fn from(e: EnvError) -> Self {
        Fault::new(error_code(&e), e.to_string())
    }
}

/// Recursively overlays `patch` on `base`.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

/// Plane shapes a client should expect for `cfg`.
pub fn observation_shapes(cfg: &EnvConfig) -> Value {
    let (h, w) = (cfg.height as usize, cfg.width as usize);
    let m = cfg.modalities;
    let mut s = Map::new();
    if m.rgb {
        s.insert("rgb".into(), json!({"dtype": "u8", "shape": [h, w, 3]}));
    }
    if m.depth {
        s.insert("depth".into(), json!({"dtype": "f32", "shape": [h, w]}));
    }
    if m.segmentation {
        s.insert("segmentation".into(), json!({"dtype": "u16", "shape": [h, w]}));
        s.insert("instances".into(), json!({"dtype": "u32", "shape": [h, w]}));
    }
    if m.audio {
        s.insert("audio".into(), json!({"dtype": "f32", "shape": [2, cfg.audio_frame_len()]}));
    }
    Value::Object(s)
}

fn frame_blobs(f: &FrameBundle) -> (Value, Vec<u8>) {
    let obs = Observation {
        agent_id: String::new(),
        step: 0,
        pose: home_core::env::Pose {
            position: [0.0; 3],
            yaw: 0.0,
            pitch: 0.0,
        },
        held: None,
        collided: false,
        frame: f.clone(),
        audio: home_core::acoustics::StereoFrame {
            left: Vec::new(),
            right: Vec::new(),
        },
        semantics: Vec::new(),
    };
    let (h, data) = obs.encode();
    (serde_json::to_value(&h.blobs).expect("blob specs serialize"), data)
}

pub struct Session {
    base: EnvConfig,
    env: Option<Env>,
    last_id: Option<u64>,
}

fn body_u64(body: &Value, key: &str) -> Result<Option<u64>, Fault> {
    match body.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Fault::new("BadRequest", format!("{key} must be a non-negative integer"))),
    }
}

fn body_str<'a>(body: &'a Value, key: &str) -> Result<&'a str, Fault> {
    body.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Fault::new("BadRequest", format!("{key} must be a string")))
}

pub fn parse_actions(body: &Value) -> Result<BTreeMap<String, Action>, String> {
    let Some(v) = body.get("actions") else {
        return Ok(BTreeMap::new());
    };
    let Some(map) = v.as_object() else {
        return Err("actions must be an object".into());
    };
    let mut out = BTreeMap::new();
    for (id, a) in map {
        let action = match a {
            Value::String(s) => Action::from_name(s),
            Value::Number(n) => n.as_u64().and_then(|i| u8::try_from(i).ok()).and_then(Action::from_index),
            _ => None,
        }
        .ok_or_else(|| format!("invalid action {a} for {id:?}"))?;
        out.insert(id.clone(), action);
    }
    Ok(out)
}

impl Session {
    pub fn new(base: EnvConfig) -> Session {
        Session {
            base,
            env: None,
            last_id: None,
        }
    }

    fn env_mut(&mut self) -> Result<&mut Env, Fault> {
        self.env.as_mut().ok_or_else(|| EnvError::NotReset.into())
    }

    /// Answers one request. Returns the reply and whether the connection should close.
    pub fn handle(&mut self, req: &Envelope) -> (Envelope, Vec<u8>, bool) {
        let reply = |kind: &str, body: Value| Envelope {
            id: req.id,
            kind: kind.into(),
            body,
        };
        let fault = |f: Fault| reply("error", json!({"error": f.code, "message": f.message}));
        match req.id {
            None => return (fault(Fault::new("BadRequest", "request id is required")), Vec::new(), false),
            Some(id) if self.last_id.is_some_and(|l| id <= l) => {
                let f = Fault::new("IdNotIncreasing", format!("id {id} does not exceed {}", self.last_id.unwrap()));
                return (fault(f), Vec::new(), false);
            }
            Some(id) => self.last_id = Some(id),
        }
        match declared_blobs(&req.body) {
            Ok(0) => {}
            Ok(_) => return (fault(Fault::new("BadRequest", "requests carry no blobs")), Vec::new(), false),
            Err(m) => return (fault(Fault::new("BadRequest", m)), Vec::new(), false),
        }
        let close = req.kind == "close";
        match self.dispatch(req) {
            Ok((mut body, blobs)) => {
                if !blobs.is_empty() {
                    body["blob_bytes"] = json!(blobs.len());
                }
                (reply("result", body), blobs, close)
            }
            Err(f) => (fault(f), Vec::new(), close),
        }
    }

    fn dispatch(&mut self, req: &Envelope) -> Result<(Value, Vec<u8>), Fault> {
        let body = &req.body;
        match req.kind.as_str() {
            "hello" => {
                let version = body_str(body, "version")?;
                if version != PROTOCOL {
                    return Err(Fault::new("VersionMismatch", format!("server speaks {PROTOCOL}, client sent {version:?}")));
                }
                let cfg = match body.get("config") {
                    None | Some(Value::Null) => self.base.clone(),
                    Some(patch) => {
                        let mut v = serde_json::to_value(&self.base).map_err(|e| Fault::new("ConfigError", e.to_string()))?;
                        merge_json(&mut v, patch);
                        serde_json::from_value(v).map_err(|e| Fault::new("ConfigError", e.to_string()))?
                    }
                };
                let env = make_env(cfg)?;
                let cfg = env.config();
                let body = json!({
                    "protocol": PROTOCOL,
                    "modalities": cfg.modalities.names(),
                    "actions": Action::ALL.map(Action::name),
                    "observation": observation_shapes(cfg),
                    "config": serde_json::to_value(cfg).unwrap_or(Value::Null),
                });
                self.env = Some(env);
                Ok((body, Vec::new()))
            }
            "reset" => {
                let seed = body_u64(body, "seed")?;
                if self.env.is_none() {
                    self.env = Some(make_env(self.base.clone())?);
                }
                let env = self.env_mut()?;
                let obs = env.reset(seed)?;
                let (headers, data) = encode_observations(&obs);
                let house = env.house().map(|h| h.id.clone());
                Ok((json!({"house_id": house, "observations": headers}), data))
            }
            "step" => {
                let actions = parse_actions(body).map_err(|m| Fault::new("BadRequest", m))?;
                let r = self.env_mut()?.step(&actions)?;
                let (header, data) = r.encode();
                Ok((serde_json::to_value(header).map_err(|e| Fault::new("CodecError", e.to_string()))?, data))
            }
            "spawn" => {
                let id = self.env_mut()?.spawn_agent()?;
                Ok((json!({"agent_id": id}), Vec::new()))
            }
            "render" => {
                let agent = body_str(body, "agent_id")?.to_owned();
                let env = self.env_mut()?;
                let (w, h) = (env.config().width as u64, env.config().height as u64);
                let w = body_u64(body, "width")?.unwrap_or(w);
                let h = body_u64(body, "height")?.unwrap_or(h);
                if !(1..=4096).contains(&w) || !(1..=4096).contains(&h) {
                    return Err(Fault::new("BadRequest", "width and height must lie in 1..=4096"));
                }
                let frame = env.render_view(&agent, w as u32, h as u32)?;
                let (blobs, data) = frame_blobs(&frame);
                Ok((json!({"width": w, "height": h, "blobs": blobs}), data))
            }
            "close" => {
                self.env = None;
                Ok((json!({}), Vec::new()))
            }
            other => Err(Fault::new("UnknownKind", format!("unknown request kind {other:?}"))),
        }
    }
}

/// Serves one connection until close, EOF or an unrecoverable framing error.
pub fn serve_connection<S: Read + Write>(stream: &mut S, base: EnvConfig) -> io::Result<()> {
    let mut session = Session::new(base);
    loop {
        let payload = match read_frame(stream, MAX_PAYLOAD) {
            Ok(p) => p,
            Err(FrameError::Eof) => return Ok(()),
            Err(FrameError::TooLarge(n)) => {
                // The rest of the stream cannot be re-synchronised.
                let e = Envelope {
                    id: None,
                    kind: "error".into(),
                    body: json!({"error": "FrameTooLarge", "message": format!("payload of {n} bytes exceeds {MAX_PAYLOAD}")}),
                };
                return write_message(stream, &e, &[]);
            }
            Err(FrameError::Io(e)) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(FrameError::Io(e)) => return Err(e),
        };
        let (reply, blobs, close) = match parse_envelope(&payload) {
            Ok(req) => session.handle(&req),
            Err(m) => (
                Envelope {
                    id: None,
                    kind: "error".into(),
                    body: json!({"error": "MalformedEnvelope", "message": m}),
                },
                Vec::new(),
                false,
            ),
        };
        write_message(stream, &reply, &blobs)?;
        if close {
            return Ok(());
        }
    }
}

/// Accepts TCP connections forever, one thread per connection. `limit` stops after that
/// many connections have been accepted and served.
pub fn serve_tcp(listener: TcpListener, base: EnvConfig, limit: Option<usize>) -> io::Result<()> {
    let mut handles = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let mut stream = stream?;
        let _ = stream.set_nodelay(true);
        let cfg = base.clone();
        handles.push(thread::spawn(move || {
            if let Err(e) = serve_connection(&mut stream, cfg) {
                log::warn!("connection ended: {e}");
            }
        }));
        if limit.is_some_and(|l| n + 1 >= l) {
            break;
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}

#[cfg(unix)]
pub fn serve_unix(listener: std::os::unix::net::UnixListener, base: EnvConfig) -> io::Result<()> {
    for stream in listener.incoming() {
        let mut stream = stream?;
        let cfg = base.clone();
        thread::spawn(move || {
            if let Err(e) = serve_connection(&mut stream, cfg) {
                log::warn!("connection ended: {e}");
            }
        });
    }
    Ok(())
}
