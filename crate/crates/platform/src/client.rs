//! Blocking home-wire/1 client.

use std::collections::BTreeMap;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};

use home_core::env::{decode_observations, Action, Observation, ObservationHeader, StepHeader, StepResult};
use serde_json::{json, Value};
use thiserror::Error;

use crate::wire::{read_message, write_message, Envelope, FrameError, Message, PROTOCOL};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("{code}: {message}")]
    Remote { code: String, message: String },
}

impl From<FrameError> for ClientError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Eof => ClientError::Io(io::ErrorKind::UnexpectedEof.into()),
            FrameError::TooLarge(n) => ClientError::Protocol(format!("reply of {n} bytes is too large")),
            FrameError::Io(e) => ClientError::Io(e),
        }
    }
}

impl ClientError {
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Remote { code, .. } => Some(code),
            _ => None,
        }
    }
}

pub struct WireClient<S: Read + Write> {
    reader: BufReader<S>,
    next_id: u64,
}

impl WireClient<TcpStream> {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let s = TcpStream::connect(addr)?;
        s.set_nodelay(true)?;
        Ok(WireClient::new(s))
    }
}

impl<S: Read + Write> WireClient<S> {
    pub fn new(stream: S) -> Self {
        WireClient {
            reader: BufReader::new(stream),
            next_id: 1,
        }
    }

    /// Sends a raw payload exactly as given (length prefix added).
    pub fn send_raw(&mut self, payload: &[u8]) -> io::Result<()> {
        let s = self.reader.get_mut();
        let mut w = BufWriter::new(s);
        w.write_all(&(payload.len() as u32).to_le_bytes())?;
        w.write_all(payload)?;
        w.flush()
    }

    pub fn read_response(&mut self) -> Result<Message, ClientError> {
        Ok(read_message(&mut self.reader)?)
    }

    /// Sends one request and returns the result body and blobs; error replies become
    /// [`ClientError::Remote`].
    pub fn request(&mut self, kind: &str, body: Value) -> Result<(Value, Vec<u8>), ClientError> {
        let id = self.next_id;
        self.next_id += 1;
        let env = Envelope {
            id: Some(id),
            kind: kind.into(),
            body,
        };
        write_message(self.reader.get_mut(), &env, &[])?;
        let m = self.read_response()?;
        if m.envelope.id != Some(id) {
            return Err(ClientError::Protocol(format!("reply id {:?} for request {id}", m.envelope.id)));
        }
        match m.envelope.kind.as_str() {
            "result" => Ok((m.envelope.body, m.blobs)),
            "error" => Err(ClientError::Remote {
                code: m.envelope.body["error"].as_str().unwrap_or("").to_owned(),
                message: m.envelope.body["message"].as_str().unwrap_or("").to_owned(),
            }),
            k => Err(ClientError::Protocol(format!("unexpected reply kind {k:?}"))),
        }
    }

    pub fn hello(&mut self, config: Option<Value>) -> Result<Value, ClientError> {
        let mut body = json!({"version": PROTOCOL});
        if let Some(c) = config {
            body["config"] = c;
        }
        Ok(self.request("hello", body)?.0)
    }

    /// Returns the house id and the initial observations.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<(String, BTreeMap<String, Observation>), ClientError> {
        let (body, blobs) = self.request("reset", json!({"seed": seed}))?;
        let headers: Vec<ObservationHeader> =
            serde_json::from_value(body["observations"].clone()).map_err(|e| ClientError::Protocol(e.to_string()))?;
        let obs = decode_observations(&headers, &blobs).map_err(|e| ClientError::Protocol(e.to_string()))?;
        Ok((body["house_id"].as_str().unwrap_or("").to_owned(), obs))
    }

    /// Steps and returns the decoded result together with the raw blob section.
    pub fn step_raw(&mut self, actions: &BTreeMap<String, Action>) -> Result<(StepResult, Vec<u8>), ClientError> {
        let a: BTreeMap<&str, &str> = actions.iter().map(|(k, v)| (k.as_str(), v.name())).collect();
        let (mut body, blobs) = self.request("step", json!({ "actions": a }))?;
        if let Some(o) = body.as_object_mut() {
            o.remove("blob_bytes");
        }
        let header: StepHeader = serde_json::from_value(body).map_err(|e| ClientError::Protocol(e.to_string()))?;
        let r = StepResult::decode(&header, &blobs).map_err(|e| ClientError::Protocol(e.to_string()))?;
        Ok((r, blobs))
    }

    pub fn step(&mut self, actions: &BTreeMap<String, Action>) -> Result<StepResult, ClientError> {
        Ok(self.step_raw(actions)?.0)
    }

    pub fn spawn(&mut self) -> Result<String, ClientError> {
        let (body, _) = self.request("spawn", json!({}))?;
        body["agent_id"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| ClientError::Protocol("spawn reply lacks agent_id".into()))
    }

    /// Returns the reply body (with blob specs) and the plane bytes.
    pub fn render(&mut self, agent_id: &str, width: u32, height: u32) -> Result<(Value, Vec<u8>), ClientError> {
        self.request("render", json!({"agent_id": agent_id, "width": width, "height": height}))
    }

    pub fn close(&mut self) -> Result<(), ClientError> {
        self.request("close", json!({}))?;
        Ok(())
    }
}
