//! home-wire/1 framing.
//!
//! A message is a u32 little-endian payload length, a JSON payload `{id, kind, body}`, then
//! `body.blob_bytes` bytes of concatenated binary planes (absent means zero). Requests carry
//! no blobs.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL: &str = "home-wire/1";
/// Largest JSON payload accepted.
pub const MAX_PAYLOAD: usize = 16 << 20;
/// Largest blob section a client will read.
pub const MAX_BLOBS: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    /// Request counter; replies echo it. Null only on replies to unparsable requests.
    pub id: Option<u64>,
    pub kind: String,
    #[serde(default)]
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub envelope: Envelope,
    pub blobs: Vec<u8>,
}

#[derive(Debug)]
pub enum FrameError {
    /// Stream ended cleanly before a new frame.
    Eof,
    TooLarge(u64),
    Io(io::Error),
}

impl From<io::Error> for FrameError {
    fn from(e: io::Error) -> Self {
        FrameError::Io(e)
    }
}

pub fn write_message<W: Write>(w: &mut W, envelope: &Envelope, blobs: &[u8]) -> io::Result<()> {
    let payload = serde_json::to_vec(envelope).map_err(io::Error::other)?;
    let len = u32::try_from(payload.len()).map_err(|_| io::Error::other("payload over 4 GiB"))?;
    let mut buf = Vec::with_capacity(4 + payload.len() + blobs.len());
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend(payload);
    buf.extend_from_slice(blobs);
    w.write_all(&buf)?;
    w.flush()
}

/// Reads one length-prefixed payload.
pub fn read_frame<R: Read>(r: &mut R, max: usize) -> Result<Vec<u8>, FrameError> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Err(FrameError::Eof),
            Ok(0) => return Err(FrameError::Io(io::ErrorKind::UnexpectedEof.into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let n = u32::from_le_bytes(len) as u64;
    if n as usize > max {
        return Err(FrameError::TooLarge(n));
    }
    let mut payload = vec![0u8; n as usize];
    r.read_exact(&mut payload)?;
    Ok(payload)
}

pub fn parse_envelope(payload: &[u8]) -> Result<Envelope, String> {
    let e: Envelope = serde_json::from_slice(payload).map_err(|e| e.to_string())?;
    if !(e.body.is_object() || e.body.is_null()) {
        return Err("body must be an object".into());
    }
    Ok(e)
}

/// The blob byte count a body declares.
pub fn declared_blobs(body: &Value) -> Result<usize, String> {
    match body.get("blob_bytes") {
        None | Some(Value::Null) => Ok(0),
        Some(v) => v
            .as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| "blob_bytes must be a non-negative integer".to_string()),
    }
}

/// Reads a full message including its blobs.
pub fn read_message<R: Read>(r: &mut R) -> Result<Message, FrameError> {
    let payload = read_frame(r, MAX_PAYLOAD)?;
    let envelope = parse_envelope(&payload).map_err(|m| FrameError::Io(io::Error::new(io::ErrorKind::InvalidData, m)))?;
    let n = declared_blobs(&envelope.body).map_err(|m| FrameError::Io(io::Error::new(io::ErrorKind::InvalidData, m)))?;
    if n > MAX_BLOBS {
        return Err(FrameError::TooLarge(n as u64));
    }
    let mut blobs = vec![0u8; n];
    r.read_exact(&mut blobs)?;
    Ok(Message { envelope, blobs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn message_round_trip() {
        let e = Envelope {
            id: Some(7),
            kind: "result".into(),
            body: json!({"blob_bytes": 3, "x": 1.5}),
        };
        let mut buf = Vec::new();
        write_message(&mut buf, &e, &[1, 2, 3]).unwrap();
        let len = u32::from_le_bytes(buf[..4].try_into().unwrap()) as usize;
        assert_eq!(buf.len(), 4 + len + 3);
        let m = read_message(&mut buf.as_slice()).unwrap();
        assert_eq!(m.envelope, e);
        assert_eq!(m.blobs, vec![1, 2, 3]);
    }

    #[test]
    fn frame_limits() {
        let mut big = Vec::new();
        big.extend_from_slice(&(MAX_PAYLOAD as u32 + 1).to_le_bytes());
        assert!(matches!(read_frame(&mut big.as_slice(), MAX_PAYLOAD), Err(FrameError::TooLarge(_))));
        assert!(matches!(read_frame(&mut [].as_slice(), MAX_PAYLOAD), Err(FrameError::Eof)));
        assert!(matches!(read_frame(&mut [1u8, 0].as_slice(), MAX_PAYLOAD), Err(FrameError::Io(_))));
    }

    #[test]
    fn envelope_validation() {
        assert!(parse_envelope(br#"{"id":1,"kind":"hello","body":{}}"#).is_ok());
        assert!(parse_envelope(br#"{"id":1,"kind":"hello"}"#).is_ok());
        assert!(parse_envelope(br#"{"id":1,"kind":"hello","body":[1]}"#).is_err());
        assert!(parse_envelope(br#"{"id":-1,"kind":"hello"}"#).is_err());
        assert!(parse_envelope(br#"{"id":1,"kind":"hello","extra":0}"#).is_err());
        assert!(parse_envelope(b"\xff\xfe").is_err());
        assert_eq!(declared_blobs(&json!({"blob_bytes": 5})), Ok(5));
        assert!(declared_blobs(&json!({"blob_bytes": -5})).is_err());
        assert!(declared_blobs(&json!({"blob_bytes": "5"})).is_err());
    }
}
