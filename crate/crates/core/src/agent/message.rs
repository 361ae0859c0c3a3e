//! Wired envelope: 4-octet big-endian length prefix, then a JSON object.
//!
//! ```text
//! {"sender", "seq", "type", "ttl", "ns", "origin", "origin_seq", "to"?, "body_b64", "sig_b64"}
//! ```
//!
//! The signature covers the JSON header (every field except body and
//! signature) followed by the sealed body octets.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::ApId;

pub const LENGTH_PREFIX_LEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageType {
    Data,
    Kcm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlMessage {
    pub sender: ApId,
    pub seq: u64,
    pub msg_type: MessageType,
    pub ttl: u8,
    pub namespace: String,
    /// Originator and its sequence number; equal to sender/seq on the first hop.
    pub origin: ApId,
    pub origin_seq: u64,
    /// Set on one-hop unicast messages.
    pub to: Option<ApId>,
    pub body_sealed: Vec<u8>,
    pub signature: Vec<u8>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("frame shorter than its length prefix")]
    Truncated,
    #[error("length prefix {declared} does not match payload {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("bad envelope: {0}")]
    Json(String),
    #[error("bad base64 field")]
    Base64,
    #[error("ttl must be at least 1")]
    ZeroTtl,
}

#[derive(Serialize)]
struct Header<'a> {
    sender: &'a ApId,
    seq: u64,
    #[serde(rename = "type")]
    msg_type: MessageType,
    ttl: u8,
    ns: &'a str,
    origin: &'a ApId,
    origin_seq: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<&'a ApId>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    sender: ApId,
    seq: u64,
    #[serde(rename = "type")]
    msg_type: MessageType,
    ttl: u8,
    ns: String,
    origin: ApId,
    origin_seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<ApId>,
    body_b64: String,
    sig_b64: String,
}

impl ControlMessage {
    fn header(&self) -> Header<'_> {
        Header {
            sender: &self.sender,
            seq: self.seq,
            msg_type: self.msg_type,
            ttl: self.ttl,
            ns: &self.namespace,
            origin: &self.origin,
            origin_seq: self.origin_seq,
            to: self.to.as_ref(),
        }
    }

    /// Octets covered by the signature.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(&self.header()).expect("header serializes");
        out.extend_from_slice(&self.body_sealed);
        out
    }

    pub fn encode(&self) -> Vec<u8> {
        let wire = Wire {
            sender: self.sender.clone(),
            seq: self.seq,
            msg_type: self.msg_type,
            ttl: self.ttl,
            ns: self.namespace.clone(),
            origin: self.origin.clone(),
            origin_seq: self.origin_seq,
            to: self.to.clone(),
            body_b64: B64.encode(&self.body_sealed),
            sig_b64: B64.encode(&self.signature),
        };
        let json = serde_json::to_vec(&wire).expect("envelope serializes");
        let mut out = Vec::with_capacity(LENGTH_PREFIX_LEN + json.len());
        out.extend_from_slice(&(json.len() as u32).to_be_bytes());
        out.extend_from_slice(&json);
        out
    }

    pub fn decode(raw: &[u8]) -> Result<Self, DecodeError> {
        if raw.len() < LENGTH_PREFIX_LEN {
            return Err(DecodeError::Truncated);
        }
        let declared = u32::from_be_bytes(raw[..LENGTH_PREFIX_LEN].try_into().expect("4 octets")) as usize;
        let json = &raw[LENGTH_PREFIX_LEN..];
        if declared != json.len() {
            return Err(DecodeError::LengthMismatch { declared, actual: json.len() });
        }
        let wire: Wire = serde_json::from_slice(json).map_err(|e| DecodeError::Json(e.to_string()))?;
        if wire.ttl == 0 {
            return Err(DecodeError::ZeroTtl);
        }
        Ok(ControlMessage {
            sender: wire.sender,
            seq: wire.seq,
            msg_type: wire.msg_type,
            ttl: wire.ttl,
            namespace: wire.ns,
            origin: wire.origin,
            origin_seq: wire.origin_seq,
            to: wire.to,
            body_sealed: B64.decode(wire.body_b64).map_err(|_| DecodeError::Base64)?,
            signature: B64.decode(wire.sig_b64).map_err(|_| DecodeError::Base64)?,
        })
    }
}

/// Plaintext body of a key change message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KcmBody {
    pub channel: u16,
    pub ssid: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ControlMessage {
        ControlMessage {
            sender: "b".into(),
            seq: 7,
            msg_type: MessageType::Data,
            ttl: 2,
            namespace: "de.tu-berlin.ch-assign".into(),
            origin: "a".into(),
            origin_seq: 3,
            to: None,
            body_sealed: vec![1, 2, 3, 250],
            signature: vec![9; 128],
        }
    }

    #[test]
    fn roundtrip() {
        let m = sample();
        let raw = m.encode();
        assert_eq!(u32::from_be_bytes(raw[..4].try_into().unwrap()) as usize, raw.len() - 4);
        assert_eq!(ControlMessage::decode(&raw).unwrap(), m);
        let mut u = sample();
        u.to = Some("c".into());
        assert_eq!(ControlMessage::decode(&u.encode()).unwrap(), u);
    }

    #[test]
    fn signing_bytes_bind_header_and_body() {
        let m = sample();
        let mut other = sample();
        other.ttl = 1;
        assert_ne!(m.signing_bytes(), other.signing_bytes());
        let mut other = sample();
        other.body_sealed[0] ^= 1;
        assert_ne!(m.signing_bytes(), other.signing_bytes());
        let mut other = sample();
        other.signature = vec![];
        assert_eq!(m.signing_bytes(), other.signing_bytes());
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(ControlMessage::decode(&[0, 0]), Err(DecodeError::Truncated));
        let mut raw = sample().encode();
        raw.push(b' ');
        assert!(matches!(ControlMessage::decode(&raw), Err(DecodeError::LengthMismatch { .. })));
        let mut zero = sample();
        zero.ttl = 0;
        assert_eq!(ControlMessage::decode(&zero.encode()), Err(DecodeError::ZeroTtl));
        let junk = [&[0u8, 0, 0, 3][..], b"{}x"].concat();
        assert!(matches!(ControlMessage::decode(&junk), Err(DecodeError::Json(_))));
    }

    #[test]
    fn wire_field_names() {
        let raw = sample().encode();
        let v: serde_json::Value = serde_json::from_slice(&raw[4..]).unwrap();
        for key in ["sender", "seq", "type", "ttl", "ns", "body_b64", "sig_b64"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["type"], "data");
    }
}
