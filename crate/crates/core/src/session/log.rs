//! Line-delimited transcript log, one record per message:
//!
//! ```text
//! # protocol=<id> params=<hex>
//! <session id, 8 bytes hex> <direction> <step label> <tag hex> <payload hex>
//! # sha256=<hex of all preceding lines>
//! ```
//!
//! Empty payloads are written as `-`. The trailing checksum covers every
//! preceding byte, so any single-bit tampering of a stored log is detectable
//! even in payload regions that carry uniformly random protocol data.

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::message::Message;
use super::{Direction, Transcript, TranscriptEntry};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum LogError {
    #[error("malformed log line {0}: {1}")]
    BadLine(usize, String),
    #[error("missing protocol header")]
    MissingHeader,
    #[error("missing integrity line")]
    MissingChecksum,
    #[error("integrity check failed: log was modified")]
    ChecksumMismatch,
}

pub fn write_log(t: &Transcript) -> String {
    let mut body = String::new();
    body.push_str(&format!(
        "# protocol={} params={}\n",
        t.protocol,
        if t.params.is_empty() {
            "-".to_string()
        } else {
            hex::encode(&t.params)
        }
    ));
    for e in &t.entries {
        let payload = if e.message.payload.is_empty() {
            "-".to_string()
        } else {
            hex::encode(&e.message.payload)
        };
        body.push_str(&format!(
            "{:016x} {} {} {:02x} {}\n",
            t.session_id, e.direction, e.label, e.message.tag, payload
        ));
    }
    let digest = Sha256::digest(body.as_bytes());
    body.push_str(&format!("# sha256={}\n", hex::encode(digest)));
    body
}

pub fn parse_log(text: &str) -> Result<Transcript, LogError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(LogError::MissingHeader)?;
    let header = header
        .strip_prefix("# protocol=")
        .ok_or(LogError::MissingHeader)?;
    let (protocol, params_part) = header
        .split_once(" params=")
        .ok_or(LogError::MissingHeader)?;
    let params = if params_part == "-" {
        Vec::new()
    } else {
        hex::decode(params_part).map_err(|e| LogError::BadLine(0, e.to_string()))?
    };

    let mut session_id = None;
    let mut entries = Vec::new();
    let mut checksum: Option<String> = None;
    for (lineno, line) in lines {
        if let Some(sum) = line.strip_prefix("# sha256=") {
            checksum = Some(sum.to_string());
            // the checksum covers everything before this line
            let body_len = text
                .find("# sha256=")
                .expect("prefix was found on a line");
            let digest = Sha256::digest(&text.as_bytes()[..body_len]);
            if hex::encode(digest) != sum {
                return Err(LogError::ChecksumMismatch);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(LogError::BadLine(lineno, "expected 5 fields".into()));
        }
        let sid = u64::from_str_radix(fields[0], 16)
            .map_err(|e| LogError::BadLine(lineno, e.to_string()))?;
        match session_id {
            None => session_id = Some(sid),
            Some(prev) if prev != sid => {
                return Err(LogError::BadLine(lineno, "session id changed".into()))
            }
            _ => {}
        }
        let direction = match fields[1] {
            "A->B" => Direction::AToB,
            "B->A" => Direction::BToA,
            other => return Err(LogError::BadLine(lineno, format!("bad direction {other}"))),
        };
        let tag = u8::from_str_radix(fields[3], 16)
            .map_err(|e| LogError::BadLine(lineno, e.to_string()))?;
        let payload = if fields[4] == "-" {
            Vec::new()
        } else {
            hex::decode(fields[4]).map_err(|e| LogError::BadLine(lineno, e.to_string()))?
        };
        entries.push(TranscriptEntry {
            direction,
            label: fields[2].to_string(),
            message: Message::new(tag, payload),
        });
    }
    if checksum.is_none() {
        return Err(LogError::MissingChecksum);
    }
    Ok(Transcript {
        session_id: session_id.unwrap_or(0),
        protocol: protocol.to_string(),
        params,
        entries,
    })
}
