//! Message framing: tag byte, 4-byte big-endian payload length, payload.

use thiserror::Error;

/// Hard cap on payload size; anything larger is a framing violation.
pub const MAX_PAYLOAD: usize = 1 << 24;

/// A tagged protocol message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub tag: u8,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(tag: u8, payload: Vec<u8>) -> Self {
        Message { tag, payload }
    }
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FramingError {
    #[error("truncated frame: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("declared payload length {0} exceeds the maximum")]
    Oversize(usize),
    #[error("trailing bytes after frame")]
    TrailingBytes,
}

pub fn encode_message(m: &Message) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + m.payload.len());
    out.push(m.tag);
    out.extend_from_slice(&(m.payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&m.payload);
    out
}

/// Decode a single complete frame; trailing bytes are an error.
pub fn decode_message(buf: &[u8]) -> Result<Message, FramingError> {
    let (m, used) = decode_message_prefix(buf)?;
    if used != buf.len() {
        return Err(FramingError::TrailingBytes);
    }
    Ok(m)
}

/// Decode one frame from the front of `buf`, returning the bytes consumed.
pub fn decode_message_prefix(buf: &[u8]) -> Result<(Message, usize), FramingError> {
    if buf.len() < 5 {
        return Err(FramingError::Truncated {
            need: 5,
            have: buf.len(),
        });
    }
    let tag = buf[0];
    let len = u32::from_be_bytes([buf[1], buf[2], buf[3], buf[4]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(FramingError::Oversize(len));
    }
    if buf.len() < 5 + len {
        return Err(FramingError::Truncated {
            need: 5 + len,
            have: buf.len(),
        });
    }
    Ok((
        Message {
            tag,
            payload: buf[5..5 + len].to_vec(),
        },
        5 + len,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn empty_payload_is_five_bytes() {
        let m = Message::new(7, Vec::new());
        let enc = encode_message(&m);
        assert_eq!(enc.len(), 5);
        assert_eq!(decode_message(&enc).unwrap(), m);
    }

    #[test]
    fn round_trip_random_messages() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let len = (rng.next_u64() % 64) as usize;
            let mut payload = vec![0u8; len];
            rng.fill_bytes(&mut payload);
            let m = Message::new((rng.next_u64() % 256) as u8, payload);
            assert_eq!(decode_message(&encode_message(&m)).unwrap(), m);
        }
    }

    #[test]
    fn truncated_and_oversize() {
        let m = Message::new(1, vec![1, 2, 3]);
        let enc = encode_message(&m);
        assert!(matches!(
            decode_message(&enc[..enc.len() - 1]),
            Err(FramingError::Truncated { .. })
        ));
        // declared length larger than remaining bytes
        let bad = [1u8, 0, 0, 0, 9, 1, 2, 3];
        assert!(matches!(
            decode_message(&bad),
            Err(FramingError::Truncated { .. })
        ));
        let huge = [1u8, 0xff, 0xff, 0xff, 0xff];
        assert!(matches!(decode_message(&huge), Err(FramingError::Oversize(_))));
    }

    #[test]
    fn single_byte_corruption_never_decodes_to_original() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..500 {
            let len = (rng.next_u64() % 32) as usize;
            let mut payload = vec![0u8; len];
            rng.fill_bytes(&mut payload);
            let m = Message::new(3, payload);
            let enc = encode_message(&m);
            let pos = (rng.next_u64() as usize) % enc.len();
            let mut corrupt = enc.clone();
            corrupt[pos] ^= 1 << (rng.next_u64() % 8);
            match decode_message(&corrupt) {
                Ok(dec) => assert_ne!(dec, m, "corruption silently accepted"),
                Err(_) => {}
            }
        }
    }
}
