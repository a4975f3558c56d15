//! Pluggable transports. Both carry the identical wire encoding, so a
//! transcript does not depend on which one carried it.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};

use super::message::{FramingError, MAX_PAYLOAD};
use super::SessionError;

pub trait Transport {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), SessionError>;
    fn recv_frame(&mut self) -> Result<Vec<u8>, SessionError>;
}

/// In-process queue, the default.
#[derive(Default)]
pub struct InProcTransport {
    queue: VecDeque<Vec<u8>>,
}

impl InProcTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for InProcTransport {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), SessionError> {
        self.queue.push_back(frame.to_vec());
        Ok(())
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, SessionError> {
        self.queue
            .pop_front()
            .ok_or_else(|| SessionError::Transport("no frame queued".into()))
    }
}

/// Byte-stream loopback over a real TCP socket pair on 127.0.0.1.
pub struct LoopbackTransport {
    writer: TcpStream,
    reader: TcpStream,
}

impl LoopbackTransport {
    pub fn new() -> Result<Self, SessionError> {
        let listener = TcpListener::bind("127.0.0.1:0")
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        let addr = listener
            .local_addr()
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        let writer =
            TcpStream::connect(addr).map_err(|e| SessionError::Transport(e.to_string()))?;
        let (reader, _) = listener
            .accept()
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        writer
            .set_nodelay(true)
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        Ok(LoopbackTransport { writer, reader })
    }
}

impl Transport for LoopbackTransport {
    fn send_frame(&mut self, frame: &[u8]) -> Result<(), SessionError> {
        self.writer
            .write_all(frame)
            .map_err(|e| SessionError::Transport(e.to_string()))
    }

    fn recv_frame(&mut self) -> Result<Vec<u8>, SessionError> {
        let mut header = [0u8; 5];
        self.reader
            .read_exact(&mut header)
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]) as usize;
        if len > MAX_PAYLOAD {
            return Err(SessionError::Framing(FramingError::Oversize(len)));
        }
        let mut frame = header.to_vec();
        frame.resize(5 + len, 0);
        self.reader
            .read_exact(&mut frame[5..])
            .map_err(|e| SessionError::Transport(e.to_string()))?;
        Ok(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::message::{decode_message, encode_message, Message};

    #[test]
    fn inproc_round_trip() {
        let mut t = InProcTransport::new();
        let m = Message::new(9, vec![1, 2, 3]);
        t.send_frame(&encode_message(&m)).unwrap();
        let got = t.recv_frame().unwrap();
        assert_eq!(decode_message(&got).unwrap(), m);
        assert!(t.recv_frame().is_err());
    }

    #[test]
    fn loopback_round_trip() {
        let mut t = LoopbackTransport::new().unwrap();
        for i in 0..10u8 {
            let m = Message::new(i, vec![i; i as usize]);
            t.send_frame(&encode_message(&m)).unwrap();
            let got = t.recv_frame().unwrap();
            assert_eq!(decode_message(&got).unwrap(), m);
        }
    }
}
