//! Payload composition helpers shared by the protocol machines. Every field
//! uses the module-level encodings (integers, graphs, permutations, bit
//! strings), concatenated in protocol-defined order.

use num_bigint::BigUint;

use crate::bits::Bits;
use crate::graphs::{Graph, Permutation, PlantedSolution};
use crate::numtheory;
use crate::session::ProtocolError;

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn byte(mut self, b: u8) -> Self {
        self.buf.push(b);
        self
    }

    pub fn int(mut self, v: &BigUint) -> Self {
        self.buf.extend_from_slice(&numtheory::encode_int(v));
        self
    }

    pub fn graph(mut self, g: &Graph) -> Self {
        self.buf.extend_from_slice(&g.encode());
        self
    }

    pub fn perm(mut self, p: &Permutation) -> Self {
        self.buf.extend_from_slice(&p.encode());
        self
    }

    pub fn bits(mut self, b: &Bits) -> Self {
        self.buf.extend_from_slice(&b.encode());
        self
    }

    pub fn witness(mut self, w: &[usize]) -> Self {
        self.buf
            .extend_from_slice(&PlantedSolution::encode_witness(w));
        self
    }

    pub fn raw(mut self, bytes: &[u8]) -> Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn malformed(what: &str) -> ProtocolError {
        ProtocolError::Malformed(format!("cannot decode {what}"))
    }

    pub fn byte(&mut self) -> Result<u8, ProtocolError> {
        let b = *self
            .buf
            .get(self.pos)
            .ok_or_else(|| Self::malformed("byte"))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn int(&mut self) -> Result<BigUint, ProtocolError> {
        let (v, used) = numtheory::decode_int(&self.buf[self.pos..])
            .map_err(|_| Self::malformed("integer"))?;
        self.pos += used;
        Ok(v)
    }

    pub fn graph(&mut self) -> Result<Graph, ProtocolError> {
        let (g, used) =
            Graph::decode(&self.buf[self.pos..]).map_err(|_| Self::malformed("graph"))?;
        self.pos += used;
        Ok(g)
    }

    pub fn perm(&mut self) -> Result<Permutation, ProtocolError> {
        let (p, used) =
            Permutation::decode(&self.buf[self.pos..]).map_err(|_| Self::malformed("permutation"))?;
        self.pos += used;
        Ok(p)
    }

    pub fn bits(&mut self) -> Result<Bits, ProtocolError> {
        let (b, used) =
            Bits::decode(&self.buf[self.pos..]).map_err(|_| Self::malformed("bit string"))?;
        self.pos += used;
        Ok(b)
    }

    pub fn witness(&mut self) -> Result<Vec<usize>, ProtocolError> {
        let (w, used) = PlantedSolution::decode_witness(&self.buf[self.pos..])
            .map_err(|_| Self::malformed("witness"))?;
        self.pos += used;
        Ok(w)
    }

    pub fn raw(&mut self, len: usize) -> Result<&'a [u8], ProtocolError> {
        if self.buf.len() < self.pos + len {
            return Err(Self::malformed("raw bytes"));
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    /// All fields consumed, nothing trailing.
    pub fn done(&self) -> Result<(), ProtocolError> {
        if self.pos != self.buf.len() {
            return Err(ProtocolError::Malformed("trailing payload bytes".into()));
        }
        Ok(())
    }
}

/// Check the tag of an incoming message and hand back a reader over its
/// payload.
pub fn expect_tag(msg: &crate::session::Message, tag: u8) -> Result<Reader<'_>, ProtocolError> {
    if msg.tag != tag {
        return Err(ProtocolError::Malformed(format!(
            "unexpected tag {:#04x}, wanted {:#04x}",
            msg.tag, tag
        )));
    }
    Ok(Reader::new(&msg.payload))
}

/// The message every machine expects when advanced mid-protocol.
pub fn require_message(incoming: Option<crate::session::Message>) -> Result<crate::session::Message, ProtocolError> {
    incoming.ok_or(ProtocolError::NeedInput)
}
