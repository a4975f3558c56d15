//! Fixed-length bit strings used as OT secrets and comparison masks.
//!
//! Bits are packed most-significant-first; unused trailing bits of the last
//! byte are kept zero so equality on the byte vector is equality on the
//! string.

use num_bigint::BigUint;
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum BitsError {
    #[error("bit-string length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("malformed bit-string encoding")]
    BadEncoding,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    bytes: Vec<u8>,
}

impl Bits {
    pub fn zero(len: usize) -> Self {
        Bits {
            len,
            bytes: vec![0u8; (len + 7) / 8],
        }
    }

    pub fn random<R: RngCore>(len: usize, rng: &mut R) -> Self {
        let mut b = Bits::zero(len);
        rng.fill_bytes(&mut b.bytes);
        b.mask_tail();
        b
    }

    /// Parse from a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self, BitsError> {
        let mut b = Bits::zero(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(BitsError::BadEncoding),
            }
        }
        Ok(b)
    }

    /// The low `len` bits of `v`, read from its fixed-width big-endian
    /// encoding. This is the XOR mask rule of the DLP-based transfer.
    pub fn low_bits(v: &BigUint, len: usize) -> Self {
        let modulus = BigUint::from(1u8) << len;
        let reduced = v % modulus;
        let src = reduced.to_bytes_be();
        let mut b = Bits::zero(len);
        // right-align the magnitude into the bit string
        for i in 0..len {
            let bit_from_right = i;
            let byte_idx = src.len().checked_sub(1 + bit_from_right / 8);
            let bit = match byte_idx {
                Some(bi) => (src[bi] >> (bit_from_right % 8)) & 1 == 1,
                None => false,
            };
            b.set(len - 1 - i, bit);
        }
        b
    }

    pub fn from_u64(v: u64, len: usize) -> Self {
        Self::low_bits(&BigUint::from(v), len)
    }

    pub fn to_u64(&self) -> u64 {
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        if v {
            self.bytes[i / 8] |= 0x80 >> (i % 8);
        } else {
            self.bytes[i / 8] &= !(0x80 >> (i % 8));
        }
    }

    fn mask_tail(&mut self) {
        let extra = self.bytes.len() * 8 - self.len;
        if extra > 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= 0xffu8 << extra;
        }
    }

    pub fn xor(&self, other: &Bits) -> Result<Bits, BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch(self.len, other.len));
        }
        Ok(Bits {
            len: self.len,
            bytes: self
                .bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::from(0u8);
        for i in 0..self.len {
            v = (v << 1) | BigUint::from(self.get(i) as u8);
        }
        v
    }

    /// Wire encoding: 2-byte big-endian bit length, then the packed bytes.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + self.bytes.len());
        out.extend_from_slice(&(self.len as u16).to_be_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn decode(buf: &[u8]) -> Result<(Bits, usize), BitsError> {
        if buf.len() < 2 {
            return Err(BitsError::BadEncoding);
        }
        let len = u16::from_be_bytes([buf[0], buf[1]]) as usize;
        let nbytes = (len + 7) / 8;
        if buf.len() < 2 + nbytes {
            return Err(BitsError::BadEncoding);
        }
        let mut b = Bits {
            len,
            bytes: buf[2..2 + nbytes].to_vec(),
        };
        b.mask_tail();
        Ok((b, 2 + nbytes))
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn parse_and_display() {
        let b = Bits::parse("10101").unwrap();
        assert_eq!(b.to_string(), "10101");
        assert_eq!(b.to_u64(), 0b10101);
        assert!(Bits::parse("10x").is_err());
    }

    #[test]
    fn low_bits_rule() {
        // 0b110101 low 4 bits = 0101
        let b = Bits::low_bits(&BigUint::from(0b110101u8), 4);
        assert_eq!(b.to_string(), "0101");
        // wider than the value: zero-extended on the left
        let b = Bits::low_bits(&BigUint::from(0b101u8), 6);
        assert_eq!(b.to_string(), "000101");
    }

    #[test]
    fn xor_masking_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..500 {
            let len = 1 + (rng.next_u64() % 70) as usize;
            let s = Bits::random(len, &mut rng);
            let mask = Bits::random(len, &mut rng);
            let masked = s.xor(&mask).unwrap();
            assert_eq!(masked.xor(&mask).unwrap(), s);
        }
        let a = Bits::zero(4);
        let b = Bits::zero(5);
        assert_eq!(a.xor(&b).unwrap_err(), BitsError::LengthMismatch(4, 5));
    }

    #[test]
    fn codec_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let len = (rng.next_u64() % 100) as usize;
            let b = Bits::random(len, &mut rng);
            let enc = b.encode();
            let (dec, used) = Bits::decode(&enc).unwrap();
            assert_eq!(dec, b);
            assert_eq!(used, enc.len());
        }
    }
}
