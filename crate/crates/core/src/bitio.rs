//! LIFO bit stacks.
//!
//! Both the secret message and the coder's renormalization traffic live on a
//! [`BitStack`]. Reads and writes act on the top of the stack: a write of `i`
//! bits pushes the value so that its most significant bit ends up on top, and
//! a read of `i` bits pops them back most-significant first, so
//! `read(write(q, i), i) == q mod 2^i`.

use thiserror::Error;

/// Errors raised by bit-level I/O.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitIoError {
    #[error("bit stack underflow: requested {requested} bits, {available} available")]
    Underflow { requested: u32, available: usize },
    #[error("invalid bit width {0} (must be 1..=64)")]
    InvalidWidth(u32),
    #[error("serialized bit stack is truncated")]
    Truncated,
}

/// Anything the ANS state machine can pull bits from and push bits to.
pub trait BitChannel {
    fn read_bits(&mut self, width: u32) -> Result<u64, BitIoError>;
    fn write_bits(&mut self, value: u64, width: u32) -> Result<(), BitIoError>;
}

#[inline]
fn check_width(width: u32) -> Result<(), BitIoError> {
    if (1..=64).contains(&width) {
        Ok(())
    } else {
        Err(BitIoError::InvalidWidth(width))
    }
}

/// A last-in first-out stack of bits. The top of the stack is the end of the
/// backing vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitStack {
    bits: Vec<bool>,
}

impl BitStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bits: Vec::with_capacity(bits),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Pushes the low `width` bits of `value`, most significant bit last (on top).
    pub fn write(&mut self, value: u64, width: u32) -> Result<(), BitIoError> {
        check_width(width)?;
        self.bits.extend((0..width).map(|k| (value >> k) & 1 == 1));
        Ok(())
    }

    /// Pops `width` bits; the first bit popped is the most significant.
    pub fn read(&mut self, width: u32) -> Result<u64, BitIoError> {
        check_width(width)?;
        if self.bits.len() < width as usize {
            return Err(BitIoError::Underflow {
                requested: width,
                available: self.bits.len(),
            });
        }
        let mut value = 0u64;
        for _ in 0..width {
            // Length was checked above.
            let bit = self.bits.pop().unwrap_or(false);
            value = (value << 1) | bit as u64;
        }
        Ok(value)
    }

    /// Pushes a single bit.
    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Pops a single bit.
    pub fn pop(&mut self) -> Option<bool> {
        self.bits.pop()
    }

    /// Bits from top to bottom.
    pub fn iter_top_down(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().rev().copied()
    }

    /// Builds a stack whose top holds the first bit yielded.
    pub fn from_bits_top_down<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut bits: Vec<bool> = bits.into_iter().collect();
        bits.reverse();
        Self { bits }
    }

    /// Interprets bytes MSB-first: the most significant bit of `bytes[0]` ends
    /// up on top of the stack and is the first bit read.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_bits_top_down(
            bytes
                .iter()
                .flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1 == 1)),
        )
    }

    /// Packs the stack top-first into bytes, MSB-first within each byte; a
    /// trailing partial byte is zero-padded in its low bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, bit) in self.iter_top_down().enumerate() {
            if bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Length-prefixed form: a little-endian `u64` bit count followed by
    /// [`to_bytes`](Self::to_bytes).
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.bits.len().div_ceil(8));
        out.extend_from_slice(&(self.bits.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.to_bytes());
        out
    }

    /// Inverse of [`serialize`](Self::serialize). Returns the stack and the
    /// number of input bytes consumed.
    pub fn deserialize(data: &[u8]) -> Result<(Self, usize), BitIoError> {
        let header: [u8; 8] = data
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or(BitIoError::Truncated)?;
        let count = u64::from_le_bytes(header);
        let count = usize::try_from(count).map_err(|_| BitIoError::Truncated)?;
        let nbytes = count.div_ceil(8);
        let body = data.get(8..8 + nbytes).ok_or(BitIoError::Truncated)?;
        let stack = Self::from_bits_top_down(
            (0..count).map(|i| (body[i / 8] >> (7 - (i % 8))) & 1 == 1),
        );
        Ok((stack, 8 + nbytes))
    }

    /// Removes the top `count` bits and returns them as their own stack, in
    /// the same orientation.
    pub fn split_top(&mut self, count: usize) -> BitStack {
        let at = self.bits.len().saturating_sub(count);
        BitStack {
            bits: self.bits.split_off(at),
        }
    }

    /// Places `other` on top of `self`.
    pub fn push_stack(&mut self, other: &BitStack) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Discards `count` bits from the bottom of the stack.
    pub fn drop_bottom(&mut self, count: usize) {
        let count = count.min(self.bits.len());
        self.bits.drain(..count);
    }

    /// Keeps only the top `count` bits.
    pub fn truncate_to_top(&mut self, count: usize) {
        if count < self.bits.len() {
            let excess = self.bits.len() - count;
            self.drop_bottom(excess);
        }
    }
}

impl BitChannel for BitStack {
    fn read_bits(&mut self, width: u32) -> Result<u64, BitIoError> {
        self.read(width)
    }

    fn write_bits(&mut self, value: u64, width: u32) -> Result<(), BitIoError> {
        self.write(value, width)
    }
}

/// The message as seen by an embedder.
///
/// Reads past the bottom of the payload are served as zero bits and counted
/// in `pad_count`. The container also tracks the lowest depth the payload
/// reached, which separates the untouched tail of the message from the bits
/// the coder left on top (the residue the extractor needs to start from).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageContainer {
    payload: BitStack,
    original_len: u64,
    pad_count: u64,
    low_water: usize,
}

impl MessageContainer {
    pub fn new(payload: BitStack) -> Self {
        let len = payload.len();
        Self {
            payload,
            original_len: len as u64,
            pad_count: 0,
            low_water: len,
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::new(BitStack::from_bytes(bytes))
    }

    pub fn payload(&self) -> &BitStack {
        &self.payload
    }

    pub fn into_payload(self) -> BitStack {
        self.payload
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    /// Bit length of the message as originally supplied.
    pub fn original_len(&self) -> u64 {
        self.original_len
    }

    /// Zero bits synthesized because the payload ran dry.
    pub fn pad_count(&self) -> u64 {
        self.pad_count
    }

    /// Lowest payload length observed since construction (or the last
    /// [`take_residue`](Self::take_residue)).
    pub fn low_water(&self) -> usize {
        self.low_water
    }

    /// Number of original message bits that have been consumed so far.
    pub fn consumed_message_bits(&self) -> u64 {
        self.original_len - self.low_water as u64
    }

    /// Detaches everything above the low-water mark. What remains is the
    /// untouched bottom of the original message.
    pub fn take_residue(&mut self) -> BitStack {
        let above = self.payload.len() - self.low_water;
        let residue = self.payload.split_top(above);
        self.low_water = self.payload.len();
        residue
    }
}

impl BitChannel for MessageContainer {
    fn read_bits(&mut self, width: u32) -> Result<u64, BitIoError> {
        check_width(width)?;
        let available = self.payload.len();
        let value = if available >= width as usize {
            self.payload.read(width)?
        } else {
            let missing = width - available as u32;
            let head = if available == 0 {
                0
            } else {
                self.payload.read(available as u32)?
            };
            self.pad_count += missing as u64;
            // The synthesized zeros sit below the real bits.
            if missing == 64 {
                0
            } else {
                head << missing
            }
        };
        self.low_water = self.low_water.min(self.payload.len());
        Ok(value)
    }

    fn write_bits(&mut self, value: u64, width: u32) -> Result<(), BitIoError> {
        self.payload.write(value, width)
    }
}
