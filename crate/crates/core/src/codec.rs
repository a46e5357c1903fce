//! Byte codecs for intermediate files.
//!
//! Run lengths and Ψ deltas use unsigned LEB128-style varints: seven payload
//! bits per byte, least significant group first, continuation bit set on
//! every byte but the last.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecId {
    Identity,
    Rle,
}

impl CodecId {
    pub fn to_byte(self) -> u8 {
        match self {
            CodecId::Identity => 0,
            CodecId::Rle => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(CodecId::Identity),
            1 => Some(CodecId::Rle),
            _ => None,
        }
    }
}

impl fmt::Display for CodecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodecId::Identity => "identity",
            CodecId::Rle => "rle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    /// Input ended inside a varint or before a run's byte.
    Truncated,
    /// Varint longer than 64 bits.
    Overflow,
    /// A run of length zero.
    EmptyRun,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Truncated => f.write_str("truncated codec stream"),
            DecodeError::Overflow => f.write_str("varint overflows 64 bits"),
            DecodeError::EmptyRun => f.write_str("zero-length run"),
        }
    }
}

pub fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Incremental varint decoder; feed bytes until it yields a value.
#[derive(Debug, Default, Clone)]
pub struct VarintDecoder {
    acc: u64,
    shift: u32,
}

impl VarintDecoder {
    pub fn push(&mut self, b: u8) -> Result<Option<u64>, DecodeError> {
        if self.shift >= 64 || (self.shift == 63 && (b & 0x7f) > 1) {
            return Err(DecodeError::Overflow);
        }
        self.acc |= u64::from(b & 0x7f) << self.shift;
        if b & 0x80 == 0 {
            let v = self.acc;
            *self = Self::default();
            Ok(Some(v))
        } else {
            self.shift += 7;
            Ok(None)
        }
    }

    pub fn is_idle(&self) -> bool {
        self.shift == 0
    }
}

/// Decode one varint from the front of `buf`, returning it and the bytes used.
pub fn read_varint(buf: &[u8]) -> Result<(u64, usize), DecodeError> {
    let mut dec = VarintDecoder::default();
    for (i, &b) in buf.iter().enumerate() {
        if let Some(v) = dec.push(b)? {
            return Ok((v, i + 1));
        }
    }
    Err(DecodeError::Truncated)
}

#[inline]
pub fn zigzag_encode(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

#[inline]
pub fn zigzag_decode(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

/// Streaming run-length encoder. Runs are maximal: a run is only closed when
/// a different byte arrives or the encoder is finished.
#[derive(Debug, Default, Clone)]
pub struct RleEncoder {
    current: Option<(u8, u64)>,
}

impl RleEncoder {
    /// Accept one byte; any completed run is appended to `out`.
    #[inline]
    pub fn push(&mut self, b: u8, out: &mut Vec<u8>) {
        match &mut self.current {
            Some((c, len)) if *c == b => *len += 1,
            _ => {
                self.flush(out);
                self.current = Some((b, 1));
            }
        }
    }

    pub fn push_run(&mut self, b: u8, count: u64, out: &mut Vec<u8>) {
        if count == 0 {
            return;
        }
        match &mut self.current {
            Some((c, len)) if *c == b => *len += count,
            _ => {
                self.flush(out);
                self.current = Some((b, count));
            }
        }
    }

    pub fn finish(&mut self, out: &mut Vec<u8>) {
        self.flush(out);
    }

    fn flush(&mut self, out: &mut Vec<u8>) {
        if let Some((c, len)) = self.current.take() {
            write_varint(out, len);
            out.push(c);
        }
    }
}

/// Streaming run-length decoder.
#[derive(Debug, Default, Clone)]
pub struct RleDecoder {
    len: VarintDecoder,
    pending_len: Option<u64>,
}

impl RleDecoder {
    /// Feed one encoded byte; returns a completed `(byte, run_length)`.
    pub fn push(&mut self, b: u8) -> Result<Option<(u8, u64)>, DecodeError> {
        match self.pending_len.take() {
            Some(len) => Ok(Some((b, len))),
            None => {
                if let Some(len) = self.len.push(b)? {
                    if len == 0 {
                        return Err(DecodeError::EmptyRun);
                    }
                    self.pending_len = Some(len);
                }
                Ok(None)
            }
        }
    }

    /// True when the decoder sits on a run boundary.
    pub fn is_idle(&self) -> bool {
        self.pending_len.is_none() && self.len.is_idle()
    }
}

pub fn rle_encode(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = RleEncoder::default();
    for &b in payload {
        enc.push(b, &mut out);
    }
    enc.finish(&mut out);
    out
}

pub fn rle_decode(encoded: &[u8]) -> Result<Vec<u8>, DecodeError> {
    let mut out = Vec::new();
    let mut dec = RleDecoder::default();
    for &b in encoded {
        if let Some((c, len)) = dec.push(b)? {
            out.extend(core::iter::repeat(c).take(len as usize));
        }
    }
    if !dec.is_idle() {
        return Err(DecodeError::Truncated);
    }
    Ok(out)
}

pub fn encode(codec: CodecId, payload: &[u8]) -> Vec<u8> {
    match codec {
        CodecId::Identity => payload.to_vec(),
        CodecId::Rle => rle_encode(payload),
    }
}

pub fn decode(codec: CodecId, encoded: &[u8]) -> Result<Vec<u8>, DecodeError> {
    match codec {
        CodecId::Identity => Ok(encoded.to_vec()),
        CodecId::Rle => rle_decode(encoded),
    }
}

impl core::error::Error for DecodeError {}
