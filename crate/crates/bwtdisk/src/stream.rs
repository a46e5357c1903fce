//! Buffered byte and bit streams over blobs, with codec support.

use std::io::{self, Read, Write};

use bwtdisk_core::codec::{CodecId, RleDecoder, RleEncoder};

use crate::error::{Error, Result};
use crate::store::{Blob, RawReader, RawWriter};

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Forward reader yielding decoded bytes.
#[derive(Debug)]
pub struct ByteReader {
    raw: RawReader,
    /// Grows towards `CHUNK` as reads continue; short streams stay cheap.
    buf: Vec<u8>,
    pos: usize,
    len: usize,
    codec: CodecId,
    dec: RleDecoder,
    run: (u8, u64),
    moved: u64,
    limit: u64,
}

impl ByteReader {
    pub fn new(raw: RawReader, codec: CodecId) -> Self {
        Self::with_limit(raw, codec, u64::MAX)
    }

    /// Stops after `limit` encoded bytes.
    pub fn with_limit(raw: RawReader, codec: CodecId, limit: u64) -> Self {
        ByteReader {
            raw,
            buf: Vec::new(),
            pos: 0,
            len: 0,
            codec,
            dec: RleDecoder::default(),
            run: (0, 0),
            moved: 0,
            limit,
        }
    }

    pub fn open(blob: &Blob, pos: u64, codec: CodecId) -> Result<Self> {
        Ok(Self::new(blob.reader_at(pos)?, codec))
    }

    fn raw_byte(&mut self) -> io::Result<Option<u8>> {
        if self.pos == self.len {
            if self.limit == 0 {
                return Ok(None);
            }
            if self.buf.len() < CHUNK {
                let grown = (self.buf.len() * 2).clamp(512, CHUNK);
                self.buf.resize(grown, 0);
            }
            let want = (self.buf.len() as u64).min(self.limit) as usize;
            let n = self.raw.read(&mut self.buf[..want])?;
            if n == 0 {
                return Ok(None);
            }
            self.limit -= n as u64;
            self.pos = 0;
            self.len = n;
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        Ok(Some(b))
    }

    /// Next run of equal decoded bytes, at most `max` long.
    pub fn next_run(&mut self, max: u64) -> Result<Option<(u8, u64)>> {
        debug_assert!(max > 0);
        if self.codec == CodecId::Identity {
            return Ok(self.raw_byte()?.map(|b| {
                self.moved += 1;
                (b, 1)
            }));
        }
        while self.run.1 == 0 {
            match self.raw_byte()? {
                Some(b) => {
                    if let Some(r) = self.dec.push(b)? {
                        self.run = r;
                    }
                }
                None if self.dec.is_idle() => return Ok(None),
                None => return Err(Error::corrupt("truncated run")),
            }
        }
        let k = self.run.1.min(max);
        self.run.1 -= k;
        self.moved += k;
        Ok(Some((self.run.0, k)))
    }

    #[inline]
    pub fn next(&mut self) -> Result<Option<u8>> {
        if self.codec == CodecId::Identity {
            let b = self.raw_byte()?;
            self.moved += b.is_some() as u64;
            return Ok(b);
        }
        if self.run.1 > 0 {
            self.run.1 -= 1;
            self.moved += 1;
            return Ok(Some(self.run.0));
        }
        Ok(self.next_run(1)?.map(|(b, _)| b))
    }

    pub fn byte(&mut self) -> Result<u8> {
        self.next()?.ok_or_else(|| Error::corrupt("unexpected end of stream"))
    }

    pub fn fill(&mut self, out: &mut [u8]) -> Result<()> {
        if self.codec == CodecId::Identity && self.len - self.pos >= out.len() {
            out.copy_from_slice(&self.buf[self.pos..self.pos + out.len()]);
            self.pos += out.len();
            self.moved += out.len() as u64;
            return Ok(());
        }
        for b in out {
            *b = self.byte()?;
        }
        Ok(())
    }

    pub fn u64_le(&mut self) -> Result<u64> {
        let mut b = [0; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    /// Decoded bytes delivered so far.
    pub fn bytes_moved(&self) -> u64 {
        self.moved
    }

    /// Encoded position of the next byte.
    pub fn position(&self) -> u64 {
        self.raw.position() - (self.len - self.pos) as u64
    }

    /// Repositions an identity reader, keeping the buffer when possible.
    pub fn seek_to(&mut self, pos: u64) -> Result<()> {
        debug_assert_eq!(self.codec, CodecId::Identity);
        let buf_start = self.raw.position() - self.len as u64;
        if pos >= buf_start && pos <= self.raw.position() {
            self.pos = (pos - buf_start) as usize;
        } else {
            self.raw.seek_to(pos)?;
            self.pos = 0;
            self.len = 0;
        }
        Ok(())
    }

    /// Copies `count` bytes of an identity stream.
    pub fn copy_to(&mut self, w: &mut ByteWriter, mut count: u64) -> Result<()> {
        debug_assert_eq!(self.codec, CodecId::Identity);
        while count > 0 {
            if self.pos == self.len {
                let b = self.raw_byte()?.ok_or_else(|| Error::corrupt("unexpected end of stream"))?;
                self.pos -= 1;
                debug_assert_eq!(self.buf[self.pos], b);
            }
            let k = ((self.len - self.pos) as u64).min(count) as usize;
            w.put_slice(&self.buf[self.pos..self.pos + k])?;
            self.pos += k;
            self.moved += k as u64;
            count -= k as u64;
        }
        Ok(())
    }
}

/// Reads an identity-coded range last byte first.
#[derive(Debug)]
pub struct BackwardReader {
    raw: RawReader,
    buf: Box<[u8]>,
    avail: usize,
    lo: u64,
    cur: u64,
    moved: u64,
}

impl BackwardReader {
    /// Yields bytes `hi-1` down to `lo`.
    pub fn new(blob: &Blob, lo: u64, hi: u64) -> Result<Self> {
        Ok(BackwardReader { raw: blob.reader_at(hi)?, buf: vec![0; (hi.saturating_sub(lo) as usize).min(CHUNK)].into_boxed_slice(), avail: 0, lo, cur: hi, moved: 0 })
    }

    #[inline]
    pub fn next(&mut self) -> Result<Option<u8>> {
        if self.avail == 0 {
            if self.cur == self.lo {
                return Ok(None);
            }
            let n = ((self.cur - self.lo) as usize).min(self.buf.len());
            self.cur -= n as u64;
            self.raw.seek_to(self.cur)?;
            self.raw.read_exact(&mut self.buf[..n])?;
            self.avail = n;
        }
        self.avail -= 1;
        self.moved += 1;
        Ok(Some(self.buf[self.avail]))
    }

    pub fn bytes_moved(&self) -> u64 {
        self.moved
    }
}

/// A byte stream in either direction.
#[derive(Debug)]
pub enum ByteStream {
    Forward(ByteReader),
    Backward(BackwardReader),
}

impl ByteStream {
    pub fn next(&mut self) -> Result<Option<u8>> {
        match self {
            ByteStream::Forward(r) => r.next(),
            ByteStream::Backward(r) => r.next(),
        }
    }

    pub fn bytes_moved(&self) -> u64 {
        match self {
            ByteStream::Forward(r) => r.bytes_moved(),
            ByteStream::Backward(r) => r.bytes_moved(),
        }
    }
}

impl Iterator for ByteStream {
    type Item = Result<u8>;

    fn next(&mut self) -> Option<Result<u8>> {
        ByteStream::next(self).transpose()
    }
}

/// Opens a whole blob. Backward reading needs random access to the encoded
/// bytes, which only the identity codec provides.
pub fn open_stream(blob: &Blob, direction: Direction, codec: CodecId) -> Result<ByteStream> {
    match direction {
        Direction::Forward => Ok(ByteStream::Forward(ByteReader::open(blob, 0, codec)?)),
        Direction::Backward if codec == CodecId::Identity => Ok(ByteStream::Backward(BackwardReader::new(blob, 0, blob.len())?)),
        Direction::Backward => Err(Error::Unsupported(format!("backward reading of a {codec} stream"))),
    }
}

/// Buffered encoding writer.
#[derive(Debug)]
pub struct ByteWriter {
    raw: RawWriter,
    buf: Vec<u8>,
    codec: CodecId,
    enc: RleEncoder,
    moved: u64,
}

impl ByteWriter {
    pub fn new(raw: RawWriter, codec: CodecId) -> Self {
        ByteWriter { raw, buf: Vec::with_capacity(CHUNK + 16), codec, enc: RleEncoder::default(), moved: 0 }
    }

    pub fn open(blob: &Blob, pos: u64, codec: CodecId) -> Result<Self> {
        Ok(Self::new(blob.writer_at(pos)?, codec))
    }

    #[inline]
    fn spill(&mut self) -> io::Result<()> {
        if self.buf.len() >= CHUNK {
            self.raw.write_all(&self.buf)?;
            self.buf.clear();
        }
        Ok(())
    }

    #[inline]
    pub fn put(&mut self, b: u8) -> Result<()> {
        match self.codec {
            CodecId::Identity => self.buf.push(b),
            CodecId::Rle => self.enc.push(b, &mut self.buf),
        }
        self.moved += 1;
        self.spill()?;
        Ok(())
    }

    pub fn put_run(&mut self, b: u8, count: u64) -> Result<()> {
        match self.codec {
            CodecId::Identity => {
                for _ in 0..count {
                    self.buf.push(b);
                    self.spill()?;
                }
            }
            CodecId::Rle => {
                self.enc.push_run(b, count, &mut self.buf);
                self.spill()?;
            }
        }
        self.moved += count;
        Ok(())
    }

    pub fn put_slice(&mut self, bytes: &[u8]) -> Result<()> {
        if self.codec == CodecId::Identity {
            self.buf.extend_from_slice(bytes);
            self.moved += bytes.len() as u64;
            self.spill()?;
            return Ok(());
        }
        bytes.iter().try_for_each(|&b| self.put(b))
    }

    pub fn put_u64_le(&mut self, v: u64) -> Result<()> {
        self.put_slice(&v.to_le_bytes())
    }

    /// Encoded bytes handed to storage so far (pending data excluded).
    pub fn position(&self) -> u64 {
        self.raw.position()
    }

    pub fn bytes_moved(&self) -> u64 {
        self.moved
    }

    /// Flushes everything; returns the number of decoded bytes written.
    pub fn finish(mut self) -> Result<u64> {
        if self.codec == CodecId::Rle {
            self.enc.finish(&mut self.buf);
        }
        self.raw.write_all(&self.buf)?;
        self.raw.flush()?;
        Ok(self.moved)
    }
}

/// LSB-first bit reader over identity bytes.
#[derive(Debug)]
pub struct BitReader {
    bytes: ByteReader,
    cur: u8,
    used: u8,
    left: u64,
}

impl BitReader {
    /// Reads `bits` bits starting at byte `pos`.
    pub fn new(blob: &Blob, pos: u64, bits: u64) -> Result<Self> {
        Ok(BitReader { bytes: ByteReader::with_limit(blob.reader_at(pos)?, CodecId::Identity, bits.div_ceil(8)), cur: 0, used: 8, left: bits })
    }

    pub fn remaining(&self) -> u64 {
        self.left
    }

    #[inline]
    pub fn next(&mut self) -> Result<Option<bool>> {
        if self.left == 0 {
            return Ok(None);
        }
        if self.used == 8 {
            self.cur = self.bytes.byte()?;
            self.used = 0;
        }
        let bit = self.cur >> self.used & 1 == 1;
        self.used += 1;
        self.left -= 1;
        Ok(Some(bit))
    }
}

impl Iterator for BitReader {
    type Item = Result<bool>;

    fn next(&mut self) -> Option<Result<bool>> {
        BitReader::next(self).transpose()
    }
}

/// LSB-first bit writer.
#[derive(Debug)]
pub struct BitWriter {
    bytes: ByteWriter,
    cur: u8,
    used: u8,
    count: u64,
}

impl BitWriter {
    pub fn new(blob: &Blob, pos: u64) -> Result<Self> {
        Ok(BitWriter { bytes: ByteWriter::open(blob, pos, CodecId::Identity)?, cur: 0, used: 0, count: 0 })
    }

    #[inline]
    pub fn push(&mut self, bit: bool) -> Result<()> {
        self.cur |= (bit as u8) << self.used;
        self.used += 1;
        self.count += 1;
        if self.used == 8 {
            self.bytes.put(self.cur)?;
            self.cur = 0;
            self.used = 0;
        }
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Pads the last byte with zeros; returns the number of bits written.
    pub fn finish(mut self) -> Result<u64> {
        if self.used > 0 {
            self.bytes.put(self.cur)?;
        }
        self.bytes.finish()?;
        Ok(self.count)
    }
}
