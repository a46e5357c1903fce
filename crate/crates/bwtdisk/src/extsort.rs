//! Stable external merge sort of fixed-width records.

use std::cmp::Ordering;

use bwtdisk_core::codec::CodecId;

use crate::error::{Error, Result};
use crate::store::{Blob, Workspace};
use crate::stream::{ByteReader, ByteWriter};

/// Most runs merged at once.
pub const MAX_FAN_IN: usize = 32;

/// Fixed-width serialization of a record type.
pub trait RecordCodec {
    type Rec;
    fn width(&self) -> usize;
    fn encode(&self, rec: &Self::Rec, out: &mut [u8]);
    fn decode(&self, bytes: &[u8]) -> Self::Rec;
}

/// Opaque records of a given width.
#[derive(Debug, Clone, Copy)]
pub struct RawRecords(pub usize);

impl RecordCodec for RawRecords {
    type Rec = Box<[u8]>;

    fn width(&self) -> usize {
        self.0
    }

    fn encode(&self, rec: &Box<[u8]>, out: &mut [u8]) {
        out.copy_from_slice(rec);
    }

    fn decode(&self, bytes: &[u8]) -> Box<[u8]> {
        bytes.into()
    }
}

/// Records of `K` little-endian u64 fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct U64s<const K: usize>;

impl<const K: usize> RecordCodec for U64s<K> {
    type Rec = [u64; K];

    fn width(&self) -> usize {
        8 * K
    }

    fn encode(&self, rec: &[u64; K], out: &mut [u8]) {
        for (chunk, v) in out.chunks_exact_mut(8).zip(rec) {
            chunk.copy_from_slice(&v.to_le_bytes());
        }
    }

    fn decode(&self, bytes: &[u8]) -> [u64; K] {
        let mut r = [0; K];
        for (v, chunk) in r.iter_mut().zip(bytes.chunks_exact(8)) {
            *v = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        r
    }
}

/// Sequential record writer into a blob.
pub struct RecordWriter<'c, C: RecordCodec> {
    codec: &'c C,
    out: ByteWriter,
    scratch: Vec<u8>,
    count: u64,
}

impl<'c, C: RecordCodec> RecordWriter<'c, C> {
    pub fn new(codec: &'c C, blob: &Blob) -> Result<Self> {
        Ok(RecordWriter { codec, out: ByteWriter::open(blob, 0, CodecId::Identity)?, scratch: vec![0; codec.width()], count: 0 })
    }

    pub fn push(&mut self, rec: &C::Rec) -> Result<()> {
        self.codec.encode(rec, &mut self.scratch);
        self.out.put_slice(&self.scratch)?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<u64> {
        self.out.finish()?;
        Ok(self.count)
    }
}

/// Sequential record reader.
pub struct RecordReader<'c, C: RecordCodec> {
    codec: &'c C,
    input: ByteReader,
    scratch: Vec<u8>,
    left: u64,
}

impl<'c, C: RecordCodec> RecordReader<'c, C> {
    pub fn new(codec: &'c C, blob: &Blob) -> Result<Self> {
        let w = codec.width() as u64;
        if blob.len() % w != 0 {
            return Err(Error::corrupt(format!("record file of {} bytes is not a multiple of {w}", blob.len())));
        }
        Ok(RecordReader { codec, input: ByteReader::open(blob, 0, CodecId::Identity)?, scratch: vec![0; codec.width()], left: blob.len() / w })
    }

    pub fn remaining(&self) -> u64 {
        self.left
    }

    pub fn next_rec(&mut self) -> Result<Option<C::Rec>> {
        if self.left == 0 {
            return Ok(None);
        }
        self.input.fill(&mut self.scratch)?;
        self.left -= 1;
        Ok(Some(self.codec.decode(&self.scratch)))
    }
}

impl<C: RecordCodec> Iterator for RecordReader<'_, C> {
    type Item = Result<C::Rec>;

    fn next(&mut self) -> Option<Result<C::Rec>> {
        self.next_rec().transpose()
    }
}

/// Sorts records stably by `cmp` using at most `budget` bytes of records in
/// memory. Returns a temp blob holding the sorted records.
pub fn sort_records<C, F>(
    ws: &Workspace,
    codec: &C,
    input: impl IntoIterator<Item = Result<C::Rec>>,
    budget: usize,
    cmp: F,
) -> Result<Blob>
where
    C: RecordCodec,
    F: Fn(&C::Rec, &C::Rec) -> Ordering,
{
    let width = codec.width();
    let cap = budget / width.max(1);
    if cap < 2 {
        return Err(Error::BudgetTooSmall { budget, width });
    }
    let mut runs: Vec<Blob> = Vec::new();
    let mut buf: Vec<C::Rec> = Vec::with_capacity(cap.min(1 << 20));
    let mut input = input.into_iter().peekable();
    loop {
        buf.clear();
        while buf.len() < cap {
            match input.next() {
                Some(r) => buf.push(r?),
                None => break,
            }
        }
        if buf.is_empty() && !runs.is_empty() {
            break;
        }
        buf.sort_by(&cmp);
        let run = ws.temp("run")?;
        let mut w = RecordWriter::new(codec, &run)?;
        buf.iter().try_for_each(|r| w.push(r))?;
        w.finish()?;
        runs.push(run);
        if input.peek().is_none() {
            break;
        }
    }
    drop(buf);
    let fan_in = MAX_FAN_IN.min(cap).max(2);
    while runs.len() > 1 {
        let mut next = Vec::with_capacity(runs.len().div_ceil(fan_in));
        let mut it = runs.into_iter().peekable();
        while it.peek().is_some() {
            let group: Vec<Blob> = it.by_ref().take(fan_in).collect();
            next.push(merge_runs(ws, codec, &group, &cmp)?);
        }
        runs = next;
    }
    Ok(runs.pop().expect("at least one run"))
}

/// Merges sorted runs; ties go to the earlier run, which keeps the sort
/// stable.
fn merge_runs<C, F>(ws: &Workspace, codec: &C, runs: &[Blob], cmp: &F) -> Result<Blob>
where
    C: RecordCodec,
    F: Fn(&C::Rec, &C::Rec) -> Ordering,
{
    let out = ws.temp("run")?;
    let mut w = RecordWriter::new(codec, &out)?;
    let mut readers = runs.iter().map(|b| RecordReader::new(codec, b)).collect::<Result<Vec<_>>>()?;
    let mut heads: Vec<Option<C::Rec>> = readers.iter_mut().map(|r| r.next_rec()).collect::<Result<_>>()?;
    let less = |heads: &[Option<C::Rec>], a: usize, b: usize| match cmp(heads[a].as_ref().unwrap(), heads[b].as_ref().unwrap()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a < b,
    };
    let mut heap: Vec<usize> = (0..heads.len()).filter(|&i| heads[i].is_some()).collect();
    for i in (0..heap.len() / 2).rev() {
        sift_down(&mut heap, i, |a, b| less(&heads, a, b));
    }
    while let Some(&top) = heap.first() {
        let rec = heads[top].take().unwrap();
        w.push(&rec)?;
        heads[top] = readers[top].next_rec()?;
        if heads[top].is_none() {
            let last = heap.pop().unwrap();
            if heap.is_empty() {
                break;
            }
            heap[0] = last;
        }
        sift_down(&mut heap, 0, |a, b| less(&heads, a, b));
    }
    w.finish()?;
    Ok(out)
}

fn sift_down(heap: &mut [usize], mut i: usize, less: impl Fn(usize, usize) -> bool) {
    loop {
        let l = 2 * i + 1;
        if l >= heap.len() {
            return;
        }
        let c = if l + 1 < heap.len() && less(heap[l + 1], heap[l]) { l + 1 } else { l };
        if !less(heap[c], heap[i]) {
            return;
        }
        heap.swap(c, i);
        i = c;
    }
}

/// Compares `key_width` bytes at `key_offset` as a little-endian unsigned
/// integer.
pub fn le_key_cmp(a: &[u8], b: &[u8], key_offset: usize, key_width: usize) -> Ordering {
    let ka = &a[key_offset..key_offset + key_width];
    let kb = &b[key_offset..key_offset + key_width];
    ka.iter().rev().cmp(kb.iter().rev())
}

/// Sorts the fixed-width records of `input` by a little-endian key.
/// Writes records to a new temp blob.
pub fn write_records<C: RecordCodec>(ws: &Workspace, codec: &C, recs: impl IntoIterator<Item = Result<C::Rec>>) -> Result<Blob> {
    let blob = ws.temp("rec")?;
    let mut w = RecordWriter::new(codec, &blob)?;
    for r in recs {
        w.push(&r?)?;
    }
    w.finish()?;
    Ok(blob)
}

pub fn external_sort(
    ws: &Workspace,
    input: &Blob,
    record_width: usize,
    key_offset: usize,
    key_width: usize,
    memory_budget: usize,
) -> Result<Blob> {
    if record_width == 0 || key_offset + key_width > record_width {
        return Err(Error::Config(format!("key {key_offset}+{key_width} does not fit a {record_width}-byte record")));
    }
    let codec = RawRecords(record_width);
    let reader = RecordReader::new(&codec, input)?;
    sort_records(ws, &codec, reader, memory_budget, |a, b| le_key_cmp(a, b, key_offset, key_width))
}
