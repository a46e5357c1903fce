//! Block-wise construction driver and the four products it can maintain:
//! the BWT (two-file or in-place), the suffix array, Psi and pos_d.

use std::path::{Path, PathBuf};
use std::time::Instant;

use bwtdisk_core::bits::BitArray;
use bwtdisk_core::block::{BlockContext, BlockSortResult, SortStrategy};
use bwtdisk_core::codec::{self, CodecId};
use bwtdisk_core::merge::{compute_gap_and_gt, merge_partial, merge_schedule, GapArray, MergeError, RankShift, ScanError, Slot};
use bwtdisk_core::{sym, Symbol};
use log::debug;

use crate::error::{Error, Result};
use crate::format::{self, BwtHeader, StatsReport};
use crate::ledger::{LedgerState, SpaceLedger};
use crate::store::{Blob, Workspace};
use crate::stream::{BackwardReader, BitReader, BitWriter, ByteReader, ByteWriter};

pub const DEFAULT_BLOCK_SIZE: usize = 64 << 20;
pub const DEFAULT_PAGE_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    External,
    /// All streams live in memory buffers.
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    #[default]
    TwoFile,
    /// The partial BWT grows right to left inside the reserved output file.
    InPlace,
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub block_size: usize,
    pub codec: CodecId,
    pub mode: Mode,
    pub layout: Layout,
    /// Internal mode only: derive the block size from this many bytes.
    pub mem_budget: Option<u64>,
    pub page_size: u64,
    /// Where external-mode temp files go; defaults to the output's directory.
    pub temp_dir: Option<PathBuf>,
    pub strategy: SortStrategy,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            block_size: DEFAULT_BLOCK_SIZE,
            codec: CodecId::Rle,
            mode: Mode::External,
            layout: Layout::TwoFile,
            mem_budget: None,
            page_size: DEFAULT_PAGE_SIZE,
            temp_dir: None,
            strategy: SortStrategy::default(),
        }
    }
}

impl BuildConfig {
    pub fn with_block_size(block_size: usize) -> Self {
        BuildConfig { block_size, ..Self::default() }
    }

    /// Block size used for a text of `rows` suffixes (sentinel included).
    pub fn effective_block_size(&self, rows: u64) -> usize {
        match (self.mode, self.mem_budget) {
            (Mode::Internal, Some(m)) => {
                let log = (64 - rows.leading_zeros()).max(1) as u64;
                (m / log).max(1) as usize
            }
            _ => self.block_size.max(1),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::Config("block size must be positive".into()));
        }
        if self.layout == Layout::InPlace && self.codec != CodecId::Identity {
            return Err(Error::Config("the in-place layout needs the identity codec".into()));
        }
        Ok(())
    }

    fn workspace(&self, output: &Path, ledger: SpaceLedger) -> Workspace {
        match self.mode {
            Mode::Internal => Workspace::memory(ledger),
            Mode::External => {
                let dir = self.temp_dir.clone().unwrap_or_else(|| match output.parent() {
                    Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                    _ => PathBuf::from("."),
                });
                Workspace::disk(dir, ledger)
            }
        }
    }
}

/// Outcome of one build.
#[derive(Debug, Clone, Copy)]
pub struct BuildReport {
    pub n: u64,
    pub block_size: usize,
    pub ledger: LedgerState,
    pub wall_ms: u64,
}

impl BuildReport {
    pub fn stats(&self) -> StatsReport {
        StatsReport::from_ledger(&self.ledger, self.wall_ms)
    }
}

/// What one pass hands to a product.
struct Pass<'a> {
    /// Start of the block in the text.
    s: u64,
    result: &'a BlockSortResult,
    gap: &'a GapArray,
    shift: &'a RankShift,
    /// Suffixes already processed before this pass.
    old_rows: u64,
    /// Rank of the old region's first suffix among the old suffixes.
    old_start: u64,
    /// Character just left of the old region (the block's last byte).
    patch: u8,
    last: bool,
}

trait Product {
    fn pass(&mut self, ws: &Workspace, p: &Pass<'_>) -> Result<()>;
}

fn scan_err(e: ScanError<Error>) -> Error {
    match e {
        ScanError::Source(e) => e,
        ScanError::LengthMismatch => Error::corrupt("text and gt streams disagree"),
    }
}

fn merge_err(e: MergeError<Error>) -> Error {
    match e {
        MergeError::Source(e) => e,
        e @ MergeError::GapMismatch { .. } => Error::corrupt(e.to_string()),
    }
}

fn read_range(text: &Blob, lo: u64, hi: u64) -> Result<Vec<u8>> {
    let mut buf = vec![0; (hi - lo) as usize];
    let mut r = ByteReader::with_limit(text.reader_at(lo)?, CodecId::Identity, hi - lo);
    r.fill(&mut buf)?;
    Ok(buf)
}

/// Runs all passes over `text` (n bytes), feeding each to `product`.
fn drive(text: &Blob, m: usize, strategy: SortStrategy, ws: &Workspace, product: &mut dyn Product) -> Result<()> {
    let n = text.len();
    let rows = n + 1;
    let m = m as u64;
    let gt = ws.temp("gt")?;
    let mut gt_bits = 0u64;

    let first_len = m.min(rows);
    let mut s = rows - first_len;
    let ctx = BlockContext::first(&read_range(text, s, n)?);
    let result = ctx.sort(strategy);
    let gap = GapArray::zeros(result.len());
    let shift = RankShift::new(&gap);
    ws.ledger().add_pass();
    debug!("pass 1: block [{s}, {rows})");
    product.pass(ws, &Pass { s, result: &result, gap: &gap, shift: &shift, old_rows: 0, old_start: 0, patch: 0, last: s == 0 })?;
    let mut old_start = shift.new_rank(result.r1());
    let mut gt_h = result.new_block_gt();
    if s > 0 {
        let mut w = BitWriter::new(&gt, 0)?;
        append_block_gt(&mut w, &gt_h)?;
        gt_bits = w.finish()?;
    }
    let mut prev: Vec<Symbol> = ctx.into_block();
    drop(result);

    let mut pass_no = 1;
    while s > 0 {
        pass_no += 1;
        let bl = m.min(s);
        s -= bl;
        let last = s == 0;
        debug!("pass {pass_no}: block [{s}, {})", s + bl);
        let mut t: Vec<Symbol> = read_range(text, s, s + bl)?.into_iter().map(sym).collect();
        t.extend_from_slice(&prev);
        drop(prev);
        let ctx = BlockContext::new(t, bl as usize, std::mem::take(&mut gt_h))?;
        let result = ctx.sort(strategy);
        let patch = (ctx.block_last() - 1) as u8;

        let old_rows = rows - (s + bl);
        let mut back = BackwardReader::new(text, s + bl, n)?;
        let old_text = std::iter::from_fn(|| back.next().transpose());
        let gt_in = BitReader::new(&gt, 0, gt_bits)?;
        let gap = if last {
            compute_gap_and_gt(&result, old_text, gt_in, |_| Ok(())).map_err(scan_err)?
        } else {
            let mut w = BitWriter::new(&gt, 0)?;
            let gap = compute_gap_and_gt(&result, old_text, gt_in, |b| w.push(b)).map_err(scan_err)?;
            gt_h = result.new_block_gt();
            append_block_gt(&mut w, &gt_h)?;
            gt_bits = w.finish()?;
            gap
        };
        let shift = RankShift::new(&gap);
        ws.ledger().add_pass();
        product.pass(ws, &Pass { s, result: &result, gap: &gap, shift: &shift, old_rows, old_start, patch, last })?;
        old_start = shift.new_rank(result.r1());
        prev = ctx.into_block();
    }
    Ok(())
}

/// gt bits for block offsets `len-1` down to 1.
fn append_block_gt(w: &mut BitWriter, gt: &BitArray) -> Result<()> {
    (0..gt.len()).rev().try_for_each(|i| w.push(gt.get(i)))
}

/// Output target: written directly unless the run is in memory.
struct Output {
    blob: Blob,
    path: PathBuf,
    memory: bool,
}

impl Output {
    fn new(path: &Path, ws: &Workspace) -> Result<Self> {
        let blob = if ws.is_memory() { Blob::from_vec(Vec::new(), ws.ledger()) } else { Blob::create(path, ws.ledger())? };
        Ok(Output { blob, path: path.to_path_buf(), memory: ws.is_memory() })
    }

    fn finish(self) -> Result<()> {
        if self.memory {
            self.blob.persist(&self.path)?;
        }
        Ok(())
    }
}

struct BwtTwoFile<'o> {
    codec: CodecId,
    out: &'o Blob,
    partial: Option<Blob>,
    hole: Option<u64>,
    primary: u64,
}

impl Product for BwtTwoFile<'_> {
    fn pass(&mut self, ws: &Workspace, p: &Pass<'_>) -> Result<()> {
        let next = if p.last { None } else { Some(ws.temp("bwt")?) };
        let start = if p.last { format::BWT_HEADER_LEN } else { 0 };
        let mut w = ByteWriter::open(next.as_ref().unwrap_or(self.out), start, self.codec)?;
        let mut r = match &self.partial {
            Some(b) => Some(ByteReader::open(b, 0, self.codec)?),
            None => None,
        };
        let hole = merge_partial(
            p.old_rows,
            self.hole,
            p.result,
            p.gap,
            p.patch,
            || r.as_mut().expect("old rows imply an old partial").byte(),
            |b| w.put(b),
        )
        .map_err(merge_err)?;
        w.finish()?;
        drop(r);
        self.partial = next;
        self.hole = Some(hole);
        self.primary = hole;
        Ok(())
    }
}

struct BwtInPlace<'o> {
    out: &'o Blob,
    /// One past the last payload byte.
    end: u64,
    hole: Option<u64>,
    primary: u64,
}

impl Product for BwtInPlace<'_> {
    fn pass(&mut self, _ws: &Workspace, p: &Pass<'_>) -> Result<()> {
        let stored = p.old_rows.saturating_sub(1);
        let new_stored = p.old_rows + p.result.len() as u64 - 1;
        let mut r = ByteReader::with_limit(self.out.reader_at(self.end - stored)?, CodecId::Identity, stored);
        let mut w = ByteWriter::open(&self.out, self.end - new_stored, CodecId::Identity)?;
        let hole = merge_partial(p.old_rows, self.hole, p.result, p.gap, p.patch, || r.byte(), |b| w.put(b)).map_err(merge_err)?;
        w.finish()?;
        self.hole = Some(hole);
        self.primary = hole;
        Ok(())
    }
}

/// A product whose old entries live in one temp file, rewritten each pass;
/// the final pass writes `magic` and `prefix` then the entries to the output.
struct Rewriter<'o> {
    out: &'o Blob,
    magic: &'static [u8; 4],
    prefix: Vec<u8>,
    old: Option<Blob>,
}

impl Rewriter<'_> {
    fn begin(&mut self, ws: &Workspace, last: bool) -> Result<(Option<ByteReader>, ByteWriter, Option<Blob>)> {
        let r = match &self.old {
            Some(b) => Some(ByteReader::open(b, 0, CodecId::Identity)?),
            None => None,
        };
        if last {
            let mut w = ByteWriter::open(self.out, 0, CodecId::Identity)?;
            w.put_slice(self.magic)?;
            w.put_slice(&self.prefix)?;
            Ok((r, w, None))
        } else {
            let t = ws.temp("idx")?;
            Ok((r, ByteWriter::open(&t, 0, CodecId::Identity)?, Some(t)))
        }
    }
}

struct SaProduct<'o>(Rewriter<'o>);

impl Product for SaProduct<'_> {
    fn pass(&mut self, ws: &Workspace, p: &Pass<'_>) -> Result<()> {
        let (mut r, mut w, next) = self.0.begin(ws, p.last)?;
        let sa = p.result.sa_int();
        for (slot, count) in merge_schedule(p.gap) {
            match slot {
                Slot::Old => {
                    let r = r.as_mut().expect("old entries");
                    let mut buf = [0u8; 8];
                    for _ in 0..count {
                        r.fill(&mut buf)?;
                        w.put_slice(&buf)?;
                    }
                }
                Slot::New(j) => w.put_u64_le(p.s + sa[j] as u64)?,
            }
        }
        w.finish()?;
        drop(r);
        self.0.old = next;
        Ok(())
    }
}

/// First value as u64 then zigzag-varint deltas.
struct DeltaWriter {
    w: ByteWriter,
    prev: Option<u64>,
    scratch: Vec<u8>,
}

impl DeltaWriter {
    fn push(&mut self, v: u64) -> Result<()> {
        match self.prev {
            None => self.w.put_u64_le(v)?,
            Some(prev) => {
                self.scratch.clear();
                format::push_delta(&mut self.scratch, prev, v);
                self.w.put_slice(&self.scratch)?;
            }
        }
        self.prev = Some(v);
        Ok(())
    }
}

struct DeltaReader {
    r: ByteReader,
    prev: Option<u64>,
}

impl DeltaReader {
    fn next(&mut self) -> Result<u64> {
        let v = match self.prev {
            None => self.r.u64_le()?,
            Some(prev) => {
                let mut dec = codec::VarintDecoder::default();
                let z = loop {
                    if let Some(z) = dec.push(self.r.byte()?)? {
                        break z;
                    }
                };
                prev.wrapping_add(codec::zigzag_decode(z) as u64)
            }
        };
        self.prev = Some(v);
        Ok(v)
    }
}

struct PsiProduct<'o>(Rewriter<'o>);

impl Product for PsiProduct<'_> {
    fn pass(&mut self, ws: &Workspace, p: &Pass<'_>) -> Result<()> {
        let (r, w, next) = self.0.begin(ws, p.last)?;
        let mut r = r.map(|r| DeltaReader { r, prev: None });
        let mut w = DeltaWriter { w, prev: None, scratch: Vec::new() };
        let (sh, res) = (p.shift, p.result);
        let start = sh.new_rank(res.r1());
        // Successor of the block's last suffix: the old region's start, or
        // on the first pass (where that suffix is the sentinel) the block's.
        let last_new = if p.old_rows == 0 { start } else { sh.old_rank(p.old_start) };
        let mut old_row = 0u64;
        for (slot, count) in merge_schedule(p.gap) {
            match slot {
                Slot::Old => {
                    let r = r.as_mut().expect("old entries");
                    for _ in 0..count {
                        let v = r.next()?;
                        // Row 0 is the sentinel suffix, whose successor is now
                        // the new region's start.
                        w.push(if old_row == 0 { start } else { sh.old_rank(v) })?;
                        old_row += 1;
                    }
                }
                Slot::New(j) => {
                    let q = res.sa_int()[j] as usize + 1;
                    w.push(if q < res.len() { sh.new_rank(res.rank_of(q)) } else { last_new })?;
                }
            }
        }
        w.w.finish()?;
        drop(r);
        self.0.old = next;
        Ok(())
    }
}

struct PosdProduct<'o> {
    rw: Rewriter<'o>,
    d: u64,
}

impl Product for PosdProduct<'_> {
    fn pass(&mut self, ws: &Workspace, p: &Pass<'_>) -> Result<()> {
        let (mut r, mut w, next) = self.rw.begin(ws, p.last)?;
        let mut old_left = r.as_ref().map_or(0, |_| self.rw.old.as_ref().unwrap().len() / 16);
        let mut read_old = |r: &mut Option<ByteReader>| -> Result<Option<(u64, u64)>> {
            if old_left == 0 {
                return Ok(None);
            }
            old_left -= 1;
            let r = r.as_mut().unwrap();
            Ok(Some((p.shift.old_rank(r.u64_le()?), r.u64_le()?)))
        };
        let sa = p.result.sa_int();
        let mut fresh = (0..sa.len()).filter_map(|j| {
            let pos = p.s + sa[j] as u64;
            ((pos + 1) % self.d == 0).then(|| (p.shift.new_rank(j), pos))
        });
        let mut a = read_old(&mut r)?;
        let mut b = fresh.next();
        loop {
            let take_old = match (a, b) {
                (Some(x), Some(y)) => x.0 < y.0,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            let (rank, pos) = if take_old { a.unwrap() } else { b.unwrap() };
            w.put_u64_le(rank)?;
            w.put_u64_le(pos)?;
            if take_old {
                a = read_old(&mut r)?;
            } else {
                b = fresh.next();
            }
        }
        w.finish()?;
        drop(r);
        self.rw.old = next;
        Ok(())
    }
}

struct Run {
    ws: Workspace,
    text: Blob,
    m: usize,
    started: Instant,
}

impl Run {
    fn start(input: &Path, output: &Path, cfg: &BuildConfig) -> Result<Self> {
        cfg.validate()?;
        let started = Instant::now();
        let ws = cfg.workspace(output, SpaceLedger::new());
        let text = match cfg.mode {
            Mode::External => Blob::open(input, ws.ledger())?,
            Mode::Internal => {
                let data = std::fs::read(input)?;
                ws.ledger().add_read(data.len() as u64);
                Blob::from_vec(data, ws.ledger())
            }
        };
        let m = cfg.effective_block_size(text.len() + 1);
        Ok(Run { ws, text, m, started })
    }

    fn report(self) -> BuildReport {
        let ledger = self.ws.ledger().snapshot();
        debug_assert_eq!(ledger.live_temp_bytes, 0, "temp files outlived the build");
        BuildReport { n: self.text.len(), block_size: self.m, ledger, wall_ms: self.started.elapsed().as_millis() as u64 }
    }
}

/// Builds the BWT file of `input` followed by the sentinel.
pub fn build_bwt(input: &Path, output: &Path, cfg: &BuildConfig) -> Result<BuildReport> {
    let run = Run::start(input, output, cfg)?;
    let out = Output::new(output, &run.ws)?;
    let n = run.text.len();
    let primary = match cfg.layout {
        Layout::TwoFile => {
            let mut prod = BwtTwoFile { codec: cfg.codec, out: &out.blob, partial: None, hole: None, primary: 0 };
            drive(&run.text, run.m, cfg.strategy, &run.ws, &mut prod)?;
            prod.primary
        }
        Layout::InPlace => {
            out.blob.reserve(format::BWT_HEADER_LEN + n)?;
            let mut prod = BwtInPlace { out: &out.blob, end: format::BWT_HEADER_LEN + n, hole: None, primary: 0 };
            drive(&run.text, run.m, cfg.strategy, &run.ws, &mut prod)?;
            prod.primary
        }
    };
    let header = BwtHeader { codec: cfg.codec, n, primary_index: primary };
    let mut w = ByteWriter::open(&out.blob, 0, CodecId::Identity)?;
    w.put_slice(&header.to_bytes())?;
    w.finish()?;
    out.finish()?;
    Ok(run.report())
}

fn build_index(input: &Path, output: &Path, cfg: &BuildConfig, magic: &'static [u8; 4], prefix: Vec<u8>, kind: IndexKind) -> Result<BuildReport> {
    let run = Run::start(input, output, cfg)?;
    let out = Output::new(output, &run.ws)?;
    let rw = Rewriter { out: &out.blob, magic, prefix, old: None };
    match kind {
        IndexKind::Sa => drive(&run.text, run.m, cfg.strategy, &run.ws, &mut SaProduct(rw))?,
        IndexKind::Psi => drive(&run.text, run.m, cfg.strategy, &run.ws, &mut PsiProduct(rw))?,
        IndexKind::Posd(d) => drive(&run.text, run.m, cfg.strategy, &run.ws, &mut PosdProduct { rw, d })?,
    }
    out.finish()?;
    Ok(run.report())
}

enum IndexKind {
    Sa,
    Psi,
    Posd(u64),
}

/// Suffix array of `input` plus sentinel: `SA_1` then n+1 u64 positions.
pub fn build_sa(input: &Path, output: &Path, cfg: &BuildConfig) -> Result<BuildReport> {
    build_index(input, output, cfg, format::SA_MAGIC, Vec::new(), IndexKind::Sa)
}

/// Psi array (0-based ranks): `PSI1`, the first entry as u64, then
/// zigzag-varint deltas.
pub fn build_psi(input: &Path, output: &Path, cfg: &BuildConfig) -> Result<BuildReport> {
    build_index(input, output, cfg, format::PSI_MAGIC, Vec::new(), IndexKind::Psi)
}

/// Ranks of the suffixes at 0-based positions `p` with `(p + 1) % d == 0`,
/// as `(rank, p)` pairs sorted by rank after `POSD` and `d`.
pub fn build_posd(input: &Path, output: &Path, cfg: &BuildConfig, d: u64) -> Result<BuildReport> {
    if d == 0 {
        return Err(Error::Config("sampling step d must be at least 1".into()));
    }
    build_index(input, output, cfg, format::POSD_MAGIC, d.to_le_bytes().to_vec(), IndexKind::Posd(d))
}
