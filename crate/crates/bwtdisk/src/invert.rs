//! Scan-based BWT inversion: a cover of the text by substrings that grow one
//! character to the left per round, merged by list ranking when they meet.

use std::cell::Cell;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bwtdisk_core::codec::CodecId;
use bwtdisk_core::lf::{CountTable, RunningCounts};
use bwtdisk_core::{sym, SENTINEL};
use log::debug;

use crate::build::Mode;
use crate::error::{Error, Result};
use crate::extsort::{sort_records, RecordCodec, RecordReader, RecordWriter, U64s};
use crate::format::{self, BwtData, BwtHeader, StatsReport};
use crate::ledger::{LedgerState, SpaceLedger};
use crate::listrank::{list_rank, NONE};
use crate::store::{Blob, Workspace};
use crate::stream::{BackwardReader, BitReader, BitWriter, ByteReader, ByteWriter};

pub const DEFAULT_SORT_BUDGET: usize = 64 << 20;

/// A fetched character is present.
const FETCHED: u8 = 1;
/// The fetched character is the sentinel.
const SENTINEL_FLAG: u8 = 2;

#[derive(Debug, Clone)]
pub struct InvertConfig {
    pub mode: Mode,
    pub mem_budget: usize,
    pub temp_dir: Option<PathBuf>,
}

impl Default for InvertConfig {
    fn default() -> Self {
        InvertConfig { mode: Mode::External, mem_budget: DEFAULT_SORT_BUDGET, temp_dir: None }
    }
}

#[derive(Debug, Clone)]
pub struct InvertReport {
    pub n: u64,
    /// Target number of live substrings.
    pub k: u64,
    /// Live headers entering list ranking, per round.
    pub live_per_round: Vec<u64>,
    /// Rows still unmarked after each round.
    pub unmarked_per_round: Vec<u64>,
    pub ledger: LedgerState,
    pub wall_ms: u64,
}

impl InvertReport {
    pub fn rounds(&self) -> u64 {
        self.live_per_round.len() as u64
    }

    pub fn stats(&self) -> StatsReport {
        StatsReport::from_ledger(&self.ledger, self.wall_ms)
    }
}

/// `max(1, floor(rows / log2(rows)))`.
pub fn cover_size(rows: u64) -> u64 {
    if rows <= 1 {
        return 1;
    }
    ((rows as f64 / (rows as f64).log2()).floor() as u64).max(1)
}

/// Most rounds a valid input may need: `2 * ceil(log2(n + 1)) + 4`.
pub fn round_bound(n: u64) -> u64 {
    let rows = n + 1;
    let ceil_log = 64 - (rows - 1).leading_zeros() as u64;
    2 * ceil_log + 4
}

/// A substring's header. The substring's bytes sit in the store at
/// `offset..offset + len`, last text character first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    /// Row holding the rightmost character.
    anchor: u64,
    /// Row holding the character to prepend next.
    link: u64,
    offset: u64,
    len: u64,
    fetched: u8,
    flags: u8,
}

struct HeaderCodec;

impl RecordCodec for HeaderCodec {
    type Rec = Header;

    fn width(&self) -> usize {
        34
    }

    fn encode(&self, h: &Header, out: &mut [u8]) {
        out[0..8].copy_from_slice(&h.anchor.to_le_bytes());
        out[8..16].copy_from_slice(&h.link.to_le_bytes());
        out[16..24].copy_from_slice(&h.offset.to_le_bytes());
        out[24..32].copy_from_slice(&h.len.to_le_bytes());
        out[32] = h.fetched;
        out[33] = h.flags;
    }

    fn decode(&self, b: &[u8]) -> Header {
        let u = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        Header { anchor: u(0), link: u(8), offset: u(16), len: u(24), fetched: b[32], flags: b[33] }
    }
}

/// The BWT payload as a row stream.
struct Bwt {
    blob: Blob,
    header: BwtHeader,
    table: CountTable,
}

impl Bwt {
    fn rows(&self) -> u64 {
        self.header.n + 1
    }

    fn payload(&self) -> Result<ByteReader> {
        ByteReader::open(&self.blob, format::BWT_HEADER_LEN, self.header.codec)
    }
}

struct State {
    headers: Blob,
    store: Blob,
    live: u64,
    count: u64,
    /// Some header links to the row holding the first text character and
    /// turns terminal in the next round.
    ending: bool,
}

struct Inverter<'a> {
    ws: &'a Workspace,
    bwt: &'a Bwt,
    marks: Blob,
    k: u64,
    budget: usize,
    /// Row whose LF step is the sentinel row, once a scan has seen it.
    first: Cell<Option<u64>>,
}

impl Inverter<'_> {
    fn primary(&self) -> u64 {
        self.bwt.header.primary_index
    }

    /// One round: fetch a character for every header whose link row is
    /// unmarked, top up to `k` live headers from the first unmarked rows,
    /// then merge chains of adjacent substrings. Returns the new state, the
    /// number of rows marked and the number of live headers after top-up.
    fn round(&self, st: State) -> Result<(State, u64, u64)> {
        let ws = self.ws;
        let p = self.primary();
        let by_link = sort_records(ws, &HeaderCodec, RecordReader::new(&HeaderCodec, &st.headers)?, self.budget, |a, b| a.link.cmp(&b.link))?;
        drop(st.headers);

        let fetched = ws.temp("hdr")?;
        let topped = ws.temp("hdr")?;
        let mut marked_now = 0u64;
        let mut live = 0u64;
        {
            let mut hin = RecordReader::new(&HeaderCodec, &by_link)?;
            let mut next = hin.next_rec()?;
            let mut fw = RecordWriter::new(&HeaderCodec, &fetched)?;
            let mut tw = RecordWriter::new(&HeaderCodec, &topped)?;
            let mut need = self.k.saturating_sub(st.live) + u64::from(st.ending);
            let mut payload = self.bwt.payload()?;
            let mut mr = BitReader::new(&self.marks, 0, self.bwt.rows())?;
            let mut mw = BitWriter::new(&self.marks, 0)?;
            let mut counts = RunningCounts::default();
            for row in 0..self.bwt.rows() {
                let (c, byte) = if row == p {
                    (SENTINEL, 0)
                } else {
                    let b = payload.byte()?;
                    (sym(b), b)
                };
                let lf = counts.advance(c, &self.bwt.table);
                if lf == p && row != p {
                    self.first.set(Some(row));
                }
                let mut mark = mr.next()?.expect("mark bits cover every row");
                if let Some(mut h) = next.filter(|h| h.link == row) {
                    h.flags = 0;
                    if row != p && !mark {
                        h.fetched = byte;
                        h.flags = FETCHED;
                        h.link = lf;
                        mark = true;
                        marked_now += 1;
                    }
                    live += (h.link != p) as u64;
                    fw.push(&h)?;
                    next = hin.next_rec()?;
                    if next.is_some_and(|n| n.link <= row) {
                        return Err(Error::corrupt("two substrings share a link row"));
                    }
                }
                if !mark && need > 0 {
                    let flags = FETCHED | if c == SENTINEL { SENTINEL_FLAG } else { 0 };
                    tw.push(&Header { anchor: row, link: lf, offset: 0, len: 0, fetched: byte, flags })?;
                    live += (lf != p) as u64;
                    mark = true;
                    marked_now += 1;
                    if lf != p {
                        need -= 1;
                    }
                }
                mw.push(mark)?;
            }
            if let Some(h) = next {
                return Err(Error::corrupt(format!("link {} outside the bwt", h.link)));
            }
            fw.finish()?;
            tw.finish()?;
            mw.finish()?;
        }
        drop(by_link);

        // All headers by anchor: the fetched ones re-sorted, merged with the
        // new ones, which the scan produced in row order.
        let fetched = sort_records(ws, &HeaderCodec, RecordReader::new(&HeaderCodec, &fetched)?, self.budget, |a, b| a.anchor.cmp(&b.anchor))?;
        let all = ws.temp("hdr")?;
        {
            let mut w = RecordWriter::new(&HeaderCodec, &all)?;
            let mut a = RecordReader::new(&HeaderCodec, &fetched)?;
            let mut b = RecordReader::new(&HeaderCodec, &topped)?;
            let (mut x, mut y) = (a.next_rec()?, b.next_rec()?);
            loop {
                let take_a = match (x, y) {
                    (Some(x), Some(y)) => x.anchor < y.anchor,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => break,
                };
                if take_a {
                    w.push(&x.unwrap())?;
                    x = a.next_rec()?;
                } else {
                    w.push(&y.unwrap())?;
                    y = b.next_rec()?;
                }
            }
            w.finish()?;
        }
        drop((fetched, topped));

        let ranks = self.rank_chains(&all)?;
        let state = self.rebuild(&all, &ranks, &st.store)?;
        Ok((state, marked_now, live))
    }

    /// `[anchor, next]` for list ranking: a substring points to the one on
    /// its left when its link is that substring's anchor. A link to the
    /// sentinel row means the substring starts the text.
    fn rank_chains(&self, all: &Blob) -> Result<Blob> {
        let ws = self.ws;
        let p = self.primary();
        let by_link = sort_records(ws, &HeaderCodec, RecordReader::new(&HeaderCodec, all)?, self.budget, |a, b| a.link.cmp(&b.link))?;
        let nodes = ws.temp("nodes")?;
        {
            let mut w = RecordWriter::new(&U64s::<2>, &nodes)?;
            let mut anchors = RecordReader::new(&HeaderCodec, all)?;
            let mut cur = anchors.next_rec()?;
            for h in RecordReader::new(&HeaderCodec, &by_link)? {
                let h = h?;
                while cur.is_some_and(|a| a.anchor < h.link) {
                    cur = anchors.next_rec()?;
                }
                let adjacent = h.link != p && cur.is_some_and(|a| a.anchor == h.link);
                if !adjacent && h.link != p && h.flags & FETCHED == 0 {
                    return Err(Error::corrupt(format!("row {} is marked but starts no substring", h.link)));
                }
                w.push(&[h.anchor, if adjacent { h.link } else { NONE }])?;
            }
            w.finish()?;
        }
        drop(by_link);
        list_rank(ws, &nodes, None, self.budget)
    }

    /// Writes the merged substrings: each chain head's bytes, then those of
    /// the rest of its chain in order, each followed by its fetched byte.
    fn rebuild(&self, all: &Blob, ranks: &Blob, old_store: &Blob) -> Result<State> {
        let ws = self.ws;
        let p = self.primary();
        // Non-head members as [head, rank, offset, len, link, fetched | flags << 8].
        let members = RecordReader::new(&HeaderCodec, all)?.zip(RecordReader::new(&U64s::<4>, ranks)?).filter_map(|(h, r)| match (h, r) {
            (Ok(_), Ok([_, _, 0, _])) => None,
            (Ok(h), Ok([id, _, rank, head])) => {
                debug_assert_eq!(id, h.anchor);
                Some(Ok([head, rank, h.offset, h.len, h.link, h.fetched as u64 | (h.flags as u64) << 8]))
            }
            (Err(e), _) | (_, Err(e)) => Some(Err(e)),
        });
        let members = sort_records(ws, &U64s::<6>, members, self.budget, |a, b| (a[0], a[1]).cmp(&(b[0], b[1])))?;

        let headers = ws.temp("hdr")?;
        let store = ws.temp("store")?;
        let (mut live, mut count, mut ending) = (0, 0, false);
        {
            let mut hw = RecordWriter::new(&HeaderCodec, &headers)?;
            let mut sw = ByteWriter::open(&store, 0, CodecId::Identity)?;
            let mut seq = ByteReader::open(old_store, 0, CodecId::Identity)?;
            let mut rnd = old_store.reader_at(0)?;
            let mut chunk = vec![0u8; 1 << 16];
            let mut mem = RecordReader::new(&U64s::<6>, &members)?;
            let mut m = mem.next_rec()?;
            let mut offset = 0u64;
            for (h, r) in RecordReader::new(&HeaderCodec, all)?.zip(RecordReader::new(&U64s::<4>, ranks)?) {
                let (h, [_, _, rank, _]) = (h?, r?);
                if rank != 0 {
                    continue;
                }
                seq.seek_to(h.offset)?;
                seq.copy_to(&mut sw, h.len)?;
                let mut len = h.len;
                if h.flags & FETCHED != 0 {
                    sw.put(h.fetched)?;
                    len += 1;
                }
                let mut link = h.link;
                while let Some([head, _, off, mlen, mlink, f]) = m {
                    if head < h.anchor {
                        return Err(Error::ListRank(format!("chain head {head} is not a substring")));
                    }
                    if head > h.anchor {
                        break;
                    }
                    rnd.seek_to(off)?;
                    let mut left = mlen;
                    while left > 0 {
                        let k = left.min(chunk.len() as u64) as usize;
                        rnd.read_exact(&mut chunk[..k])?;
                        sw.put_slice(&chunk[..k])?;
                        left -= k as u64;
                    }
                    len += mlen;
                    if (f >> 8) as u8 & FETCHED != 0 {
                        sw.put(f as u8)?;
                        len += 1;
                    }
                    link = mlink;
                    m = mem.next_rec()?;
                }
                hw.push(&Header { anchor: h.anchor, link, offset, len, fetched: 0, flags: 0 })?;
                offset += len;
                count += 1;
                live += u64::from(link != p);
                ending |= self.first.get() == Some(link);
            }
            if m.is_some() {
                return Err(Error::ListRank("chain member after the last head".into()));
            }
            hw.finish()?;
            sw.finish()?;
        }
        Ok(State { headers, store, live, count, ending })
    }
}

fn open_bwt(input: &Path, ws: &Workspace, mode: Mode) -> Result<Bwt> {
    let blob = match mode {
        Mode::External => Blob::open(input, ws.ledger())?,
        Mode::Internal => {
            let data = std::fs::read(input)?;
            ws.ledger().add_read(data.len() as u64);
            Blob::from_vec(data, ws.ledger())
        }
    };
    let mut head = [0u8; format::BWT_HEADER_LEN as usize];
    ByteReader::open(&blob, 0, CodecId::Identity)?.fill(&mut head).map_err(|_| Error::corrupt("bwt file shorter than its header"))?;
    let header = BwtHeader::parse(&head)?;
    let mut counts = [0u64; 256];
    let mut r = ByteReader::open(&blob, format::BWT_HEADER_LEN, header.codec)?;
    let mut seen = 0u64;
    while let Some((b, k)) = r.next_run(u64::MAX)? {
        counts[b as usize] += k;
        seen += k;
    }
    if seen != header.n {
        return Err(Error::corrupt(format!("payload decodes to {seen} bytes, header says {}", header.n)));
    }
    Ok(Bwt { blob, header, table: CountTable::from_byte_counts(&counts) })
}

fn workspace(mode: Mode, temp_dir: Option<&Path>, output: &Path) -> Workspace {
    let ledger = SpaceLedger::new();
    match mode {
        Mode::Internal => Workspace::memory(ledger),
        Mode::External => {
            let dir = temp_dir.map(Path::to_path_buf).unwrap_or_else(|| match output.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            });
            Workspace::disk(dir, ledger)
        }
    }
}

/// Inverts the BWT file at `input`, writing the original text to `output`.
pub fn unbwt(input: &Path, output: &Path, cfg: &InvertConfig) -> Result<InvertReport> {
    let started = Instant::now();
    let ws = workspace(cfg.mode, cfg.temp_dir.as_deref(), output);
    let bwt = open_bwt(input, &ws, cfg.mode)?;
    let rows = bwt.rows();
    let k = cover_size(rows);
    let marks = ws.temp("marks")?;
    {
        let mut w = ByteWriter::open(&marks, 0, CodecId::Identity)?;
        w.put_run(0, rows.div_ceil(8))?;
        w.finish()?;
    }
    let inv = Inverter { ws: &ws, bwt: &bwt, marks, k, budget: cfg.mem_budget, first: Cell::new(None) };
    let mut st = State { headers: ws.temp("hdr")?, store: ws.temp("store")?, live: 0, count: 0, ending: false };
    let mut unmarked = rows;
    let mut live_per_round = Vec::new();
    let mut unmarked_per_round = Vec::new();
    let bound = round_bound(bwt.header.n);
    while unmarked > 0 || st.count > 1 {
        if live_per_round.len() as u64 == bound {
            return Err(Error::corrupt(format!("inversion did not finish within {bound} rounds")));
        }
        let before = (st.count, unmarked);
        let (next, marked, live) = inv.round(st)?;
        live_per_round.push(live);
        st = next;
        unmarked -= marked;
        unmarked_per_round.push(unmarked);
        ws.ledger().add_round();
        debug!("round {}: {} substrings, {} live, {unmarked} rows unmarked", live_per_round.len(), st.count, st.live);
        if marked == 0 && st.count == before.0 && unmarked == before.1 {
            return Err(Error::corrupt("inversion stalled; the input is not a valid bwt"));
        }
    }
    drop(inv);

    // One substring, the whole text plus sentinel, last character first.
    let mut hr = RecordReader::new(&HeaderCodec, &st.headers)?;
    let h = hr.next_rec()?.ok_or_else(|| Error::corrupt("no substring left"))?;
    if h.anchor != bwt.header.primary_index || h.len != rows {
        return Err(Error::corrupt("the final substring does not end at the sentinel"));
    }
    let out = match cfg.mode {
        Mode::External => Blob::create(output, ws.ledger())?,
        Mode::Internal => Blob::from_vec(Vec::new(), ws.ledger()),
    };
    {
        let mut w = ByteWriter::open(&out, 0, CodecId::Identity)?;
        let mut r = BackwardReader::new(&st.store, h.offset + 1, h.offset + h.len)?;
        while let Some(b) = r.next()? {
            w.put(b)?;
        }
        w.finish()?;
    }
    if cfg.mode == Mode::Internal {
        out.persist(output)?;
    }
    drop((hr, st));
    let ledger = ws.ledger().snapshot();
    debug_assert_eq!(ledger.live_temp_bytes, 0);
    Ok(InvertReport { n: bwt.header.n, k, live_per_round, unmarked_per_round, ledger, wall_ms: started.elapsed().as_millis() as u64 })
}

/// In-memory LF decoding; the reference for [`unbwt`].
pub fn naive_unbwt_file(input: &Path, output: &Path) -> Result<()> {
    let data = BwtData::read(input)?;
    let text = bwtdisk_core::oracle::naive_unbwt(&data.payload, data.header.primary_index)?;
    std::fs::write(output, text)?;
    Ok(())
}
