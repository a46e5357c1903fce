//! Per-pass merge arithmetic: locating old suffixes among the new block's
//! suffixes with one backward scan, and merging sequences ordered by rank.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::block::BlockSortResult;
use crate::rank::RankIndex;
use crate::Symbol;

/// `counts[j]` old suffixes lie between new suffixes `j - 1` and `j`;
/// `counts[0]` precede the smallest, `counts[m]` follow the largest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapArray {
    counts: Vec<u64>,
}

impl GapArray {
    pub fn zeros(new_suffixes: usize) -> Self {
        GapArray { counts: vec![0; new_suffixes + 1] }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        assert!(!counts.is_empty());
        GapArray { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn new_suffixes(&self) -> usize {
        self.counts.len() - 1
    }
}

/// Number of new suffixes smaller than `c` followed by an old suffix that
/// exceeds exactly `i` new suffixes. `gt_bit` tells whether that old suffix
/// exceeds the suffix right after the block; it only matters when `c` is the
/// block's last character.
#[inline]
pub fn backward_step(i: usize, c: Symbol, idx: &RankIndex, block_last: Symbol, gt_bit: bool) -> usize {
    let j = idx.c(c) + idx.rank(c, i);
    (j + u64::from(c == block_last && gt_bit)) as usize
}

/// Incremental form of the gap/gt scan over the old region, right to left.
#[derive(Debug)]
pub struct GapScanner<'a> {
    result: &'a BlockSortResult,
    gap: GapArray,
    i: usize,
}

impl<'a> GapScanner<'a> {
    /// Starts at the sentinel suffix, which precedes every new suffix. Returns
    /// the scanner and the updated gt bit of the sentinel position (always 0).
    pub fn start(result: &'a BlockSortResult) -> (Self, bool) {
        let mut gap = GapArray::zeros(result.len());
        gap.counts[0] = 1;
        (GapScanner { result, gap, i: 0 }, false)
    }

    /// Moves one position left: `c` is the character there, `gt_bit` the old
    /// gt bit of the position just visited. Returns the new gt bit of the
    /// position moved to.
    #[inline]
    pub fn step(&mut self, c: Symbol, gt_bit: bool) -> bool {
        let j = backward_step(self.i, c, self.result.rank_index(), self.result.block_last(), gt_bit);
        self.gap.counts[j] += 1;
        self.i = j;
        self.result.r1() < j
    }

    /// New suffixes smaller than the current old suffix.
    pub fn position(&self) -> usize {
        self.i
    }

    pub fn finish(self) -> GapArray {
        self.gap
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum ScanError<E> {
    Source(E),
    /// The old text and gt streams disagree in length.
    LengthMismatch,
}

impl<E: fmt::Display> fmt::Display for ScanError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanError::Source(e) => e.fmt(f),
            ScanError::LengthMismatch => f.write_str("old text and gt streams differ in length"),
        }
    }
}

/// Gap array and updated gt bits for one pass.
///
/// `old_text` yields the old region's bytes last-first (the sentinel
/// excluded); `gt_in` yields the old gt bits in the same right-to-left order,
/// starting at the sentinel position and stopping before the region start.
/// `emit` receives updated gt bits right to left, from the sentinel
/// position down to the region start.
pub fn compute_gap_and_gt<E>(
    result: &BlockSortResult,
    old_text: impl IntoIterator<Item = Result<u8, E>>,
    gt_in: impl IntoIterator<Item = Result<bool, E>>,
    mut emit: impl FnMut(bool) -> Result<(), E>,
) -> Result<GapArray, ScanError<E>> {
    let (mut scan, first) = GapScanner::start(result);
    emit(first).map_err(ScanError::Source)?;
    let mut gt_in = gt_in.into_iter();
    for c in old_text {
        let c = c.map_err(ScanError::Source)?;
        let g = gt_in.next().ok_or(ScanError::LengthMismatch)?.map_err(ScanError::Source)?;
        let bit = scan.step(crate::sym(c), g);
        emit(bit).map_err(ScanError::Source)?;
    }
    if gt_in.next().is_some() {
        return Err(ScanError::LengthMismatch);
    }
    Ok(scan.finish())
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for ScanError<E> {}
impl<E: fmt::Debug + fmt::Display> core::error::Error for MergeError<E> {}

/// Rank bookkeeping derived from a gap array.
#[derive(Debug, Clone)]
pub struct RankShift {
    /// `prefix[j]` = old suffixes before new suffix `j`.
    prefix: Vec<u64>,
}

impl RankShift {
    pub fn new(gap: &GapArray) -> Self {
        let mut acc = 0;
        let prefix = gap.counts()[..gap.new_suffixes()]
            .iter()
            .map(|&g| {
                acc += g;
                acc
            })
            .collect();
        RankShift { prefix }
    }

    /// Merged rank of the new suffix with sorted index `j`.
    #[inline]
    pub fn new_rank(&self, j: usize) -> u64 {
        j as u64 + self.prefix[j]
    }

    /// New suffixes smaller than the old suffix of old rank `v`.
    #[inline]
    pub fn smaller_new(&self, v: u64) -> u64 {
        self.prefix.partition_point(|&p| p <= v) as u64
    }

    /// Merged rank of the old suffix of old rank `v`.
    #[inline]
    pub fn old_rank(&self, v: u64) -> u64 {
        v + self.smaller_new(v)
    }
}

/// Interleaving of old and new entries dictated by a gap array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Next old entry in old-rank order.
    Old,
    /// New suffix with this sorted index.
    New(usize),
}

/// Yields `gap[0]` old slots, new 0, `gap[1]` old slots, new 1, and so on.
pub fn merge_schedule(gap: &GapArray) -> impl Iterator<Item = (Slot, u64)> + '_ {
    let m = gap.new_suffixes();
    gap.counts().iter().enumerate().flat_map(move |(j, &g)| {
        let new = (j < m).then_some((Slot::New(j), 1));
        (g > 0).then_some((Slot::Old, g)).into_iter().chain(new)
    })
}

#[derive(Debug, PartialEq, Eq)]
pub enum MergeError<E> {
    Source(E),
    /// The gap array does not account for every old row.
    GapMismatch { rows: u64, gap_total: u64 },
}

impl<E: fmt::Display> fmt::Display for MergeError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MergeError::Source(e) => e.fmt(f),
            MergeError::GapMismatch { rows, gap_total } => {
                write!(f, "gap array covers {gap_total} rows but partial bwt has {rows}")
            }
        }
    }
}

/// Merge the stored old partial BWT with the block's partial BWT.
///
/// The old partial has `old_rows` rows; its hole (if any) is at `old_hole`
/// and is not stored, so `read_old` is called `old_rows - 1` times. The hole
/// is written as `patch`. The new hole is not written; its row is returned.
pub fn merge_partial<E>(
    old_rows: u64,
    old_hole: Option<u64>,
    result: &BlockSortResult,
    gap: &GapArray,
    patch: u8,
    mut read_old: impl FnMut() -> Result<u8, E>,
    mut write: impl FnMut(u8) -> Result<(), E>,
) -> Result<u64, MergeError<E>> {
    if gap.total() != old_rows {
        return Err(MergeError::GapMismatch { rows: old_rows, gap_total: gap.total() });
    }
    let mut old_row = 0u64;
    let mut out_row = 0u64;
    let mut new_hole = 0;
    for (slot, count) in merge_schedule(gap) {
        match slot {
            Slot::Old => {
                for _ in 0..count {
                    let b = if Some(old_row) == old_hole { patch } else { read_old().map_err(MergeError::Source)? };
                    write(b).map_err(MergeError::Source)?;
                    old_row += 1;
                    out_row += 1;
                }
            }
            Slot::New(j) => {
                match result.bwt_int(j) {
                    Some(b) => write(b).map_err(MergeError::Source)?,
                    None => new_hole = out_row,
                }
                out_row += 1;
            }
        }
    }
    Ok(new_hole)
}

/// In-memory partial BWT: stored characters exclude the hole row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialBwt {
    pub chars: Vec<u8>,
    pub hole: Option<u64>,
}

impl PartialBwt {
    pub fn rows(&self) -> u64 {
        self.chars.len() as u64 + u64::from(self.hole.is_some())
    }

    /// Row-by-row view, `None` at the hole.
    pub fn to_rows(&self) -> Vec<Option<u8>> {
        let mut it = self.chars.iter();
        (0..self.rows())
            .map(|r| if Some(r) == self.hole { None } else { it.next().copied() })
            .collect()
    }

    pub fn merge(&self, result: &BlockSortResult, gap: &GapArray) -> Result<PartialBwt, MergeError<core::convert::Infallible>> {
        let patch = (result.block_last().max(1) - 1) as u8;
        let mut src = self.chars.iter();
        let mut chars = Vec::with_capacity(self.chars.len() + result.len());
        let hole = merge_partial(
            self.rows(),
            self.hole,
            result,
            gap,
            patch,
            || Ok(*src.next().expect("stored chars shorter than rows")),
            |b| {
                chars.push(b);
                Ok(())
            },
        )?;
        Ok(PartialBwt { chars, hole: Some(hole) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitArray;
    use crate::block::{BlockContext, SortStrategy};
    use crate::{sym, SENTINEL};
    use core::convert::Infallible;

    fn ctx(text: &[u8], block_len: usize, gt: &[bool]) -> BlockSortResult {
        let t = text.iter().map(|&b| if b == b'$' { SENTINEL } else { sym(b) }).collect();
        BlockContext::new(t, block_len, BitArray::from_bools(gt.iter().copied()))
            .unwrap()
            .sort(SortStrategy::Induced)
    }

    #[test]
    fn backward_step_examples() {
        let r = ctx(b"baa$", 2, &[false]);
        assert_eq!(backward_step(0, sym(b'a'), r.rank_index(), r.block_last(), false), 0);
        let r = ctx(b"abb$", 2, &[false]);
        assert_eq!(r.bwt_int(0), None);
        assert_eq!(backward_step(0, sym(b'b'), r.rank_index(), r.block_last(), false), 1);
        for i in 0..=2 {
            assert_eq!(backward_step(i, SENTINEL, r.rank_index(), r.block_last(), true), 0);
        }
    }

    fn gap_of(text: &[u8], block_len: usize, gt_ctx: &[bool], old: &[u8], gt_in: &[bool]) -> GapArray {
        let r = ctx(text, block_len, gt_ctx);
        compute_gap_and_gt::<Infallible>(
            &r,
            old.iter().rev().map(|&b| Ok(b)),
            gt_in.iter().map(|&b| Ok(b)),
            |_| Ok(()),
        )
        .unwrap()
    }

    #[test]
    fn gap_examples() {
        // "baa$": old region "a$" read backward is just 'a' (sentinel implicit),
        // gt of the sentinel position is 0.
        assert_eq!(gap_of(b"baa$", 2, &[false], b"a", &[false]).counts(), &[2, 0, 0]);
        assert_eq!(gap_of(b"aaa$", 2, &[false], b"a", &[false]).counts(), &[2, 0, 0]);
        assert_eq!(gap_of(b"aba$", 2, &[false], b"a", &[false]).counts(), &[2, 0, 0]);
    }

    #[test]
    fn gap_length_mismatch() {
        let r = ctx(b"baa$", 2, &[false]);
        let err = compute_gap_and_gt::<Infallible>(&r, [Ok(b'a')], [], |_| Ok(())).unwrap_err();
        assert_eq!(err, ScanError::LengthMismatch);
    }

    #[test]
    fn merge_examples() {
        let old = PartialBwt { chars: b"a".to_vec(), hole: Some(1) };
        let r = ctx(b"baa$", 2, &[false]);
        let merged = old.merge(&r, &GapArray::from_counts(vec![2, 0, 0])).unwrap();
        assert_eq!(merged.to_rows(), vec![Some(b'a'), Some(b'a'), Some(b'b'), None]);

        let r = ctx(b"aba$", 2, &[false]);
        let merged = old.merge(&r, &GapArray::from_counts(vec![2, 0, 0])).unwrap();
        assert_eq!(merged.to_rows(), vec![Some(b'a'), Some(b'b'), None, Some(b'a')]);

        let first = BlockContext::first(b"ab").sort(SortStrategy::Induced);
        let merged = PartialBwt::default().merge(&first, &GapArray::zeros(3)).unwrap();
        let direct: Vec<Option<u8>> = (0..3).map(|j| first.bwt_int(j)).collect();
        assert_eq!(merged.to_rows(), direct);
    }

    #[test]
    fn merge_rejects_gap_mismatch() {
        let old = PartialBwt { chars: b"a".to_vec(), hole: Some(1) };
        let r = ctx(b"baa$", 2, &[false]);
        assert!(matches!(
            old.merge(&r, &GapArray::from_counts(vec![1, 0, 0])),
            Err(MergeError::GapMismatch { rows: 2, gap_total: 1 })
        ));
    }

    #[test]
    fn rank_shift() {
        let s = RankShift::new(&GapArray::from_counts(vec![2, 0, 3]));
        assert_eq!((s.new_rank(0), s.new_rank(1)), (2, 3));
        assert_eq!((s.old_rank(0), s.old_rank(1), s.old_rank(2)), (0, 1, 4));
    }
}
