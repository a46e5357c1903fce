//! Sorting the suffixes that start in one text block.
//!
//! A block is sorted with only the block itself, the block to its right and
//! the gt bits of that right block in memory. Suffixes are identified by
//! their offset inside the block.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::bits::BitArray;
use crate::rank::RankIndex;
use crate::sais;
use crate::{Symbol, ALPHABET, SENTINEL};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockError {
    EmptyBlock,
    /// The right-hand context is shorter than the block.
    ShortContext { block: usize, next: usize },
    /// gt bits do not cover offsets `1..next`.
    GtLength { expected: usize, found: usize },
    /// A first (rightmost) block must end with the only sentinel.
    MissingSentinel,
}

impl fmt::Display for BlockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockError::EmptyBlock => f.write_str("empty block"),
            BlockError::ShortContext { block, next } => {
                write!(f, "context block of {next} symbols cannot cover a block of {block}")
            }
            BlockError::GtLength { expected, found } => {
                write!(f, "expected {expected} gt bits, found {found}")
            }
            BlockError::MissingSentinel => f.write_str("rightmost block must end with the sentinel"),
        }
    }
}

/// Blocks up to this length are comparison sorted under either strategy.
const SMALL_BLOCK: usize = 16;

/// Which in-memory suffix sorter `sort_block` uses. Both produce identical
/// results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortStrategy {
    /// Induced sorting over a re-encoded block string, O(m).
    #[default]
    Induced,
    /// Comparison sort with [`BlockContext::compare`]; worst case O(m² log m).
    Comparator,
}

/// A block plus the right-hand context needed to order its suffixes.
#[derive(Debug, Clone)]
pub struct BlockContext {
    t: Vec<Symbol>,
    block_len: usize,
    gt: BitArray,
}

impl BlockContext {
    /// The rightmost block: `bytes` followed by the sentinel.
    pub fn first(bytes: &[u8]) -> Self {
        let mut t: Vec<Symbol> = bytes.iter().map(|&b| crate::sym(b)).collect();
        t.push(SENTINEL);
        let block_len = t.len();
        BlockContext { t, block_len, gt: BitArray::new() }
    }

    /// `t` is the block followed by the previously processed block; `gt` bit
    /// `o - 1` tells whether the suffix at offset `o` of that block is
    /// greater than the suffix at its offset 0.
    pub fn new(t: Vec<Symbol>, block_len: usize, gt: BitArray) -> Result<Self, BlockError> {
        if block_len == 0 {
            return Err(BlockError::EmptyBlock);
        }
        let next = t.len().checked_sub(block_len).ok_or(BlockError::EmptyBlock)?;
        if next == 0 {
            if t[block_len - 1] != SENTINEL || t[..block_len - 1].contains(&SENTINEL) {
                return Err(BlockError::MissingSentinel);
            }
            if !gt.is_empty() {
                return Err(BlockError::GtLength { expected: 0, found: gt.len() });
            }
        } else {
            if next < block_len {
                return Err(BlockError::ShortContext { block: block_len, next });
            }
            if gt.len() != next - 1 {
                return Err(BlockError::GtLength { expected: next - 1, found: gt.len() });
            }
        }
        Ok(BlockContext { t, block_len, gt })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn is_first(&self) -> bool {
        self.t.len() == self.block_len
    }

    pub fn block(&self) -> &[Symbol] {
        &self.t[..self.block_len]
    }

    pub fn block_last(&self) -> Symbol {
        self.t[self.block_len - 1]
    }

    /// Consume the context, keeping only the block (the next pass's right
    /// context).
    pub fn into_block(mut self) -> Vec<Symbol> {
        self.t.truncate(self.block_len);
        self.t
    }

    #[inline]
    fn gt_at(&self, offset: usize) -> bool {
        self.gt.get(offset - 1)
    }

    /// Lexicographic order of the full text suffixes at block offsets `i`, `j`.
    pub fn compare(&self, i: usize, j: usize) -> Ordering {
        let m = self.block_len;
        assert!(i < m && j < m);
        match i.cmp(&j) {
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => self.compare(j, i).reverse(),
            Ordering::Less => {
                // Suffix i up to the block end against an equally long window
                // of suffix j; the first block always differs at the sentinel.
                let len = m - i;
                let a = &self.t[i..m];
                let b = &self.t[j..(j + len).min(self.t.len())];
                match a.cmp(b) {
                    Ordering::Equal => {
                        debug_assert!(!self.is_first());
                        if self.gt_at(j - i) {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        }
                    }
                    ord => ord,
                }
            }
        }
    }

    /// For offsets `1..m`: is the suffix there greater than the suffix just
    /// past the block?
    fn greater_than_next(&self) -> Vec<bool> {
        let m = self.block_len;
        // z-function of (t[m..2m-1] ++ SEP ++ t[1..m]) yields the lcp of every
        // t[p..m] with the right context.
        let mut z_in: Vec<Symbol> = Vec::with_capacity(2 * m);
        z_in.extend_from_slice(&self.t[m..m + (m - 1)]);
        z_in.push(Symbol::MAX);
        z_in.extend_from_slice(&self.t[1..m]);
        let z = z_function(&z_in);
        let base = m; // index of t[1] in z_in
        let mut g = Vec::with_capacity(m);
        g.push(false); // offset 0 unused
        for p in 1..m {
            let l = z[base + p - 1];
            g.push(if l >= m - p {
                !self.gt_at(m - p)
            } else {
                self.t[p + l] > self.t[m + l]
            });
        }
        g
    }

    fn sort_induced(&self) -> Vec<u32> {
        let m = self.block_len;
        if self.is_first() {
            let s: Vec<u32> = self.t.iter().map(|&c| c as u32).collect();
            return sais::suffix_array(&s, ALPHABET);
        }
        // Offsets 1..m re-encoded so that plain suffix order equals full-text
        // order; the terminator stands for the suffix right after the block.
        let g = self.greater_than_next();
        let mut s: Vec<u32> = Vec::with_capacity(m + 1);
        for p in 1..m {
            s.push(3 * self.t[p] as u32 + if g[p] { 2 } else { 0 });
        }
        s.push(3 * self.t[m] as u32 + 1);
        s.push(0);
        let sa = sais::suffix_array(&s, 3 * ALPHABET);
        let mut order: Vec<u32> = sa
            .into_iter()
            .filter(|&q| (q as usize) < m - 1)
            .map(|q| q + 1)
            .collect();
        let at = order.partition_point(|&p| self.compare(p as usize, 0) == Ordering::Less);
        order.insert(at, 0);
        order
    }

    pub fn sort(&self, strategy: SortStrategy) -> BlockSortResult {
        let m = self.block_len;
        let sa_int = match strategy {
            // Bucket setup over the re-encoded alphabet dwarfs tiny blocks.
            SortStrategy::Induced if m > SMALL_BLOCK => self.sort_induced(),
            _ => {
                let mut v: Vec<u32> = (0..m as u32).collect();
                v.sort_by(|&a, &b| self.compare(a as usize, b as usize));
                v
            }
        };
        BlockSortResult::from_order(sa_int, self.block(), self.block_last())
    }
}

/// Sorted block suffixes, the block's partial BWT and its rank index.
#[derive(Debug, Clone)]
pub struct BlockSortResult {
    sa_int: Vec<u32>,
    rank_of: Vec<u32>,
    index: RankIndex,
    block_last: Symbol,
}

impl BlockSortResult {
    fn from_order(sa_int: Vec<u32>, block: &[Symbol], block_last: Symbol) -> Self {
        let m = sa_int.len();
        let mut rank_of = alloc::vec![0u32; m];
        let mut bwt = Vec::with_capacity(m);
        let mut hole = 0;
        for (row, &p) in sa_int.iter().enumerate() {
            rank_of[p as usize] = row as u32;
            if p == 0 {
                hole = row;
                bwt.push(0);
            } else {
                bwt.push((block[p as usize - 1] - 1) as u8);
            }
        }
        BlockSortResult { sa_int, rank_of, index: RankIndex::new(bwt, hole, block_last), block_last }
    }

    pub fn len(&self) -> usize {
        self.sa_int.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa_int.is_empty()
    }

    /// Block offsets in increasing suffix order.
    pub fn sa_int(&self) -> &[u32] {
        &self.sa_int
    }

    /// Sorted position of the suffix at block offset `p`.
    pub fn rank_of(&self, p: usize) -> usize {
        self.rank_of[p] as usize
    }

    /// Row of the block-start suffix; it holds the hole.
    pub fn r1(&self) -> usize {
        self.index.hole()
    }

    pub fn hole_row(&self) -> usize {
        self.index.hole()
    }

    pub fn rank_index(&self) -> &RankIndex {
        &self.index
    }

    pub fn block_last(&self) -> Symbol {
        self.block_last
    }

    /// Partial BWT byte of `row`, `None` at the hole.
    pub fn bwt_int(&self, row: usize) -> Option<u8> {
        self.index.get(row)
    }

    /// gt bits for offsets `1..m` relative to offset 0: bit `p - 1` is set iff
    /// the suffix at offset `p` sorts after the block-start suffix.
    pub fn new_block_gt(&self) -> BitArray {
        let r1 = self.r1();
        BitArray::from_bools((1..self.len()).map(|p| self.rank_of(p) > r1))
    }
}

fn z_function(s: &[Symbol]) -> Vec<usize> {
    let n = s.len();
    let mut z = alloc::vec![0usize; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

impl core::error::Error for BlockError {}
