//! LF mapping over a complete BWT (sentinel row included).

use alloc::vec::Vec;

use crate::{Symbol, ALPHABET, SENTINEL};

/// `C[c]`: number of BWT rows whose character is smaller than `c`, the
/// sentinel row counting as the smallest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    c: [u64; ALPHABET + 1],
}

impl CountTable {
    /// From per-byte frequencies of the payload (the sentinel row excluded).
    pub fn from_byte_counts(counts: &[u64; 256]) -> Self {
        let mut c = [0u64; ALPHABET + 1];
        c[1] = 1;
        for b in 0..256 {
            c[b + 2] = c[b + 1] + counts[b];
        }
        CountTable { c }
    }

    pub fn from_payload(payload: &[u8]) -> Self {
        let mut counts = [0u64; 256];
        for &b in payload {
            counts[b as usize] += 1;
        }
        Self::from_byte_counts(&counts)
    }

    #[inline]
    pub fn get(&self, c: Symbol) -> u64 {
        self.c[c as usize]
    }

    /// Total rows.
    pub fn rows(&self) -> u64 {
        self.c[ALPHABET]
    }
}

/// Running per-symbol occurrence counts for a forward scan over BWT rows.
#[derive(Debug, Clone)]
pub struct RunningCounts {
    occ: [u64; ALPHABET],
}

impl Default for RunningCounts {
    fn default() -> Self {
        RunningCounts { occ: [0; ALPHABET] }
    }
}

impl RunningCounts {
    /// LF of the current row (character `c`), then count the row.
    #[inline]
    pub fn advance(&mut self, c: Symbol, table: &CountTable) -> u64 {
        let r = lf_step(c, &self.occ, table);
        self.occ[c as usize] += 1;
        r
    }

    pub fn get(&self, c: Symbol) -> u64 {
        self.occ[c as usize]
    }
}

/// Row whose suffix starts one text position earlier: `C[c] + occ[c]`, where
/// `occ` counts `c` in the rows before the current one.
#[inline]
pub fn lf_step(c: Symbol, occ: &[u64; ALPHABET], table: &CountTable) -> u64 {
    table.get(c) + occ[c as usize]
}

/// Whole LF permutation of a BWT given as symbols (sentinel included).
pub fn lf_permutation(bwt: &[Symbol]) -> Vec<u64> {
    let mut counts = [0u64; 256];
    for &c in bwt {
        if c != SENTINEL {
            counts[c as usize - 1] += 1;
        }
    }
    let table = CountTable::from_byte_counts(&counts);
    let mut running = RunningCounts::default();
    bwt.iter().map(|&c| running.advance(c, &table)).collect()
}
