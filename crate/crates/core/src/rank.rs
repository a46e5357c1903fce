//! Occurrence counting over a block's partial BWT.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Symbol, ALPHABET, SENTINEL};

/// Rows between consecutive count samples.
pub const SAMPLE_RATE: usize = 512;

/// `C` table plus sampled prefix counts over `bwt_int`.
///
/// The hole row never contributes to `rank`. In `C` the hole is valued as the
/// block's last character, so `C[c]` counts the first characters of the new
/// suffixes that are smaller than `c`.
#[derive(Debug, Clone)]
pub struct RankIndex {
    bwt: Vec<u8>,
    hole: usize,
    c_table: Vec<u64>,
    samples: Vec<u32>,
}

impl RankIndex {
    /// `bwt` holds the block's partial BWT; the byte stored at `hole` is
    /// ignored.
    pub fn new(bwt: Vec<u8>, hole: usize, block_last: Symbol) -> Self {
        assert!(hole < bwt.len(), "hole row outside block");
        assert!(bwt.len() < u32::MAX as usize, "block too large for 32-bit samples");
        let mut occ = [0u64; ALPHABET];
        occ[block_last as usize] += 1;
        let mut samples = Vec::with_capacity((bwt.len() / SAMPLE_RATE + 1) * 256);
        let mut running = [0u32; 256];
        for (row, &b) in bwt.iter().enumerate() {
            if row % SAMPLE_RATE == 0 {
                samples.extend_from_slice(&running);
            }
            if row != hole {
                running[b as usize] += 1;
                occ[b as usize + 1] += 1;
            }
        }
        if bwt.len() % SAMPLE_RATE == 0 {
            samples.extend_from_slice(&running);
        }
        let mut c_table = vec![0u64; ALPHABET + 1];
        for c in 0..ALPHABET {
            c_table[c + 1] = c_table[c] + occ[c];
        }
        RankIndex { bwt, hole, c_table, samples }
    }

    pub fn len(&self) -> usize {
        self.bwt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bwt.is_empty()
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    /// Number of block characters strictly smaller than `c`.
    #[inline]
    pub fn c(&self, c: Symbol) -> u64 {
        self.c_table[c as usize]
    }

    /// Occurrences of `c` among rows `0..i`, hole excluded.
    #[inline]
    pub fn rank(&self, c: Symbol, i: usize) -> u64 {
        assert!(i <= self.bwt.len());
        if c == SENTINEL {
            return 0;
        }
        let b = (c - 1) as u8;
        let s = i / SAMPLE_RATE;
        let start = s * SAMPLE_RATE;
        let base = self.samples[s * 256 + b as usize] as u64;
        let mut n = count_eq(&self.bwt[start..i], b);
        if self.hole >= start && self.hole < i && self.bwt[self.hole] == b {
            n -= 1;
        }
        base + n
    }

    /// The stored row byte, `None` at the hole.
    pub fn get(&self, row: usize) -> Option<u8> {
        (row != self.hole).then(|| self.bwt[row])
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bwt
    }
}

/// Occurrences of `b` in `s`, counted in byte lanes so it vectorizes.
#[inline]
fn count_eq(s: &[u8], b: u8) -> u64 {
    s.chunks(255).map(|ch| ch.iter().fold(0u8, |acc, &x| acc.wrapping_add(u8::from(x == b))) as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        // bwt_int = ['b', hole]
        let idx = RankIndex::new(vec![b'b', 0], 1, sym(b'a'));
        assert_eq!(idx.rank(sym(b'b'), 1), 1);
        for c in 0..ALPHABET as Symbol {
            assert_eq!(idx.rank(c, 0), 0);
        }
        // bwt_int = [hole, 'a']; the hole byte happens to equal 'a'
        let idx = RankIndex::new(vec![b'a', b'a'], 0, sym(b'b'));
        assert_eq!(idx.rank(sym(b'a'), 2), 1);
        assert_eq!(idx.c(sym(b'a')), 0);
        assert_eq!(idx.c(sym(b'b')), 1);
        assert_eq!(idx.c(sym(b'c')), 2);
    }

    proptest! {
        #[test]
        fn rank_matches_direct_count(
            bwt in proptest::collection::vec(0u8..4, 1..2000),
            hole_seed in any::<usize>(),
            last in 0u16..6,
        ) {
            let hole = hole_seed % bwt.len();
            let idx = RankIndex::new(bwt.clone(), hole, last);
            for c in 0..6u16 {
                let mut n = 0u64;
                for i in 0..=bwt.len() {
                    prop_assert_eq!(idx.rank(c, i), n);
                    if i < bwt.len() && i != hole && c > 0 && bwt[i] == (c - 1) as u8 {
                        n += 1;
                    }
                }
            }
            // C is the exclusive prefix sum of the block multiset.
            prop_assert_eq!(idx.c(ALPHABET as Symbol), bwt.len() as u64);
            let below = |c: u16| {
                let mut n = bwt.iter().enumerate()
                    .filter(|&(i, &b)| i != hole && (b as u16 + 1) < c).count() as u64;
                if last < c { n += 1; }
                n
            };
            for c in 0..8u16 {
                prop_assert_eq!(idx.c(c), below(c));
            }
        }
    }
}
