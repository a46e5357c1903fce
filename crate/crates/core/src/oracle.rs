//! Brute-force reference computations for small texts.
//!
//! Everything here sorts suffixes by direct comparison and is only meant for
//! validating the scan-based builders.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::merge::GapArray;
use crate::{sym, Symbol, SENTINEL};

/// Largest extended length (text plus sentinel) the oracles accept.
pub const ORACLE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { len: usize },
    /// BWT payload and primary index are inconsistent.
    Malformed,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { len } => {
                write!(f, "{len} symbols exceed the oracle limit of {ORACLE_LIMIT}")
            }
            OracleError::Malformed => f.write_str("malformed bwt"),
        }
    }
}

/// All structures of `text` + sentinel, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub sa: Vec<u64>,
    pub pos: Vec<u64>,
    /// BWT as symbols; the sentinel appears exactly once.
    pub bwt: Vec<Symbol>,
    pub psi: Vec<u64>,
}

impl OracleResult {
    /// Extended length.
    pub fn rows(&self) -> usize {
        self.sa.len()
    }

    /// Row holding the sentinel.
    pub fn primary_index(&self) -> u64 {
        self.pos[0]
    }

    /// BWT with the sentinel row removed.
    pub fn payload(&self) -> Vec<u8> {
        self.bwt.iter().filter(|&&c| c != SENTINEL).map(|&c| (c - 1) as u8).collect()
    }

    /// `(rank, position)` pairs for the positions whose 1-based index is a
    /// multiple of `d`, sorted by rank.
    pub fn pos_d(&self, d: u64) -> Vec<(u64, u64)> {
        assert!(d >= 1);
        let mut v: Vec<(u64, u64)> = (0..self.rows() as u64)
            .filter(|p| (p + 1) % d == 0)
            .map(|p| (self.pos[p as usize], p))
            .collect();
        v.sort_unstable();
        v
    }

    /// Check the defining identities; returns the first violated one.
    pub fn self_check(&self) -> Result<(), &'static str> {
        let n = self.rows() as u64;
        let mut seen = vec![false; n as usize];
        for &s in &self.sa {
            if s >= n || core::mem::replace(&mut seen[s as usize], true) {
                return Err("sa is not a permutation");
            }
        }
        for i in 0..n as usize {
            if self.sa[self.pos[i] as usize] != i as u64 {
                return Err("pos is not the inverse of sa");
            }
            if self.sa[self.psi[i] as usize] != (self.sa[i] + 1) % n {
                return Err("psi does not advance sa");
            }
        }
        if self.bwt.iter().filter(|&&c| c == SENTINEL).count() != 1 {
            return Err("bwt must contain one sentinel");
        }
        Ok(())
    }
}

fn guard(len: usize) -> Result<(), OracleError> {
    if len > ORACLE_LIMIT {
        Err(OracleError::TooLarge { len })
    } else {
        Ok(())
    }
}

/// Suffix array of `text` + sentinel by direct comparison.
pub fn suffix_array(text: &[u8]) -> Result<Vec<u64>, OracleError> {
    guard(text.len() + 1)?;
    // Comparing the bare byte slices realizes the sentinel: a proper prefix
    // sorts first.
    let mut sa: Vec<u64> = (0..=text.len() as u64).collect();
    sa.sort_unstable_by(|&a, &b| text[a as usize..].cmp(&text[b as usize..]));
    Ok(sa)
}

pub fn oracle_all(text: &[u8]) -> Result<OracleResult, OracleError> {
    let sa = suffix_array(text)?;
    let n = sa.len();
    let mut pos = vec![0u64; n];
    for (r, &s) in sa.iter().enumerate() {
        pos[s as usize] = r as u64;
    }
    let at = |p: usize| if p == text.len() { SENTINEL } else { sym(text[p]) };
    let bwt = sa.iter().map(|&s| at((s as usize + n - 1) % n)).collect();
    let psi = sa.iter().map(|&s| pos[(s as usize + 1) % n]).collect();
    Ok(OracleResult { sa, pos, bwt, psi })
}

/// Gap array of `block` against the old region `old` + sentinel.
pub fn oracle_gap(old: &[u8], block: &[u8]) -> Result<GapArray, OracleError> {
    let mut text = block.to_vec();
    text.extend_from_slice(old);
    let sa = suffix_array(&text)?;
    let mut counts = vec![0u64; block.len() + 1];
    let mut seen_new = 0;
    for &s in &sa {
        if (s as usize) < block.len() {
            seen_new += 1;
        } else {
            counts[seen_new] += 1;
        }
    }
    Ok(GapArray::from_counts(counts))
}

/// Plain LF decoding of a BWT payload with its sentinel row removed.
pub fn naive_unbwt(payload: &[u8], primary_index: u64) -> Result<Vec<u8>, OracleError> {
    let n = payload.len();
    if primary_index > n as u64 {
        return Err(OracleError::Malformed);
    }
    let p = primary_index as usize;
    let rows: Vec<Symbol> = payload[..p]
        .iter()
        .map(|&b| sym(b))
        .chain(core::iter::once(SENTINEL))
        .chain(payload[p..].iter().map(|&b| sym(b)))
        .collect();
    let lf = crate::lf::lf_permutation(&rows);
    let mut out = vec![0u8; n];
    // Row 0 is the lone sentinel suffix; its character is the last text byte.
    let mut r = 0usize;
    for i in (0..n).rev() {
        let c = rows[r];
        if c == SENTINEL {
            return Err(OracleError::Malformed);
        }
        out[i] = (c - 1) as u8;
        r = lf[r] as usize;
    }
    if r != p {
        return Err(OracleError::Malformed);
    }
    Ok(out)
}

impl core::error::Error for OracleError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aba() {
        let o = oracle_all(b"aba").unwrap();
        assert_eq!(o.sa, vec![3, 2, 0, 1]);
        assert_eq!(o.bwt, vec![sym(b'a'), sym(b'b'), SENTINEL, sym(b'a')]);
        assert_eq!(o.psi, vec![2, 0, 3, 1]);
        assert_eq!(o.primary_index(), 2);
        assert_eq!(o.payload(), b"aba");
    }

    #[test]
    fn empty_text() {
        let o = oracle_all(b"").unwrap();
        assert_eq!((o.sa.clone(), o.psi.clone()), (vec![0], vec![0]));
        o.self_check().unwrap();
    }

    #[test]
    fn mississippi_is_consistent() {
        let o = oracle_all(b"mississippi").unwrap();
        o.self_check().unwrap();
        assert_eq!(naive_unbwt(&o.payload(), o.primary_index()).unwrap(), b"mississippi");
    }

    #[test]
    fn gap_examples() {
        assert_eq!(oracle_gap(b"a", b"ba").unwrap().counts(), &[2, 0, 0]);
        assert_eq!(oracle_gap(b"", b"x").unwrap().counts(), &[1, 0]);
    }

    #[test]
    fn pos_d_example() {
        // "baa$", 1-based positions 2 and 4
        let o = oracle_all(b"baa").unwrap();
        assert_eq!(o.pos_d(2), vec![(0, 3), (2, 1)]);
        assert!(o.pos_d(5).is_empty());
    }

    #[test]
    fn naive_unbwt_examples() {
        assert_eq!(naive_unbwt(b"aba", 2).unwrap(), b"aba");
        assert_eq!(naive_unbwt(b"q", 1).unwrap(), b"q");
        assert_eq!(naive_unbwt(b"", 0).unwrap(), b"");
        assert_eq!(naive_unbwt(b"ab", 3), Err(OracleError::Malformed));
    }

    #[test]
    fn guard() {
        let big = vec![0u8; ORACLE_LIMIT];
        assert_eq!(oracle_all(&big).unwrap_err(), OracleError::TooLarge { len: ORACLE_LIMIT + 1 });
    }
}
