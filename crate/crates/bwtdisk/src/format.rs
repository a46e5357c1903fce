//! On-disk output formats. All integers are little-endian and all indices
//! 0-based.

use std::io::{Read, Write};
use std::path::Path;

use bwtdisk_core::codec::{self, CodecId};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::LedgerState;

pub const BWT_MAGIC: &[u8; 4] = b"BWTD";
pub const BWT_VERSION: u8 = 1;
pub const BWT_HEADER_LEN: u64 = 24;
pub const SA_MAGIC: &[u8; 4] = b"SA_1";
pub const PSI_MAGIC: &[u8; 4] = b"PSI1";
pub const POSD_MAGIC: &[u8; 4] = b"POSD";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BwtHeader {
    pub codec: CodecId,
    pub n: u64,
    pub primary_index: u64,
}

impl BwtHeader {
    pub fn to_bytes(&self) -> [u8; BWT_HEADER_LEN as usize] {
        let mut h = [0u8; BWT_HEADER_LEN as usize];
        h[..4].copy_from_slice(BWT_MAGIC);
        h[4] = BWT_VERSION;
        h[5] = self.codec.to_byte();
        h[8..16].copy_from_slice(&self.n.to_le_bytes());
        h[16..24].copy_from_slice(&self.primary_index.to_le_bytes());
        h
    }

    pub fn parse(h: &[u8]) -> Result<Self> {
        if h.len() < BWT_HEADER_LEN as usize {
            return Err(Error::corrupt("bwt file shorter than its header"));
        }
        if &h[..4] != BWT_MAGIC {
            return Err(Error::corrupt("not a bwt file"));
        }
        if h[4] != BWT_VERSION {
            return Err(Error::corrupt(format!("unsupported bwt file version {}", h[4])));
        }
        let codec = CodecId::from_byte(h[5]).ok_or_else(|| Error::corrupt(format!("unknown codec {}", h[5])))?;
        if h[6..8] != [0, 0] {
            return Err(Error::corrupt("reserved header bytes are not zero"));
        }
        let n = u64::from_le_bytes(h[8..16].try_into().unwrap());
        let primary_index = u64::from_le_bytes(h[16..24].try_into().unwrap());
        if primary_index > n {
            return Err(Error::corrupt(format!("primary index {primary_index} exceeds n = {n}")));
        }
        Ok(BwtHeader { codec, n, primary_index })
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut h = [0u8; BWT_HEADER_LEN as usize];
        let mut f = std::fs::File::open(path)?;
        f.read_exact(&mut h).map_err(|_| Error::corrupt("bwt file shorter than its header"))?;
        Self::parse(&h)
    }
}

/// A whole BWT file in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BwtData {
    pub header: BwtHeader,
    pub payload: Vec<u8>,
}

impl BwtData {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.to_bytes().to_vec();
        out.extend(codec::encode(self.header.codec, &self.payload));
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let header = BwtHeader::parse(bytes)?;
        let payload = codec::decode(header.codec, &bytes[BWT_HEADER_LEN as usize..])?;
        if payload.len() as u64 != header.n {
            return Err(Error::corrupt(format!("payload decodes to {} bytes, header says {}", payload.len(), header.n)));
        }
        Ok(BwtData { header, payload })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read(path)?)
    }
}

fn check_magic<'a>(bytes: &'a [u8], magic: &[u8; 4], what: &str) -> Result<&'a [u8]> {
    match bytes.strip_prefix(magic.as_slice()) {
        Some(rest) => Ok(rest),
        None => Err(Error::corrupt(format!("not a {what} file"))),
    }
}

fn u64s(bytes: &[u8], what: &str) -> Result<Vec<u64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::corrupt(format!("truncated {what} file")));
    }
    Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn encode_sa(sa: &[u64]) -> Vec<u8> {
    let mut out = SA_MAGIC.to_vec();
    sa.iter().for_each(|v| out.extend(v.to_le_bytes()));
    out
}

pub fn decode_sa(bytes: &[u8]) -> Result<Vec<u64>> {
    u64s(check_magic(bytes, SA_MAGIC, "suffix array")?, "suffix array")
}

/// Appends the zigzag-varint delta of `v` after `prev`.
pub fn push_delta(out: &mut Vec<u8>, prev: u64, v: u64) {
    codec::write_varint(out, codec::zigzag_encode(v.wrapping_sub(prev) as i64));
}

pub fn encode_psi(psi: &[u64]) -> Vec<u8> {
    let mut out = PSI_MAGIC.to_vec();
    if let Some((&first, rest)) = psi.split_first() {
        out.extend(first.to_le_bytes());
        let mut prev = first;
        for &v in rest {
            push_delta(&mut out, prev, v);
            prev = v;
        }
    }
    out
}

pub fn decode_psi(bytes: &[u8]) -> Result<Vec<u64>> {
    let mut rest = check_magic(bytes, PSI_MAGIC, "psi")?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    if rest.len() < 8 {
        return Err(Error::corrupt("truncated psi file"));
    }
    let mut prev = u64::from_le_bytes(rest[..8].try_into().unwrap());
    let mut out = vec![prev];
    rest = &rest[8..];
    while !rest.is_empty() {
        let (z, used) = codec::read_varint(rest)?;
        prev = prev.wrapping_add(codec::zigzag_decode(z) as u64);
        out.push(prev);
        rest = &rest[used..];
    }
    Ok(out)
}

pub fn encode_posd(d: u64, pairs: &[(u64, u64)]) -> Vec<u8> {
    let mut out = POSD_MAGIC.to_vec();
    out.extend(d.to_le_bytes());
    for &(r, p) in pairs {
        out.extend(r.to_le_bytes());
        out.extend(p.to_le_bytes());
    }
    out
}

pub fn decode_posd(bytes: &[u8]) -> Result<(u64, Vec<(u64, u64)>)> {
    let rest = check_magic(bytes, POSD_MAGIC, "pos_d")?;
    let v = u64s(rest, "pos_d")?;
    let Some((&d, pairs)) = v.split_first() else {
        return Err(Error::corrupt("truncated pos_d file"));
    };
    if pairs.len() % 2 != 0 {
        return Err(Error::corrupt("truncated pos_d file"));
    }
    Ok((d, pairs.chunks_exact(2).map(|c| (c[0], c[1])).collect()))
}

/// Run statistics written by `--stats`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsReport {
    pub passes: u64,
    pub rounds: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub peak_temp_bytes: u64,
    pub wall_ms: u64,
}

impl StatsReport {
    pub fn from_ledger(st: &LedgerState, wall_ms: u64) -> Self {
        StatsReport {
            passes: st.passes,
            rounds: st.rounds,
            bytes_read: st.bytes_read,
            bytes_written: st.bytes_written,
            peak_temp_bytes: st.peak_temp_bytes,
            wall_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{}", self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_roundtrip() {
        let h = BwtHeader { codec: CodecId::Rle, n: 11, primary_index: 3 };
        let b = h.to_bytes();
        assert_eq!(&b[..8], b"BWTD\x01\x01\x00\x00");
        assert_eq!(BwtHeader::parse(&b).unwrap(), h);
    }

    #[test]
    fn header_rejects_garbage() {
        let mut b = BwtHeader { codec: CodecId::Identity, n: 1, primary_index: 1 }.to_bytes();
        b[16] = 2;
        assert!(BwtHeader::parse(&b).is_err());
        b[16] = 1;
        b[6] = 1;
        assert!(BwtHeader::parse(&b).is_err());
        assert!(BwtHeader::parse(b"BWTD").is_err());
        assert!(BwtHeader::parse(&[0; 24]).is_err());
    }

    #[test]
    fn single_a_file() {
        let d = BwtData { header: BwtHeader { codec: CodecId::Identity, n: 1, primary_index: 1 }, payload: b"a".to_vec() };
        let bytes = d.to_bytes();
        assert_eq!(bytes.len(), 25);
        assert_eq!(BwtData::parse(&bytes).unwrap(), d);
    }

    #[test]
    fn payload_length_is_checked() {
        let mut bytes = BwtData { header: BwtHeader { codec: CodecId::Identity, n: 2, primary_index: 0 }, payload: b"ab".to_vec() }.to_bytes();
        bytes.pop();
        assert!(BwtData::parse(&bytes).is_err());
    }

    #[test]
    fn index_files_roundtrip() {
        let sa = vec![3, 2, 0, 1];
        assert_eq!(decode_sa(&encode_sa(&sa)).unwrap(), sa);
        let psi = vec![2, 0, 3, 1, 1_000_000, 0];
        assert_eq!(decode_psi(&encode_psi(&psi)).unwrap(), psi);
        assert_eq!(decode_psi(&encode_psi(&[])).unwrap(), Vec::<u64>::new());
        let pairs = vec![(0, 3), (2, 1)];
        assert_eq!(decode_posd(&encode_posd(2, &pairs)).unwrap(), (2, pairs));
    }

    #[test]
    fn psi_deltas_are_zigzag() {
        // first = 2, then -2 and +3: zigzag 3 and 6
        assert_eq!(encode_psi(&[2, 0, 3]), [b"PSI1".as_slice(), &2u64.to_le_bytes(), &[3, 6]].concat());
    }

    #[test]
    fn stats_has_exactly_the_documented_keys() {
        let s = StatsReport { passes: 1, rounds: 2, bytes_read: 3, bytes_written: 4, peak_temp_bytes: 5, wall_ms: 6 };
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["bytes_read", "bytes_written", "passes", "peak_temp_bytes", "rounds", "wall_ms"]);
        assert!(serde_json::from_str::<StatsReport>(r#"{"passes":1}"#).is_err());
    }
}
