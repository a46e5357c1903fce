use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bwtdisk::format::{self, BwtData};
use bwtdisk_core::oracle::oracle_all;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bwtdisk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn bwtdisk")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, data: &[u8]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, data).unwrap();
    p
}

fn golden_text() -> Vec<u8> {
    let mut t = Vec::new();
    for i in 0..400u32 {
        t.extend_from_slice(b"mississippi");
        t.push(b'a' + (i % 7) as u8);
    }
    t
}

#[test]
fn single_byte_example() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a", b"a");
    let bwt = dir.path().join("a.bwt");
    let out = run(&["bwt", s(&a), "-o", s(&bwt)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let data = BwtData::read(&bwt).unwrap();
    assert_eq!(data.header.n, 1);
    assert_eq!(data.header.primary_index, 1);
    assert_eq!(data.payload, b"a");

    for naive in [false, true] {
        let back = dir.path().join(format!("a.{naive}"));
        let mut args = vec!["unbwt", s(&bwt), "-o", s(&back)];
        if naive {
            args.push("--naive");
        }
        assert_eq!(code(&run(&args)), 0);
        assert_eq!(std::fs::read(&back).unwrap(), b"a");
    }
}

#[test]
fn default_output_names() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t", b"banana");
    for cmd in ["bwt", "sa", "psi"] {
        assert_eq!(code(&run(&[cmd, s(&t)])), 0);
        assert!(dir.path().join(format!("t.{cmd}")).exists(), "{cmd}");
    }
    assert_eq!(code(&run(&["posd", s(&t), "--d", "2"])), 0);
    assert!(dir.path().join("t.posd").exists());
    assert_eq!(code(&run(&["unbwt", s(&dir.path().join("t.bwt"))])), 0);
    assert_eq!(std::fs::read(dir.path().join("t.bwt.out")).unwrap(), b"banana");
}

#[test]
fn file_formats_match_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let text = golden_text();
    let t = write(dir.path(), "t", &text);
    let o = oracle_all(&text).unwrap();
    let p = |e: &str| dir.path().join(e);
    for (cmd, extra) in [("bwt", vec![]), ("sa", vec![]), ("psi", vec![]), ("posd", vec!["--d", "3"])] {
        let dst = p(cmd);
        let mut args = vec![cmd, s(&t), "-o", s(&dst), "--block-size", "100"];
        args.extend(extra);
        assert_eq!(code(&run(&args)), 0, "{cmd}");
    }
    let sa = std::fs::read(p("sa")).unwrap();
    assert_eq!(&sa[..4], b"SA_1");
    assert_eq!(sa.len(), 4 + 8 * (text.len() + 1));
    assert_eq!(format::decode_sa(&sa).unwrap(), o.sa);
    let psi = std::fs::read(p("psi")).unwrap();
    assert_eq!(&psi[..4], b"PSI1");
    assert_eq!(format::decode_psi(&psi).unwrap(), o.psi);
    let posd = std::fs::read(p("posd")).unwrap();
    assert_eq!(&posd[..4], b"POSD");
    assert_eq!(u64::from_le_bytes(posd[4..12].try_into().unwrap()), 3);
    assert_eq!(format::decode_posd(&posd).unwrap(), (3, o.pos_d(3)));
    let bwt = std::fs::read(p("bwt")).unwrap();
    assert_eq!(&bwt[..4], b"BWTD");
    assert_eq!(bwt[4], 1);
    assert_eq!(bwt[5], 1, "bwt payload defaults to rle");
    assert_eq!(&bwt[6..8], &[0, 0]);
    assert_eq!(u64::from_le_bytes(bwt[8..16].try_into().unwrap()), text.len() as u64);
    assert_eq!(u64::from_le_bytes(bwt[16..24].try_into().unwrap()), o.primary_index());

    let id = p("id.bwt");
    assert_eq!(code(&run(&["bwt", s(&t), "-o", s(&id), "--codec", "identity", "--layout", "in-place", "--block-size", "100"])), 0);
    let raw = std::fs::read(&id).unwrap();
    assert_eq!(raw[5], 0);
    assert_eq!(&raw[24..], o.payload());
}

#[test]
fn both_unbwt_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let text = golden_text();
    let t = write(dir.path(), "t", &text);
    let bwt = dir.path().join("t.bwt");
    assert_eq!(code(&run(&["bwt", s(&t), "-o", s(&bwt), "--block-size", "512"])), 0);
    let scan = dir.path().join("scan");
    let naive = dir.path().join("naive");
    let stats = dir.path().join("inv.json");
    assert_eq!(code(&run(&["unbwt", s(&bwt), "-o", s(&scan), "--stats", s(&stats)])), 0);
    assert_eq!(code(&run(&["unbwt", s(&bwt), "-o", s(&naive), "--naive"])), 0);
    assert_eq!(std::fs::read(&scan).unwrap(), text);
    assert_eq!(std::fs::read(&naive).unwrap(), text);
    let v: Value = serde_json::from_slice(&std::fs::read(&stats).unwrap()).unwrap();
    let n = text.len() as f64;
    let bound = 2 * ((n + 1.0).log2().ceil() as u64) + 4;
    assert!(v["rounds"].as_u64().unwrap() <= bound);
}

#[test]
fn stats_golden() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t", &golden_text());
    let stats = dir.path().join("stats.json");
    let out = run(&["bwt", s(&t), "-o", s(&dir.path().join("t.bwt")), "--block-size", "1000", "--stats", s(&stats)]);
    assert_eq!(code(&out), 0);
    let mut v: Value = serde_json::from_slice(&std::fs::read(&stats).unwrap()).unwrap();
    let obj = v.as_object_mut().unwrap();
    assert!(obj["wall_ms"].is_u64());
    obj.insert("wall_ms".into(), Value::from(0u64));
    let golden: Value = serde_json::from_str(include_str!("golden/stats_bwt.json")).unwrap();
    assert_eq!(v, golden);
    let keys: Vec<&str> = golden.as_object().unwrap().keys().map(String::as_str).collect();
    let raw = std::fs::read_to_string(&stats).unwrap();
    let mut at = 0;
    for k in ["passes", "rounds", "bytes_read", "bytes_written", "peak_temp_bytes", "wall_ms"] {
        assert!(keys.contains(&k));
        let i = raw.find(&format!("\"{k}\"")).unwrap();
        assert!(i >= at, "key order");
        at = i;
    }
}

#[test]
fn verify_passes_and_detects_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t", b"abracadabra");
    let out = run(&["verify", s(&t), "--block-size", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["bwt: ok", "unbwt: ok", "unbwt --naive: ok", "sa: ok", "psi: ok", "posd: ok"] {
        assert!(stdout.contains(name), "{stdout}");
    }

    let other = write(dir.path(), "o", b"abracadabrb");
    let sa = dir.path().join("o.sa");
    assert_eq!(code(&run(&["sa", s(&other), "-o", s(&sa)])), 0);
    let out = run(&["verify", s(&t), "--sa", s(&sa)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sa: MISMATCH"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t", b"hello");
    let missing = dir.path().join("nope");
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate", s(&t)])), 2);
    assert_eq!(code(&run(&["bwt", s(&t), "--codec", "zip"])), 2);
    assert_eq!(code(&run(&["posd", s(&t)])), 2);
    assert_eq!(code(&run(&["posd", s(&t), "--d", "0"])), 2);
    assert_eq!(code(&run(&["bwt", s(&t), "--block-size", "0"])), 2);
    assert_eq!(code(&run(&["bwt", s(&t), "--layout", "in-place", "--codec", "rle"])), 2);
    assert_eq!(code(&run(&["bwt", s(&missing)])), 1);
    assert_eq!(code(&run(&["unbwt", s(&missing)])), 1);
    let junk = write(dir.path(), "junk.bwt", b"not a bwt file at all, clearly");
    assert_eq!(code(&run(&["unbwt", s(&junk)])), 1);
    assert_eq!(code(&run(&["unbwt", s(&junk), "--naive"])), 1);
}

#[test]
fn in_place_layout_defaults_to_identity() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t", b"mississippi");
    let bwt = dir.path().join("t.bwt");
    assert_eq!(code(&run(&["bwt", s(&t), "-o", s(&bwt), "--layout", "in-place", "--block-size", "4"])), 0);
    let data = BwtData::read(&bwt).unwrap();
    assert_eq!(data.payload, b"ipssmpissii");
    assert_eq!(data.header.primary_index, 5);
}
