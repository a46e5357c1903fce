use std::path::{Path, PathBuf};

use bwtdisk::build::{build_bwt, build_posd, build_psi, build_sa, BuildConfig, Layout, Mode};
use bwtdisk::format::{decode_posd, decode_psi, decode_sa, BwtData};
use bwtdisk_core::block::SortStrategy;
use bwtdisk_core::codec::CodecId;
use bwtdisk_core::oracle::oracle_all;
use rand::{Rng, SeedableRng};

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture { dir: tempfile::tempdir().unwrap() }
    }

    fn input(&self, text: &[u8]) -> PathBuf {
        let p = self.dir.path().join("input");
        std::fs::write(&p, text).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn cfg(m: usize) -> BuildConfig {
    BuildConfig { temp_dir: None, ..BuildConfig::with_block_size(m) }
}

fn check_all(text: &[u8], m: usize, base: &BuildConfig) {
    let fx = Fixture::new();
    let input = fx.input(text);
    let o = oracle_all(text).unwrap();
    let cfg = BuildConfig { block_size: m, ..base.clone() };
    let ctx = format!("text {:?} m={m} cfg={cfg:?}", String::from_utf8_lossy(&text[..text.len().min(40)]));

    let rep = build_bwt(&input, &fx.out("bwt"), &cfg).unwrap();
    let bwt = BwtData::read(&fx.out("bwt")).unwrap();
    assert_eq!(bwt.payload, o.payload(), "{ctx}");
    assert_eq!(bwt.header.primary_index, o.primary_index(), "{ctx}");
    assert_eq!(bwt.header.n, text.len() as u64);
    assert_eq!(rep.ledger.passes, (text.len() as u64 + 1).div_ceil(m as u64), "{ctx}");
    assert_eq!(rep.ledger.live_temp_bytes, 0);

    if cfg.layout == Layout::TwoFile {
        build_sa(&input, &fx.out("sa"), &cfg).unwrap();
        assert_eq!(decode_sa(&std::fs::read(fx.out("sa")).unwrap()).unwrap(), o.sa, "{ctx}");
        build_psi(&input, &fx.out("psi"), &cfg).unwrap();
        assert_eq!(decode_psi(&std::fs::read(fx.out("psi")).unwrap()).unwrap(), o.psi, "{ctx}");
        for d in [1, 2, 3, 7] {
            build_posd(&input, &fx.out("posd"), &cfg, d).unwrap();
            assert_eq!(decode_posd(&std::fs::read(fx.out("posd")).unwrap()).unwrap(), (d, o.pos_d(d)), "{ctx} d={d}");
        }
    }
}

fn random_text(rng: &mut impl Rng, len: usize, sigma: u16) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..sigma) as u8 + if sigma < 200 { b'a' } else { 0 }).collect()
}

#[test]
fn spec_examples() {
    let fx = Fixture::new();
    let input = fx.input(b"aba");
    build_bwt(&input, &fx.out("b"), &cfg(2)).unwrap();
    let b = BwtData::read(&fx.out("b")).unwrap();
    assert_eq!((b.payload.as_slice(), b.header.primary_index), (b"aba".as_slice(), 2));
    build_sa(&input, &fx.out("sa"), &cfg(1)).unwrap();
    assert_eq!(decode_sa(&std::fs::read(fx.out("sa")).unwrap()).unwrap(), [3, 2, 0, 1]);
    build_psi(&input, &fx.out("psi"), &cfg(1)).unwrap();
    assert_eq!(decode_psi(&std::fs::read(fx.out("psi")).unwrap()).unwrap(), [2, 0, 3, 1]);

    let input = fx.input(b"a");
    build_bwt(&input, &fx.out("b"), &cfg(1)).unwrap();
    let b = BwtData::read(&fx.out("b")).unwrap();
    assert_eq!((b.payload.as_slice(), b.header.primary_index), (b"a".as_slice(), 1));

    let input = fx.input(b"baa");
    build_posd(&input, &fx.out("p"), &cfg(2), 2).unwrap();
    assert_eq!(decode_posd(&std::fs::read(fx.out("p")).unwrap()).unwrap(), (2, vec![(0, 3), (2, 1)]));
    build_posd(&input, &fx.out("p"), &cfg(2), 9).unwrap();
    assert_eq!(decode_posd(&std::fs::read(fx.out("p")).unwrap()).unwrap(), (9, vec![]));

    let input = fx.input(b"");
    let rep = build_bwt(&input, &fx.out("b"), &cfg(4)).unwrap();
    assert_eq!(std::fs::read(fx.out("b")).unwrap().len(), 24);
    assert_eq!(rep.ledger.passes, 1);
    build_sa(&input, &fx.out("sa"), &cfg(4)).unwrap();
    assert_eq!(decode_sa(&std::fs::read(fx.out("sa")).unwrap()).unwrap(), [0]);
    build_psi(&input, &fx.out("psi"), &cfg(4)).unwrap();
    assert_eq!(decode_psi(&std::fs::read(fx.out("psi")).unwrap()).unwrap(), [0]);
}

#[test]
fn all_products_match_oracle() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for &text in &[b"mississippi".as_slice(), b"abracadabra", b"aaaaaaaaaa", b"abababababab", b"ba"] {
        for m in [1, 2, 3, 5, 16] {
            check_all(text, m, &BuildConfig::default());
        }
    }
    for i in 0..40 {
        let sigma = [1, 2, 4, 26, 255][i % 5];
        let len = rng.gen_range(0..300);
        let text = random_text(&mut rng, len, sigma);
        for m in [1, 3, 16, 64] {
            check_all(&text, m, &BuildConfig::default());
        }
    }
}

#[test]
fn layouts_codecs_and_strategies_agree() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);
    for i in 0..30 {
        let len = rng.gen_range(0..500);
        let text = random_text(&mut rng, len, [1, 2, 4, 26, 255][i % 5]);
        for m in [1, 2, 7, 64] {
            check_all(&text, m, &BuildConfig { codec: CodecId::Identity, layout: Layout::InPlace, ..BuildConfig::default() });
            check_all(&text, m, &BuildConfig { codec: CodecId::Identity, ..BuildConfig::default() });
            check_all(&text, m, &BuildConfig { strategy: SortStrategy::Comparator, ..BuildConfig::default() });
            check_all(&text, m, &BuildConfig { mode: Mode::Internal, ..BuildConfig::default() });
        }
    }
}

#[test]
fn in_place_needs_identity() {
    let fx = Fixture::new();
    let input = fx.input(b"abc");
    let cfg = BuildConfig { layout: Layout::InPlace, ..cfg(2) };
    assert!(matches!(build_bwt(&input, &fx.out("b"), &cfg), Err(bwtdisk::Error::Config(_))));
}

#[test]
fn missing_input_is_io_error() {
    let fx = Fixture::new();
    let r = build_bwt(Path::new("/nonexistent/file"), &fx.out("b"), &cfg(2));
    assert!(matches!(r, Err(bwtdisk::Error::Io(_))));
}
