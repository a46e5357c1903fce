//! Drives whole builds in memory with the core primitives and checks every
//! pass against brute force.

use std::convert::Infallible;

use bwtdisk_core::bits::BitArray;
use bwtdisk_core::block::{BlockContext, SortStrategy};
use bwtdisk_core::merge::{compute_gap_and_gt, PartialBwt};
use bwtdisk_core::oracle::{oracle_all, oracle_gap, suffix_array};
use bwtdisk_core::{sym, Symbol};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn rows_of(text: &[u8]) -> Vec<Option<u8>> {
    oracle_all(text)
        .unwrap()
        .bwt
        .iter()
        .map(|&c| (c != 0).then(|| (c - 1) as u8))
        .collect()
}

/// Returns the final partial BWT after checking every pass.
fn build_checked(text: &[u8], m: usize, strategy: SortStrategy) -> PartialBwt {
    let n = text.len();
    let total = n + 1;
    let first_len = m.min(total);
    let mut s = total - first_len;
    let ctx = BlockContext::first(&text[s..]);
    let result = ctx.sort(strategy);
    let mut gt_h = result.new_block_gt();
    // gt bits stored right to left: positions s+m'-1 down to s+1
    let mut gt_file: Vec<bool> = (0..gt_h.len()).rev().map(|i| gt_h.get(i)).collect();
    let mut partial = PartialBwt::default().merge(&result, &bwtdisk_core::merge::GapArray::zeros(first_len)).unwrap();
    assert_eq!(partial.to_rows(), rows_of(&text[s..]));
    let mut prev: Vec<Symbol> = ctx.into_block();

    while s > 0 {
        let bl = m.min(s);
        s -= bl;
        let mut t: Vec<Symbol> = text[s..s + bl].iter().map(|&b| sym(b)).collect();
        t.extend_from_slice(&prev);
        let ctx = BlockContext::new(t, bl, gt_h.clone()).unwrap();
        let result = ctx.sort(strategy);

        // sa_int against brute force over the whole remaining text
        let sa = suffix_array(&text[s..]).unwrap();
        let expect: Vec<u32> = sa.iter().filter(|&&p| (p as usize) < bl).map(|&p| p as u32).collect();
        assert_eq!(result.sa_int(), &expect[..], "sa_int at s={s}");

        let mut emitted = Vec::new();
        let gap = compute_gap_and_gt::<Infallible>(
            &result,
            text[s + bl..].iter().rev().map(|&b| Ok(b)),
            gt_file.iter().map(|&b| Ok(b)),
            |b| {
                emitted.push(b);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(gap, oracle_gap(&text[s + bl..], &text[s..s + bl]).unwrap());
        assert_eq!(gap.total(), (total - s - bl) as u64);

        gt_h = result.new_block_gt();
        emitted.extend((0..gt_h.len()).rev().map(|i| gt_h.get(i)));
        gt_file = emitted;
        // bit q is position total-1-q; it must say whether that suffix
        // exceeds the new full string.
        assert_eq!(gt_file.len(), total - 1 - s);
        for (q, &bit) in gt_file.iter().enumerate() {
            let k = total - 1 - q;
            assert_eq!(bit, text[k..] > text[s..], "gt of position {k} at s={s}");
        }

        partial = partial.merge(&result, &gap).unwrap();
        assert_eq!(partial.to_rows(), rows_of(&text[s..]), "bwt after pass at s={s}");
        assert_eq!(partial.to_rows().iter().filter(|r| r.is_none()).count(), 1);
        prev = ctx.into_block();
    }
    partial
}

#[test]
fn spec_texts() {
    for text in [&b""[..], b"a", b"aba", b"baa", b"aaa", b"abb", b"mississippi", b"abracadabra"] {
        for m in [1, 2, 3, 5, 16] {
            for st in [SortStrategy::Induced, SortStrategy::Comparator] {
                build_checked(text, m, st);
            }
        }
    }
}

#[test]
fn random_texts_all_block_sizes() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for round in 0..60 {
        let sigma = [1u8, 2, 4, 26][round % 4];
        let n = rng.gen_range(0..300);
        let text: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma)).collect();
        for m in [1, 2, 3, 5, 16, 64] {
            build_checked(&text, m, SortStrategy::Induced);
        }
    }
}

#[test]
fn periodic_texts_need_gt_tie_breaks() {
    for period in [&b"ab"[..], b"aab", b"abcab", b"a"] {
        let text: Vec<u8> = period.iter().cycle().take(97).copied().collect();
        for m in [2, 3, 4, 7, 12] {
            build_checked(&text, m, SortStrategy::Induced);
            build_checked(&text, m, SortStrategy::Comparator);
        }
    }
}

fn block_context(text: &[u8], s: usize, bl: usize) -> BlockContext {
    // context built directly from brute-force gt bits
    let next_end = (s + 2 * bl).min(text.len() + 1);
    let mut t: Vec<Symbol> = text[s..(s + 2 * bl).min(text.len())].iter().map(|&b| sym(b)).collect();
    if next_end == text.len() + 1 {
        t.push(0);
    }
    let next_len = t.len() - bl;
    let start = s + bl;
    let gt = BitArray::from_bools((1..next_len).map(|o| text[start + o..] > text[start..]));
    BlockContext::new(t, bl, gt).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn comparator_is_a_strict_total_order(
        text in proptest::collection::vec(0u8..3, 4..80),
        bl_seed in 1usize..20,
    ) {
        let bl = bl_seed.min(text.len() / 2).max(1);
        let s = text.len() - 2 * bl + 1;
        let s = s.min(text.len() - bl);
        let ctx = block_context(&text, s.saturating_sub(0), bl);
        for i in 0..bl {
            for j in 0..bl {
                let o = ctx.compare(i, j);
                prop_assert_eq!(o, text[s + i..].cmp(&text[s + j..]));
                prop_assert_eq!(o.reverse(), ctx.compare(j, i));
            }
        }
    }

    #[test]
    fn induced_equals_comparator(
        text in proptest::collection::vec(0u8..2, 4..200),
        bl_seed in 1usize..40,
    ) {
        let bl = bl_seed.min(text.len() / 2).max(1);
        let s = text.len() - 2 * bl + 1;
        let ctx = block_context(&text, s.min(text.len() - bl), bl);
        let a = ctx.sort(SortStrategy::Induced);
        let b = ctx.sort(SortStrategy::Comparator);
        prop_assert_eq!(a.sa_int(), b.sa_int());
    }
}
