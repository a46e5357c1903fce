//! Linear-time suffix sorting over integer alphabets (induced sorting).

use alloc::vec;
use alloc::vec::Vec;

const EMPTY: u32 = u32::MAX;

/// Suffix array of `s`, whose last symbol must be a unique `0` and whose
/// other symbols lie in `1..alphabet`.
pub fn suffix_array(s: &[u32], alphabet: usize) -> Vec<u32> {
    assert!(!s.is_empty(), "empty input");
    assert!(s.len() < EMPTY as usize, "input too long for 32-bit suffix array");
    debug_assert!(*s.last().unwrap() == 0);
    debug_assert!(s[..s.len() - 1].iter().all(|&c| c > 0 && (c as usize) < alphabet));
    let mut sa = vec![EMPTY; s.len()];
    sais(s, alphabet, &mut sa);
    sa
}

fn classify(s: &[u32]) -> Vec<bool> {
    // true = S-type
    let n = s.len();
    let mut t = vec![false; n];
    t[n - 1] = true;
    for i in (0..n - 1).rev() {
        t[i] = s[i] < s[i + 1] || (s[i] == s[i + 1] && t[i + 1]);
    }
    t
}

#[inline]
fn is_lms(t: &[bool], i: usize) -> bool {
    i > 0 && t[i] && !t[i - 1]
}

fn bucket_bounds(s: &[u32], k: usize, ends: bool) -> Vec<u32> {
    let mut cnt = vec![0u32; k];
    for &c in s {
        cnt[c as usize] += 1;
    }
    let mut sum = 0u32;
    for c in cnt.iter_mut() {
        sum += *c;
        *c = if ends { sum } else { sum - *c };
    }
    cnt
}

fn induce(s: &[u32], k: usize, t: &[bool], sa: &mut [u32]) {
    let n = s.len();
    let mut heads = bucket_bounds(s, k, false);
    for i in 0..n {
        let j = sa[i];
        if j != EMPTY && j > 0 && !t[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            sa[heads[c] as usize] = j - 1;
            heads[c] += 1;
        }
    }
    let mut tails = bucket_bounds(s, k, true);
    for i in (0..n).rev() {
        let j = sa[i];
        if j != EMPTY && j > 0 && t[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = j - 1;
        }
    }
}

fn lms_substrings_equal(s: &[u32], t: &[bool], a: usize, b: usize) -> bool {
    let n = s.len();
    if a == n - 1 || b == n - 1 {
        return a == b;
    }
    let mut i = 0;
    loop {
        let (x, y) = (a + i, b + i);
        if s[x] != s[y] || t[x] != t[y] {
            return false;
        }
        if i > 0 && (is_lms(t, x) || is_lms(t, y)) {
            return is_lms(t, x) && is_lms(t, y);
        }
        i += 1;
    }
}

fn sais(s: &[u32], k: usize, sa: &mut [u32]) {
    let n = s.len();
    if n == 1 {
        sa[0] = 0;
        return;
    }
    let t = classify(s);

    // Sort LMS substrings.
    sa.fill(EMPTY);
    let mut tails = bucket_bounds(s, k, true);
    for i in (1..n).rev() {
        if is_lms(&t, i) {
            let c = s[i] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = i as u32;
        }
    }
    induce(s, k, &t, sa);

    // Compact the sorted LMS positions to the front and name them.
    let mut m = 0;
    for i in 0..n {
        let j = sa[i] as usize;
        if is_lms(&t, j) {
            sa[m] = j as u32;
            m += 1;
        }
    }
    sa[m..].fill(EMPTY);
    let mut name = 0u32;
    let mut prev: Option<usize> = None;
    for i in 0..m {
        let pos = sa[i] as usize;
        if let Some(p) = prev {
            if !lms_substrings_equal(s, &t, p, pos) {
                name += 1;
            }
        }
        prev = Some(pos);
        sa[m + pos / 2] = name;
    }
    let names = name as usize + 1;
    let mut reduced = Vec::with_capacity(m);
    for i in m..n {
        if sa[i] != EMPTY {
            reduced.push(sa[i]);
        }
    }

    // Order of LMS suffixes.
    let mut lms_order = vec![0u32; m];
    if names < m {
        sais(&reduced, names, &mut lms_order);
    } else {
        for (i, &r) in reduced.iter().enumerate() {
            lms_order[r as usize] = i as u32;
        }
    }
    let lms_positions: Vec<u32> = (1..n).filter(|&i| is_lms(&t, i)).map(|i| i as u32).collect();
    for r in lms_order.iter_mut() {
        *r = lms_positions[*r as usize];
    }

    sa.fill(EMPTY);
    let mut tails = bucket_bounds(s, k, true);
    for &p in lms_order.iter().rev() {
        let c = s[p as usize] as usize;
        tails[c] -= 1;
        sa[tails[c] as usize] = p;
    }
    induce(s, k, &t, sa);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(s: &[u32]) -> Vec<u32> {
        let mut v: Vec<u32> = (0..s.len() as u32).collect();
        v.sort_by(|&a, &b| s[a as usize..].cmp(&s[b as usize..]));
        v
    }

    #[test]
    fn banana() {
        let s: Vec<u32> = b"banana".iter().map(|&b| b as u32).chain([0]).collect();
        assert_eq!(suffix_array(&s, 256), vec![6, 5, 3, 1, 0, 4, 2]);
    }

    #[test]
    fn single() {
        assert_eq!(suffix_array(&[0], 1), vec![0]);
    }

    proptest! {
        #[test]
        fn matches_naive(mut v in proptest::collection::vec(1u32..4, 0..400)) {
            v.push(0);
            prop_assert_eq!(suffix_array(&v, 4), naive(&v));
        }

        #[test]
        fn periodic(period in proptest::collection::vec(1u32..3, 1..5), reps in 1usize..60) {
            let mut v: Vec<u32> = period.iter().cycle().take(period.len() * reps).copied().collect();
            v.push(0);
            prop_assert_eq!(suffix_array(&v, 3), naive(&v));
        }
    }
}
