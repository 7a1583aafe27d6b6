//! Fixed-length dense bitset backing every group subset.

use std::cmp::Ordering;

const BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(BITS)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: vec![!0; len.div_ceil(BITS)],
        };
        s.clear_tail();
        s
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(len.div_ceil(BITS), 0);
        let mut s = BitSet { len, words };
        s.clear_tail();
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / BITS] >> (i % BITS) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / BITS] |= 1 << (i % BITS);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / BITS] &= !(1 << (i % BITS));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn none(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut s = BitSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.clear_tail();
        s
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// ORs `src` cyclically rotated up by `shift` positions into `self`:
    /// bit `i` of `src` lands on bit `(i + shift) mod len`.
    pub fn or_rotated(&mut self, src: &BitSet, shift: usize) {
        debug_assert_eq!(self.len, src.len);
        let n = self.len;
        if n == 0 {
            return;
        }
        let shift = shift % n;
        // bits [0, n - shift) move up by `shift`, bits [n - shift, n) wrap to 0.
        self.or_shifted_range(src, 0, n - shift, shift);
        if shift > 0 {
            self.or_shifted_range(src, n - shift, n, 0);
        }
    }

    /// ORs the bits `src[from..to]` into `self[dst..dst + (to - from)]`.
    fn or_shifted_range(&mut self, src: &BitSet, from: usize, to: usize, dst: usize) {
        let mut i = from;
        let mut d = dst;
        while i < to {
            let take = (to - i).min(BITS - i % BITS).min(BITS - d % BITS);
            let chunk = (src.words[i / BITS] >> (i % BITS)) & mask(take);
            self.words[d / BITS] |= chunk << (d % BITS);
            i += take;
            d += take;
        }
    }

    /// Orders bitsets as big unsigned integers (bit `i` has weight `2^i`).
    pub fn cmp_numeric(&self, other: &BitSet) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// Orders bitsets by their ascending lists of members, lexicographically.
    /// Only meaningful for sets of equal cardinality.
    pub fn cmp_members(&self, other: &BitSet) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let x = a ^ b;
            if x != 0 {
                let low = x & x.wrapping_neg();
                // whoever owns the lowest differing member lists it first
                return if a & low != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        Ordering::Equal
    }

    /// Lowercase hexadecimal, most significant digit first, no leading zeros.
    pub fn to_hex(&self) -> String {
        let mut s = String::new();
        for w in self.words.iter().rev() {
            if s.is_empty() {
                if *w != 0 {
                    s = format!("{:x}", w);
                }
            } else {
                s.push_str(&format!("{:016x}", w));
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    fn clear_tail(&mut self) {
        let r = self.len % BITS;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= mask(r);
            }
        }
    }
}

#[inline]
fn mask(bits: usize) -> u64 {
    if bits >= BITS {
        !0
    } else {
        (1u64 << bits) - 1
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.cur == 0 {
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
        let t = self.cur.trailing_zeros() as usize;
        self.cur &= self.cur - 1;
        Some(self.idx * BITS + t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_list(len: usize, xs: &[usize]) -> BitSet {
        let mut s = BitSet::new(len);
        xs.iter().for_each(|&x| s.insert(x));
        s
    }

    #[test]
    fn full_and_complement_respect_length() {
        let f = BitSet::full(70);
        assert_eq!(f.count_ones(), 70);
        assert!(f.complement().none());
        let s = from_list(70, &[0, 69]);
        assert_eq!(s.complement().count_ones(), 68);
        assert_eq!(s.complement().complement(), s);
    }

    #[test]
    fn hex_rendering() {
        assert_eq!(from_list(8, &[0, 1]).to_hex(), "3");
        assert_eq!(from_list(100, &[64]).to_hex(), "10000000000000000");
        assert_eq!(from_list(100, &[64, 0]).to_hex(), "10000000000000001");
        assert_eq!(BitSet::new(5).to_hex(), "0");
    }

    #[test]
    fn member_order() {
        let a = from_list(10, &[0, 3]);
        let b = from_list(10, &[1, 2]);
        assert_eq!(a.cmp_members(&b), Ordering::Less);
        assert_eq!(a.cmp_numeric(&b), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn rotation_matches_pointwise(len in 1usize..300, shift in 0usize..600,
                                      seed in proptest::collection::vec(any::<bool>(), 300)) {
            let xs: Vec<usize> = (0..len).filter(|&i| seed[i]).collect();
            let src = from_list(len, &xs);
            let mut got = BitSet::new(len);
            got.or_rotated(&src, shift);
            let want = from_list(len, &xs.iter().map(|x| (x + shift) % len).collect::<Vec<_>>());
            prop_assert_eq!(got, want);
        }

        #[test]
        fn ones_round_trip(xs in proptest::collection::btree_set(0usize..500, 0..60)) {
            let s = from_list(500, &xs.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(s.ones().collect::<Vec<_>>(), xs.into_iter().collect::<Vec<_>>());
        }
    }
}
