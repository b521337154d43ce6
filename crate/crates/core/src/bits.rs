//! Fixed-length packed bit rows.
//!
//! Bit `i` lives in word `i / 64` at position `63 - i % 64`, so comparing the
//! word vectors lexicographically is the same as comparing the rows as
//! `0`/`1` strings read left to right.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    len: usize,
    words: Box<[u64]>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0u64; len.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut row = BitRow::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    /// Parses a string of `0`/`1` characters. Returns `None` on any other character.
    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(BitRow::from_bools(bits))
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
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for row of length {}",
            self.len
        );
        let mask = 1u64 << (63 - i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Index of the first 1 bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.leading_zeros() as usize)
    }

    /// Bitwise AND of `a` and `b` written into `self`.
    pub fn assign_and(&mut self, a: &BitRow, b: &BitRow) {
        debug_assert!(self.len == a.len && a.len == b.len);
        for ((o, x), y) in self.words.iter_mut().zip(a.words.iter()).zip(b.words.iter()) {
            *o = x & y;
        }
    }

    /// Bitwise complement.
    pub fn not(&self) -> BitRow {
        BitRow::from_bools(self.iter().map(|b| !b))
    }

    /// Row restricted to the given positions, in the given order.
    pub fn project(&self, positions: &[usize]) -> BitRow {
        BitRow::from_bools(positions.iter().map(|&i| self.get(i)))
    }

    /// True iff `self[i] <= other[i]` for every position.
    pub fn is_subset_of(&self, other: &BitRow) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Display for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({self})")
    }
}

/// Iterates over all `k`-element subsets of `0..n` as ascending index vectors,
/// in lexicographic order.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // find rightmost position that can still move right
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_string_order() {
        let mut rows: Vec<BitRow> = ["110", "011", "000", "101", "100"]
            .iter()
            .map(|s| BitRow::parse(s).unwrap())
            .collect();
        rows.sort();
        let strs: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        assert_eq!(strs, ["000", "011", "100", "101", "110"]);
    }

    #[test]
    fn ordering_across_word_boundary() {
        let mut a = BitRow::zeros(130);
        let mut b = BitRow::zeros(130);
        a.set(129, true);
        b.set(64, true);
        assert!(a < b);
        assert_eq!(b.count_ones(), 1);
    }

    #[test]
    fn combinations_count_and_order() {
        let all: Vec<Vec<usize>> = Combinations::new(5, 3).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert_eq!(Combinations::new(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        assert_eq!(binomial(25, 3), 2300);
        assert_eq!(binomial(4, 5), 0);
    }

    #[test]
    fn first_one_and_and() {
        let a = BitRow::parse("0011").unwrap();
        let b = BitRow::parse("0110").unwrap();
        let mut c = BitRow::zeros(4);
        c.assign_and(&a, &b);
        assert_eq!(c.first_one(), Some(2));
        assert_eq!(BitRow::zeros(70).first_one(), None);
        let mut w = BitRow::zeros(130);
        w.set(100, true);
        assert_eq!(w.first_one(), Some(100));
        assert_eq!(a.not().to_string(), "1100");
    }

    #[test]
    fn subset_relation() {
        let a = BitRow::parse("0101").unwrap();
        let b = BitRow::parse("1101").unwrap();
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }
}
