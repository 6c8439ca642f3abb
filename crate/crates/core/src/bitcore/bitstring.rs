use std::fmt;
use std::str::FromStr;

use super::rng::RngStream;

const WORD_BITS: usize = 64;

/// Fixed-length bit string packed into 64-bit words.
///
/// Bit `i` lives at `words[i / 64]`, bit `i % 64` (least significant bit
/// first), so "ascending position order" is ascending index order within
/// ascending words. Bits at positions `>= len` in the last word are kept at
/// zero; every mutating method preserves that invariant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitString {
            len,
            words: vec![!0u64; len.div_ceil(WORD_BITS)],
        };
        s.mask_tail();
        s
    }

    /// Uniformly random string; words are drawn from `rng` in ascending order.
    pub fn random(len: usize, rng: &mut RngStream) -> Self {
        let mut s = BitString {
            len,
            words: (0..len.div_ceil(WORD_BITS)).map(|_| rng.next_u64()).collect(),
        };
        s.mask_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        s
    }

    /// Builds a string of length `len <= 64` from the low bits of `word`.
    pub fn from_word(word: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS, "from_word supports up to 64 bits");
        let mut s = BitString { len, words: vec![word] };
        if len == 0 {
            s.words.clear();
        }
        s.mask_tail();
        s
    }

    /// Inverse of `from_word`; only valid for `len <= 64`.
    pub fn to_word(&self) -> u64 {
        assert!(self.len <= WORD_BITS, "to_word supports up to 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Length of the all-ones prefix: the largest `k` such that the first
    /// `k` bits are all one.
    #[inline]
    pub fn leading_ones(&self) -> u32 {
        for (w, &word) in self.words.iter().enumerate() {
            // Tail bits beyond `len` are zero, so they read as zeros of the
            // complement and terminate the scan at or before `len`.
            let zeros = !word;
            if zeros != 0 {
                let k = w * WORD_BITS + zeros.trailing_zeros() as usize;
                return k.min(self.len) as u32;
            }
        }
        self.len as u32
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Number of zero bits among positions `0..prefix`.
    pub fn zeros_in_prefix(&self, prefix: usize) -> u32 {
        assert!(prefix <= self.len);
        let mut ones = 0u32;
        let full = prefix / WORD_BITS;
        for &w in &self.words[..full] {
            ones += w.count_ones();
        }
        let rem = prefix % WORD_BITS;
        if rem > 0 {
            ones += (self.words[full] & ((1u64 << rem) - 1)).count_ones();
        }
        prefix as u32 - ones
    }

    pub fn is_all_ones(&self) -> bool {
        self.leading_ones() as usize == self.len
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(crate::Error::invalid(format!(
                        "bit strings contain only '0' and '1', found {c:?}"
                    )))
                }
            }
        }
        Ok(BitString::from_bits(&bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_ones_counts_the_all_ones_prefix() {
        for (s, expect) in [
            ("0", 0),
            ("1", 1),
            ("1101", 2),
            ("0111", 0),
            ("1111", 4),
            ("1110", 3),
        ] {
            let x: BitString = s.parse().unwrap();
            assert_eq!(x.leading_ones(), expect, "input {s}");
        }
    }

    #[test]
    fn leading_ones_crosses_word_boundaries() {
        for n in [63, 64, 65, 100, 128, 200] {
            let mut x = BitString::ones(n);
            assert_eq!(x.leading_ones() as usize, n);
            for k in [0, 1, n / 2, n - 1] {
                let mut y = x.clone();
                y.set(k, false);
                assert_eq!(y.leading_ones() as usize, k, "n={n} first zero at {k}");
            }
            x.set(n - 1, false);
            assert_eq!(x.leading_ones() as usize, n - 1);
        }
    }

    #[test]
    fn flip_and_get_round_trip() {
        let mut x = BitString::zeros(130);
        x.flip(0);
        x.flip(64);
        x.flip(129);
        assert!(x.get(0) && x.get(64) && x.get(129));
        assert_eq!(x.count_ones(), 3);
        x.flip(64);
        assert!(!x.get(64));
        assert_eq!(x.count_ones(), 2);
    }

    #[test]
    fn zeros_in_prefix_matches_naive_count() {
        let x: BitString = "110100111011010011101".parse().unwrap();
        for k in 0..=x.len() {
            let naive = (0..k).filter(|&i| !x.get(i)).count() as u32;
            assert_eq!(x.zeros_in_prefix(k), naive, "prefix {k}");
        }
    }

    #[test]
    fn word_round_trip() {
        let x = BitString::from_word(0b1011, 4);
        assert_eq!(x.to_string(), "1101");
        assert_eq!(x.to_word(), 0b1011);
        assert_eq!(BitString::from_word(!0u64, 4).to_word(), 0b1111);
    }

    #[test]
    fn random_strings_keep_tail_bits_zero() {
        let mut rng = RngStream::new(11);
        for n in [1, 7, 63, 65, 70] {
            let x = BitString::random(n, &mut rng);
            let total: u32 = x.words().iter().map(|w| w.count_ones()).sum();
            let in_range = (0..n).filter(|&i| x.get(i)).count() as u32;
            assert_eq!(total, in_range, "n={n}");
        }
    }

    #[test]
    fn display_and_parse_round_trip() {
        let s = "10110010100000111";
        let x: BitString = s.parse().unwrap();
        assert_eq!(x.to_string(), s);
        assert!("10x1".parse::<BitString>().is_err());
    }
}
