//! Fixed-width packed binary codes and the Hamming distance between them.
//!
//! Bit `i` of a code lives in word `i / 64` at position `i % 64`
//! (little-endian within each word). Bits past `width` in the last word are
//! always zero, so word-wise comparison and popcount never see garbage.

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Number of 64-bit words needed to hold `width` bits.
#[inline]
pub fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitCode {
    words: Vec<u64>,
    width: usize,
}

impl BitCode {
    /// All-zero code of the given width.
    pub fn zeros(width: usize) -> Self {
        Self {
            words: vec![0; words_for(width)],
            width,
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut code = Self {
            words: vec![u64::MAX; words_for(width)],
            width,
        };
        code.clear_tail();
        code
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut width = 0;
        for bit in bits {
            if width % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1 << (width % WORD_BITS);
            }
            width += 1;
        }
        Self { words, width }
    }

    /// Builds a code from raw storage words. Fails if the word count does not
    /// match the width or any bit beyond `width` is set.
    pub fn from_words(words: Vec<u64>, width: usize) -> Result<Self> {
        if words.len() != words_for(width) {
            return Err(Error::InvalidParameter(format!(
                "{} words cannot hold a {width}-bit code",
                words.len()
            )));
        }
        let code = Self { words, width };
        if code.tail_mask().is_some_and(|m| code.words[code.words.len() - 1] & !m != 0) {
            return Err(Error::InvalidParameter(
                "bits set beyond code width".to_string(),
            ));
        }
        Ok(code)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        let mask = 1u64 << (i % WORD_BITS);
        let word = &mut self.words[i / WORD_BITS];
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Hamming distance without the width check. Callers must guarantee
    /// equal widths.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &BitCode) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    fn tail_mask(&self) -> Option<u64> {
        match self.width % WORD_BITS {
            0 => None,
            r => Some((1u64 << r) - 1),
        }
    }

    fn clear_tail(&mut self) {
        if let Some(mask) = self.tail_mask() {
            if let Some(last) = self.words.last_mut() {
                *last &= mask;
            }
        }
    }
}

impl std::fmt::Debug for BitCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitCode(")?;
        for bit in self.iter() {
            write!(f, "{}", bit as u8)?;
        }
        write!(f, ")")
    }
}

/// Number of bit positions where `a` and `b` differ.
pub fn hamming_distance(a: &BitCode, b: &BitCode) -> Result<u32> {
    if a.width != b.width {
        return Err(Error::WidthMismatch {
            left: a.width,
            right: b.width,
        });
    }
    Ok(a.distance_unchecked(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(s: &str) -> BitCode {
        BitCode::from_bits(s.chars().map(|c| c == '1'))
    }

    #[test]
    fn small_distance() {
        assert_eq!(hamming_distance(&code("1010"), &code("0110")).unwrap(), 2);
    }

    #[test]
    fn self_distance_is_zero() {
        let c = code("1101001");
        assert_eq!(hamming_distance(&c, &c).unwrap(), 0);
    }

    #[test]
    fn complement_distance() {
        let d = hamming_distance(&BitCode::zeros(256), &BitCode::ones(256)).unwrap();
        assert_eq!(d, 256);
    }

    #[test]
    fn width_mismatch_is_error() {
        let err = hamming_distance(&BitCode::zeros(4), &BitCode::zeros(5)).unwrap_err();
        assert!(matches!(err, Error::WidthMismatch { left: 4, right: 5 }));
    }

    #[test]
    fn little_endian_layout() {
        let c = code("1100");
        assert_eq!(c.words(), &[0b0011]);
        let mut c = BitCode::zeros(65);
        c.set(64, true);
        assert_eq!(c.words(), &[0, 1]);
    }

    #[test]
    fn ones_has_clean_tail() {
        let c = BitCode::ones(33);
        assert_eq!(c.words(), &[(1u64 << 33) - 1]);
        assert_eq!(c.count_ones(), 33);
    }

    #[test]
    fn from_words_rejects_dirty_tail() {
        assert!(BitCode::from_words(vec![1 << 5], 5).is_err());
        assert!(BitCode::from_words(vec![0, 0], 64).is_err());
        assert!(BitCode::from_words(vec![u64::MAX], 64).is_ok());
    }

    #[test]
    fn pack_unpack_round_trip() {
        for width in [1usize, 32, 33, 64, 1024] {
            let bits: Vec<bool> = (0..width).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
            let c = BitCode::from_bits(bits.iter().copied());
            assert_eq!(c.width(), width);
            assert_eq!(c.iter().collect::<Vec<_>>(), bits);
            let again = BitCode::from_words(c.words().to_vec(), width).unwrap();
            assert_eq!(again, c);
        }
    }

    fn codes(width: usize) -> impl Strategy<Value = BitCode> {
        proptest::collection::vec(any::<bool>(), width).prop_map(BitCode::from_bits)
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric(
            (a, b, c) in (1usize..200).prop_flat_map(|w| (codes(w), codes(w), codes(w)))
        ) {
            let ab = hamming_distance(&a, &b).unwrap();
            let ba = hamming_distance(&b, &a).unwrap();
            let bc = hamming_distance(&b, &c).unwrap();
            let ac = hamming_distance(&a, &c).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(ac <= ab + bc);
            let naive = a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() as u32;
            prop_assert_eq!(ab, naive);
        }
    }
}
