//! Fixed-length bitset with word-level shifted intersections.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_positions(len: usize, pos: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::new(len);
        for p in pos {
            b.set(p, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// 64 bits starting at bit `offset`; bits past the end read as zero.
    fn word_at(&self, offset: usize) -> u64 {
        let wi = offset / 64;
        let sh = offset % 64;
        let lo = self.words.get(wi).copied().unwrap_or(0);
        if sh == 0 {
            lo
        } else {
            let hi = self.words.get(wi + 1).copied().unwrap_or(0);
            (lo >> sh) | (hi << (64 - sh))
        }
    }

    /// OR `src` into `self` starting at bit `offset`.
    pub fn or_at(&mut self, src: &Bits, offset: usize) {
        assert!(offset + src.len <= self.len, "or_at overflows destination");
        let mut i = 0;
        while i < src.len {
            let take = (src.len - i).min(64);
            let mut w = src.word_at(i);
            if take < 64 {
                w &= (1u64 << take) - 1;
            }
            let dst = offset + i;
            let wi = dst / 64;
            let sh = dst % 64;
            self.words[wi] |= w << sh;
            if sh != 0 && wi + 1 < self.words.len() {
                self.words[wi + 1] |= w >> (64 - sh);
            }
            i += take;
        }
    }

    /// `#{p : self[p] and other[p + shift]}` over positions where both exist.
    pub fn shifted_and_count(&self, other: &Bits, shift: usize) -> usize {
        if shift >= other.len {
            return 0;
        }
        let n = self.len.min(other.len - shift);
        let mut total = 0usize;
        let mut i = 0;
        while i < n {
            let take = (n - i).min(64);
            let mut w = self.word_at(i) & other.word_at(i + shift);
            if take < 64 {
                w &= (1u64 << take) - 1;
            }
            total += w.count_ones() as usize;
            i += take;
        }
        total
    }

    /// Number of ones at positions `>= from`.
    pub fn count_ones_from(&self, from: usize) -> usize {
        if from >= self.len {
            return 0;
        }
        let mut total = 0usize;
        let mut i = from;
        while i < self.len {
            let take = (self.len - i).min(64);
            let mut w = self.word_at(i);
            if take < 64 {
                w &= (1u64 << take) - 1;
            }
            total += w.count_ones() as usize;
            i += take;
        }
        total
    }

    pub fn to_string01(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn shifted_and_matches_naive(a in proptest::collection::vec(any::<bool>(), 0..300),
                                     b in proptest::collection::vec(any::<bool>(), 0..300),
                                     shift in 0usize..320) {
            let ba = Bits::from_positions(a.len(), a.iter().enumerate().filter(|x| *x.1).map(|x| x.0));
            let bb = Bits::from_positions(b.len(), b.iter().enumerate().filter(|x| *x.1).map(|x| x.0));
            let naive = (0..a.len()).filter(|&p| a[p] && p + shift < b.len() && b[p + shift]).count();
            prop_assert_eq!(ba.shifted_and_count(&bb, shift), naive);
        }

        #[test]
        fn or_at_places_bits(a in proptest::collection::vec(any::<bool>(), 0..200), off in 0usize..150) {
            let src = Bits::from_positions(a.len(), a.iter().enumerate().filter(|x| *x.1).map(|x| x.0));
            let mut dst = Bits::new(a.len() + off + 7);
            dst.or_at(&src, off);
            for (i, &v) in a.iter().enumerate() {
                prop_assert_eq!(dst.get(i + off), v);
            }
            prop_assert_eq!(dst.count_ones(), src.count_ones());
            prop_assert_eq!(dst.count_ones_from(off), src.count_ones());
        }
    }

    #[test]
    fn ones_iterates_in_order() {
        let b = Bits::from_positions(130, [0, 63, 64, 129]);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(b.to_string01().len(), 130);
    }
}
