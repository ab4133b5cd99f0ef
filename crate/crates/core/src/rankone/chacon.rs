use serde::Serialize;

use crate::arith::Bits;
use crate::error::{invalid, Error, Result};

/// Largest word index: `h_16 = (3^17 - 1)/2` is about 6.5e7 symbols.
pub const MAX_CHACON_INDEX: usize = 16;

/// `B_0 = 0`, `B_{k+1} = B_k B_k 1 B_k`; 1 marks a spacer level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaconWord {
    pub k: usize,
    pub word: Bits,
    /// Occurrences of the spacer added at the first stage (offset 2 in every `B_1`).
    pub first_spacer: Bits,
}

/// `h_k = (3^{k+1} - 1)/2`.
pub fn chacon_height(k: usize) -> usize {
    (3usize.pow(k as u32 + 1) - 1) / 2
}

pub fn chacon_word(k: usize) -> Result<ChaconWord> {
    if k > MAX_CHACON_INDEX {
        return Err(Error::Budget(format!("B_{k} exceeds the word budget (k <= {MAX_CHACON_INDEX})")));
    }
    let mut word = Bits::new(1);
    let mut first = Bits::new(1);
    for j in 0..k {
        let h = word.len();
        let mut w = Bits::new(3 * h + 1);
        let mut f = Bits::new(3 * h + 1);
        for off in [0, h, 2 * h + 1] {
            w.or_at(&word, off);
            f.or_at(&first, off);
        }
        w.set(2 * h, true);
        if j == 0 {
            f.set(2 * h, true);
        }
        word = w;
        first = f;
    }
    Ok(ChaconWord { k, word, first_spacer: first })
}

impl ChaconWord {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.word.count_ones()
    }

    pub fn to_string01(&self) -> String {
        self.word.to_string01()
    }

    pub fn rle(&self) -> String {
        rle(&self.word)
    }
}

fn check_indices(k: usize, m: usize) -> Result<()> {
    if m == 0 || m >= k {
        return invalid("need 1 <= m < k");
    }
    Ok(())
}

/// `T^{h_m - 1} A ∩ A = ∅` on `B_k` for `A` the first spacer level.
pub fn chacon_nonrecurrence_check(k: usize, m: usize) -> Result<bool> {
    check_indices(k, m)?;
    chacon_shift_check(k, chacon_height(m) - 1)
}

/// Whether the first-spacer occurrences in `B_k` and their shift by `shift` are disjoint.
pub fn chacon_shift_check(k: usize, shift: usize) -> Result<bool> {
    let w = chacon_word(k)?;
    Ok(w.first_spacer.shifted_and_count(&w.first_spacer, shift) == 0)
}

/// The same comparison over all 1s of `B_k` (every spacer level).
pub fn chacon_all_ones_check(k: usize, m: usize) -> Result<bool> {
    check_indices(k, m)?;
    let w = chacon_word(k)?;
    Ok(w.word.shifted_and_count(&w.word, chacon_height(m) - 1) == 0)
}

/// Run-length encoding: `0^2 1 0` for `0010`.
pub fn rle(bits: &Bits) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < bits.len() {
        let b = bits.get(i);
        let mut j = i;
        while j < bits.len() && bits.get(j) == b {
            j += 1;
        }
        let sym = if b { '1' } else { '0' };
        out.push(if j - i == 1 { sym.to_string() } else { format!("{sym}^{}", j - i) });
        i = j;
    }
    out.join(" ")
}

pub fn parse_rle(s: &str) -> Result<Bits> {
    let mut runs = Vec::new();
    for tok in s.split_whitespace() {
        let (sym, count) = match tok.split_once('^') {
            Some((a, c)) => (a, c.parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad run '{tok}'")))?),
            None => (tok, 1),
        };
        let bit = match sym {
            "0" => false,
            "1" => true,
            _ => return invalid(format!("bad symbol in run '{tok}'")),
        };
        runs.push((bit, count));
    }
    let len = runs.iter().map(|r| r.1).sum();
    let mut out = Bits::new(len);
    let mut at = 0;
    for (bit, count) in runs {
        if bit {
            (at..at + count).for_each(|i| out.set(i, true));
        }
        at += count;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChaconSummary {
    pub k: usize,
    pub length: usize,
    pub ones: usize,
    pub rle: String,
}

impl From<&ChaconWord> for ChaconSummary {
    fn from(w: &ChaconWord) -> Self {
        ChaconSummary { k: w.k, length: w.len(), ones: w.ones(), rle: w.rle() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// String recursion, independent of the bitset code.
    fn word_string(k: usize) -> String {
        let mut b = "0".to_string();
        for _ in 0..k {
            b = format!("{b}{b}1{b}");
        }
        b
    }

    #[test]
    fn first_words() {
        assert_eq!(chacon_word(0).unwrap().to_string01(), "0");
        assert_eq!(chacon_word(1).unwrap().to_string01(), "0010");
        let b2 = chacon_word(2).unwrap();
        assert_eq!(b2.to_string01(), "0010001010010");
        assert_eq!(b2.len(), 13);
        assert_eq!(b2.first_spacer.ones().collect::<Vec<_>>(), vec![2, 6, 11]);
        for k in 0..=9 {
            assert_eq!(chacon_word(k).unwrap().to_string01(), word_string(k));
        }
    }

    #[test]
    fn ones_count() {
        for k in 0..=12 {
            let w = chacon_word(k).unwrap();
            assert_eq!(w.len(), chacon_height(k));
            assert_eq!(w.ones(), (3usize.pow(k as u32) - 1) / 2);
        }
    }

    #[test]
    fn nonrecurrence_along_heights_minus_one() {
        for k in 2..=8 {
            for m in 1..k {
                assert!(chacon_nonrecurrence_check(k, m).unwrap(), "k={k} m={m}");
            }
        }
        // shifting by h_m instead finds returns
        assert!(!chacon_shift_check(3, chacon_height(1)).unwrap());
        // over all spacer levels the shift by h_1 - 1 = 3 already meets at 8 -> 11
        assert!(!chacon_all_ones_check(2, 1).unwrap());
        assert!(chacon_nonrecurrence_check(2, 2).is_err());
        assert!(chacon_word(17).is_err());
    }

    #[test]
    fn rle_format() {
        let w = chacon_word(1).unwrap();
        assert_eq!(w.rle(), "0^2 1 0");
        assert_eq!(parse_rle("0^2 1 0").unwrap(), w.word);
        assert!(parse_rle("2^3").is_err());
    }

    proptest! {
        #[test]
        fn rle_round_trip(k in 0usize..8) {
            let w = chacon_word(k).unwrap();
            prop_assert_eq!(parse_rle(&w.rle()).unwrap(), w.word);
        }
    }
}
