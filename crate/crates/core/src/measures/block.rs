use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{phase, sin_pi, u64_threshold, FourierValue};
use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::sequences::IntSequence;

pub const DEFAULT_DIGITS: usize = 256;

/// Block lengths `|I_k|`, `k = 0, 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LengthRule {
    /// `|I_k| = start + step k`.
    Affine {
        start: u64,
        step: u64,
    },
    List {
        lengths: Vec<u64>,
    },
}

/// Block weights `eps_k`, `k = 0, 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EpsRule {
    /// `eps_k = 1/(k + offset)`.
    Harmonic { offset: u64 },
    List {
        #[serde(with = "crate::arith::serde_big::rat_vec")]
        values: Vec<BigRational>,
    },
}

/// Product measure on `x = sum_{m >= 1} b_m / n_m`, `0 <= b_m < n_m/n_{m-1}`,
/// with independent digit blocks `I_k = [N_k + 1, N_{k+1}]`: block `k` is all
/// zeros with probability `1 - eps_k`, otherwise uniform over nonzero words.
#[derive(Clone, Debug)]
pub struct BlockMeasure {
    lengths: LengthRule,
    eps: EpsRule,
    /// `n_0 = 1, n_1, ..., n_D`.
    n: Vec<BigUint>,
    /// `alphabet[m] = n_m / n_{m-1}`; index 0 unused.
    alphabet: Vec<u64>,
    /// `N_0 = 0 < N_1 < ... < N_B = D`.
    ends: Vec<usize>,
}

impl BlockMeasure {
    pub fn new(seq: &IntSequence, lengths: LengthRule, eps: EpsRule, digits: usize) -> Result<Self> {
        let mut ends = vec![0usize];
        let mut k = 0u64;
        let mut last_len = 0u64;
        loop {
            let len = match &lengths {
                LengthRule::Affine { start, step } => start.checked_add(step.checked_mul(k).unwrap_or(u64::MAX)),
                LengthRule::List { lengths } => lengths.get(k as usize).copied(),
            };
            let Some(len) = len else { break };
            if len == 0 || (k > 0 && len <= last_len) {
                return invalid("block lengths must be positive and strictly increasing");
            }
            let end = *ends.last().unwrap() + len as usize;
            if end > digits {
                break;
            }
            ends.push(end);
            last_len = len;
            k += 1;
        }
        if ends.len() < 3 {
            return invalid("fewer than two complete digit blocks fit in the digit budget");
        }
        let m = BlockMeasure { lengths, eps, n: Vec::new(), alphabet: Vec::new(), ends };
        for k in 0..m.blocks() {
            let e = m.eps(k)?;
            if !e.is_positive() || e > arith::rat(1, 2) {
                return invalid(format!("eps_{k} must lie in (0, 1/2]"));
            }
        }
        let d = *m.ends.last().unwrap();
        let terms = seq.terms(d)?;
        let mut n = vec![BigUint::one()];
        let mut alphabet = vec![0u64];
        for t in terms {
            let prev = n.last().unwrap();
            let (q, r) = t.div_rem(prev);
            match q.to_u64() {
                Some(a) if r.is_zero() && a >= 2 => alphabet.push(a),
                _ => return invalid(format!("ratio n_{} / n_{} is not an integer >= 2", n.len(), n.len() - 1)),
            }
            n.push(t);
        }
        Ok(BlockMeasure { n, alphabet, ..m })
    }

    /// `seq = powers(2)`, `|I_k| = k + 1`, `eps_k = 1/(k + 2)`.
    pub fn dyadic_default() -> Self {
        BlockMeasure::new(
            &IntSequence::powers(2),
            LengthRule::Affine { start: 1, step: 1 },
            EpsRule::Harmonic { offset: 2 },
            DEFAULT_DIGITS,
        )
        .expect("valid")
    }

    pub fn lengths(&self) -> &LengthRule {
        &self.lengths
    }

    /// Number of materialized digits `D`.
    pub fn digits(&self) -> usize {
        *self.ends.last().unwrap()
    }

    /// Number of complete blocks.
    pub fn blocks(&self) -> usize {
        self.ends.len() - 1
    }

    /// `N_k`.
    pub fn block_start(&self, k: usize) -> Result<usize> {
        self.ends
            .get(k)
            .copied()
            .ok_or_else(|| Error::Budget(format!("block {k} is beyond the {} materialized digits", self.digits())))
    }

    /// Digit indices `N_k + 1 ..= N_{k+1}`.
    pub fn block_range(&self, k: usize) -> Result<(usize, usize)> {
        Ok((self.block_start(k)? + 1, self.block_start(k + 1)?))
    }

    /// `k(M)` with `M` in `I_k`.
    pub fn block_of(&self, m: usize) -> Result<usize> {
        if m == 0 {
            return invalid("digits are indexed from 1");
        }
        (0..self.blocks())
            .find(|&k| self.ends[k] < m && m <= self.ends[k + 1])
            .ok_or_else(|| Error::Budget(format!("digit {m} is beyond the materialized digits")))
    }

    pub fn eps(&self, k: usize) -> Result<BigRational> {
        match &self.eps {
            EpsRule::Harmonic { offset } => {
                if k as u64 + offset == 0 {
                    return invalid("eps offset makes eps_0 undefined");
                }
                Ok(BigRational::new(BigInt::one(), BigInt::from(k as u64 + offset)))
            }
            EpsRule::List { values } => {
                values.get(k).cloned().ok_or_else(|| Error::InvalidParameter(format!("no eps_{k} given")))
            }
        }
    }

    /// Whether `sum eps_k` diverges (`None` for a finite list, which says nothing).
    pub fn eps_divergent(&self) -> Option<bool> {
        match &self.eps {
            EpsRule::Harmonic { .. } => Some(true),
            EpsRule::List { .. } => None,
        }
    }

    pub fn term(&self, m: usize) -> Result<&BigUint> {
        self.n.get(m).ok_or_else(|| Error::Budget(format!("n_{m} is beyond the materialized digits")))
    }

    /// `nu(D_k) = (1 - eps_k)(1 - eps_{k+1})`, `D_k` = digits zero on `I_k` and `I_{k+1}`.
    pub fn nu_d(&self, k: usize) -> Result<BigRational> {
        let one = BigRational::one();
        Ok((&one - self.eps(k)?) * (&one - self.eps(k + 1)?))
    }

    /// `2 n_M / n_{N_{k(M)+2}}`, an upper bound for `||n_M x||` on `D_{k(M)}`.
    /// For `n_m = 2^m` this is `2^{M+1} / 2^{N_{k(M)+2}}`.
    pub fn norm_bound(&self, m: usize) -> Result<BigRational> {
        let k = self.block_of(m)?;
        let top = self.block_start(k + 2)?;
        Ok(BigRational::new(BigInt::from(self.term(m)? * 2u32), BigInt::from(self.term(top)?.clone())))
    }

    /// `nu({0}) <= prod_{k < K} (1 - eps_k)`.
    pub fn zero_mass(&self, k_max: usize) -> Result<BigRational> {
        let one = BigRational::one();
        let mut p = one.clone();
        for k in 0..k_max {
            p *= &one - self.eps(k)?;
        }
        Ok(p)
    }

    /// `(1/a) sum_{b < a} e^{-2 pi i b theta}`, `theta = n / n_m`.
    fn digit_sum(&self, n: &BigInt, m: usize) -> Complex64 {
        let d = BigInt::from(self.n[m].clone());
        let r = n.mod_floor(&d);
        if r.is_zero() {
            return Complex64::new(1.0, 0.0);
        }
        let a = self.alphabet[m];
        // centre theta in (-1/2, 1/2] so small angles keep relative precision
        let r = if &r * 2 > d { r - &d } else { r };
        let theta = BigRational::new(r, d);
        let at = &theta * BigRational::from_integer(a.into());
        let ph = phase(&(&theta * BigRational::new(BigInt::from(a - 1), BigInt::from(2))));
        ph * (sin_pi(&at) / (a as f64 * sin_pi(&theta)))
    }

    fn block_factor(&self, n: &BigInt, k: usize) -> Result<Complex64> {
        let (lo, hi) = self.block_range(k)?;
        let mut s = Complex64::new(1.0, 0.0);
        for m in lo..=hi {
            s *= self.digit_sum(n, m);
        }
        let words = BigRational::new(BigInt::from(self.n[lo - 1].clone()), BigInt::from(self.n[hi].clone()));
        let r = arith::rat_to_f64(&words);
        let e = arith::rat_to_f64(&self.eps(k)?);
        Ok((1.0 - e) + (s - r) / (1.0 - r) * e)
    }

    /// Exact digit-law product up to the block holding the first `n_D >= |n| 2^64`;
    /// the dropped digits move `n x` by less than `|n| / n_D`.
    pub fn fourier(&self, n: &BigInt) -> Result<FourierValue> {
        if n.is_zero() {
            return Ok(FourierValue::one());
        }
        let need = n.magnitude().clone() << 64usize;
        let d = (1..=self.digits()).find(|&m| self.n[m] >= need).ok_or_else(|| Error::Precision {
            required_bits: arith::bitlen(&need),
            context: format!("block measure needs more than {} digits", self.digits()),
        })?;
        let last = self.block_of(d)?;
        let mut z = Complex64::new(1.0, 0.0);
        for k in 0..=last {
            z *= self.block_factor(n, k)?;
        }
        let top = self.block_start(last + 1)?;
        let tail = 2.0
            * std::f64::consts::PI
            * arith::rat_to_f64(&BigRational::new(
                BigInt::from(n.magnitude().clone()),
                BigInt::from(self.n[top].clone()),
            ));
        Ok(FourierValue::with_error(z, tail + (top as f64 + 4.0) * 16.0 * f64::EPSILON))
    }

    /// Digits `b_1 ..= b_depth` of independent samples.
    pub fn sample_digits(&self, count: usize, seed: u64, depth: usize) -> Result<Vec<Vec<u64>>> {
        if depth > self.digits() {
            return Err(Error::Budget(format!("sampling depth {depth} exceeds {} digits", self.digits())));
        }
        let mut cuts = Vec::new();
        for k in 0..self.blocks() {
            if self.ends[k] >= depth {
                break;
            }
            cuts.push((self.block_range(k)?, u64_threshold(&self.eps(k)?).unwrap_or(u64::MAX)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut digits = vec![0u64; self.ends[cuts.len()]];
            for &((lo, hi), t) in &cuts {
                let u: u64 = rng.gen();
                if u >= t {
                    continue;
                }
                loop {
                    let mut any = false;
                    for m in lo..=hi {
                        let b = rng.gen_range(0..self.alphabet[m]);
                        any |= b != 0;
                        digits[m - 1] = b;
                    }
                    if any {
                        break;
                    }
                }
            }
            digits.truncate(depth);
            out.push(digits);
        }
        Ok(out)
    }

    /// `x = sum b_m / n_m`.
    pub fn point(&self, digits: &[u64]) -> BigRational {
        let d = digits.len();
        let top = &self.n[d];
        let mut num = BigUint::zero();
        for (i, &b) in digits.iter().enumerate() {
            if b != 0 {
                num += top / &self.n[i + 1] * b;
            }
        }
        arith::rat_big(&num, top)
    }

    /// Whether the digits vanish on `I_k` and `I_{k+1}` (within the given depth).
    pub fn in_d(&self, digits: &[u64], k: usize) -> Result<bool> {
        let (lo, _) = self.block_range(k)?;
        let (_, hi) = self.block_range(k + 1)?;
        Ok((lo..=hi.min(digits.len())).all(|m| digits[m - 1] == 0))
    }

    /// `||n_M x||` for the point with these digits, exactly.
    pub fn norm_at(&self, digits: &[u64], m: usize) -> Result<BigRational> {
        let x = self.point(digits);
        Ok(arith::dist_to_int(&(x * BigRational::from_integer(BigInt::from(self.term(m)?.clone())))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;

    #[test]
    fn blocks_and_bounds() {
        let b = BlockMeasure::dyadic_default();
        assert_eq!(b.block_start(3).unwrap(), 6);
        assert_eq!(b.block_range(2).unwrap(), (4, 6));
        assert_eq!(b.block_of(5).unwrap(), 2);
        assert_eq!(b.nu_d(2).unwrap(), rat(3, 4) * rat(4, 5));
        // M = 5 in I_2 = [4, 6], N_4 = 10
        assert_eq!(b.norm_bound(5).unwrap(), rat(1 << 6, 1 << 10));
        let mut last = rat(1, 1);
        for k in 1..20 {
            let z = b.zero_mass(k).unwrap();
            assert!(z < last);
            last = z;
        }
        // prod_{k<K} (k+1)/(k+2) = 1/(K+1)
        assert_eq!(b.zero_mass(19).unwrap(), rat(1, 20));
        assert_eq!(b.eps_divergent(), Some(true));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = IntSequence::powers(2);
        let flat = LengthRule::Affine { start: 2, step: 0 };
        assert!(BlockMeasure::new(&p, flat, EpsRule::Harmonic { offset: 2 }, 64).is_err());
        let lin = LengthRule::Affine { start: 1, step: 1 };
        assert!(BlockMeasure::new(&p, lin.clone(), EpsRule::Harmonic { offset: 1 }, 64).is_err());
        let poly = IntSequence::Polynomial { coeffs: vec![0, 0, 1] };
        assert!(BlockMeasure::new(&poly, lin, EpsRule::Harmonic { offset: 2 }, 64).is_err());
    }

    /// Brute-force oracle: enumerate all digit words of the first few blocks of a
    /// small measure and sum the characters exactly.
    fn brute(b: &BlockMeasure, n: i64, blocks: usize) -> Complex64 {
        let d = b.block_start(blocks).unwrap();
        let mut words: Vec<(Vec<u64>, f64)> = vec![(vec![], 1.0)];
        for k in 0..blocks {
            let (lo, hi) = b.block_range(k).unwrap();
            let size: u64 = (lo..=hi).map(|m| b.alphabet[m]).product();
            let e = arith::rat_to_f64(&b.eps(k).unwrap());
            let mut next = Vec::new();
            for (w, p) in &words {
                for code in 0..size {
                    let mut c = code;
                    let mut ext = w.clone();
                    for m in lo..=hi {
                        ext.push(c % b.alphabet[m]);
                        c /= b.alphabet[m];
                    }
                    let q = if code == 0 { 1.0 - e } else { e / (size - 1) as f64 };
                    next.push((ext, p * q));
                }
            }
            words = next;
        }
        let _ = d;
        words.iter().map(|(w, p)| phase(&(b.point(w) * rat(n, 1))) * *p).sum()
    }

    #[test]
    fn fourier_matches_enumeration() {
        let seq = IntSequence::IntegerRatioProduct {
            first: BigUint::from(2u32),
            ratios: crate::sequences::RatioRule::List { ratios: vec![3, 2, 2, 3, 2] },
        };
        let b = BlockMeasure::new(
            &seq,
            LengthRule::Affine { start: 1, step: 1 },
            EpsRule::List { values: vec![rat(1, 2), rat(1, 3), rat(1, 5)] },
            6,
        )
        .unwrap();
        // here all digits fit in three blocks, so the measure is fully enumerated
        for n in [1i64, 2, 5, 7, 11, 36, -3] {
            let want = brute(&b, n, 3);
            let mut z = Complex64::new(1.0, 0.0);
            for k in 0..3 {
                z *= b.block_factor(&BigInt::from(n), k).unwrap();
            }
            assert!((z - want).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn monte_carlo_on_d() {
        let b = BlockMeasure::dyadic_default();
        let samples = b.sample_digits(20_000, 0, 40).unwrap();
        for m in [5usize, 10, 20] {
            let k = b.block_of(m).unwrap();
            let bound = b.norm_bound(m).unwrap();
            let mut good = 0;
            for s in &samples {
                let inside = b.in_d(s, k).unwrap();
                let ok = b.norm_at(s, m).unwrap() <= bound;
                assert!(!inside || ok);
                good += ok as usize;
            }
            let p = good as f64 / samples.len() as f64;
            assert!(p >= arith::rat_to_f64(&b.nu_d(k).unwrap()) - 0.01);
        }
    }

    proptest! {
        #[test]
        fn hermitian_and_bounded(n in 1i64..100_000) {
            let b = BlockMeasure::dyadic_default();
            let a = b.fourier(&BigInt::from(n)).unwrap();
            let c = b.fourier(&BigInt::from(-n)).unwrap();
            prop_assert!(a.value().norm() <= 1.0 + 1e-12);
            prop_assert!((a.value() - c.value().conj()).norm() < 1e-12, "{:?} {:?}", a, c);
            prop_assert!(a.lower <= a.re && a.re <= a.upper);
        }
    }
}
