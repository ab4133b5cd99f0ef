use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sin_pi, u64_threshold, FourierValue};
use crate::arith;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightRule {
    /// `b_k = 1/(k+1)`.
    Harmonic,
    Constant {
        #[serde(with = "crate::arith::serde_big::rat")]
        b: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RieszFactor {
    #[serde(with = "crate::arith::serde_big::rat")]
    pub x: BigRational,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub b: BigRational,
}

/// Factors `1 - 2 a_k b_k (1 - cos 2 pi n x_k)`, `a_k = 1 - b_k`, `k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RieszFactors {
    /// `x_k = base^{-k}`, infinitely many factors.
    Geometric { base: u32, weights: WeightRule },
    /// A finite product.
    Explicit { factors: Vec<RieszFactor> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomBound {
    pub k: usize,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub exact: BigRational,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct RieszMeasure {
    factors: RieszFactors,
}

impl RieszMeasure {
    pub fn new(factors: RieszFactors) -> Result<Self> {
        let m = RieszMeasure { factors };
        match &m.factors {
            RieszFactors::Geometric { base, weights } => {
                if *base < 2 {
                    return invalid("riesz base must be at least 2");
                }
                if let WeightRule::Constant { b } = weights {
                    check_b(b)?;
                }
            }
            RieszFactors::Explicit { factors } => {
                if factors.is_empty() {
                    return invalid("riesz product needs at least one factor");
                }
                for f in factors {
                    check_b(&f.b)?;
                }
            }
        }
        Ok(m)
    }

    /// `x_k = 2^{-k}`, `b_k = 1/(k+1)`.
    pub fn dyadic_harmonic() -> Self {
        RieszMeasure::new(RieszFactors::Geometric { base: 2, weights: WeightRule::Harmonic }).expect("valid")
    }

    pub fn factors(&self) -> &RieszFactors {
        &self.factors
    }

    /// Number of factors, `None` when infinite.
    pub fn factor_count(&self) -> Option<usize> {
        match &self.factors {
            RieszFactors::Geometric { .. } => None,
            RieszFactors::Explicit { factors } => Some(factors.len()),
        }
    }

    /// `(x_k, b_k)` for `k >= 1`.
    pub fn factor(&self, k: usize) -> Result<(BigRational, BigRational)> {
        if k == 0 {
            return invalid("riesz factors are indexed from 1");
        }
        match &self.factors {
            RieszFactors::Geometric { base, weights } => {
                let x = BigRational::new(BigInt::one(), BigInt::from(*base).pow(k as u32));
                let b = match weights {
                    WeightRule::Harmonic => arith::rat(1, k as i64 + 1),
                    WeightRule::Constant { b } => b.clone(),
                };
                Ok((x, b))
            }
            RieszFactors::Explicit { factors } => factors
                .get(k - 1)
                .map(|f| (arith::frac(&f.x), f.b.clone()))
                .ok_or_else(|| Error::InvalidParameter(format!("only {} riesz factors", factors.len()))),
        }
    }

    /// `1 - 2ab(1 - cos 2 pi n x) = 1 - 4ab sin^2(pi n x)`.
    fn factor_value(&self, n: &BigInt, k: usize) -> Result<f64> {
        let (x, b) = self.factor(k)?;
        let ab = arith::rat_to_f64(&((BigRational::one() - &b) * &b));
        let t = match &self.factors {
            RieszFactors::Geometric { base, .. } => {
                let d = BigInt::from(*base).pow(k as u32);
                BigRational::new(n.mod_floor(&d), d)
            }
            RieszFactors::Explicit { .. } => arith::frac(&(BigRational::from_integer(n.clone()) * x)),
        };
        let s = sin_pi(&t);
        Ok(1.0 - 4.0 * ab * s * s)
    }

    /// `pi^2 n^2 base^{-2K} / (base^2 - 1)`: bound on the total deficit of all
    /// factors beyond `K` in the geometric family.
    fn geometric_tail(n: &BigInt, base: u32, k: usize) -> f64 {
        let num = BigRational::from_integer(n * n);
        let den = BigRational::from_integer(BigInt::from(base).pow(2 * k as u32) * BigInt::from(base * base - 1));
        9.8697 * arith::rat_to_f64(&(num / den))
    }

    fn auto_k(&self, n: &BigInt) -> usize {
        match &self.factors {
            RieszFactors::Geometric { base, .. } => {
                let mut k = 1;
                while Self::geometric_tail(n, *base, k) > 1e-8 {
                    k += 1;
                }
                k
            }
            RieszFactors::Explicit { factors } => factors.len(),
        }
    }

    pub fn fourier(&self, n: &BigInt, k: Option<usize>) -> Result<FourierValue> {
        let k = match k {
            Some(0) => return invalid("truncation K must be at least 1"),
            Some(k) => k,
            None => self.auto_k(n),
        };
        if let Some(len) = self.factor_count() {
            if k > len {
                return invalid(format!("K = {k} exceeds the {len} factors"));
            }
        }
        let mut prod = 1.0f64;
        for j in 1..=k {
            prod *= self.factor_value(n, j)?;
        }
        let slack = (k as f64 + 2.0) * 8.0 * f64::EPSILON;
        let tail_lower = match &self.factors {
            RieszFactors::Geometric { base, .. } => (1.0 - Self::geometric_tail(n, *base, k)).max(0.0),
            RieszFactors::Explicit { factors } => factors[k..]
                .iter()
                .map(|f| {
                    let ab = (BigRational::one() - &f.b) * &f.b;
                    arith::rat_to_f64(&(BigRational::one() - ab * BigRational::from_integer(4.into())))
                })
                .product(),
        };
        Ok(FourierValue {
            re: prod,
            im: 0.0,
            lower: (prod * tail_lower - slack).max(0.0),
            upper: (prod + slack).min(1.0),
        })
    }

    /// `3 prod_{k <= K} (a_k^2 + b_k^2)`, exact.
    pub fn atom_bound(&self, k: usize) -> Result<AtomBound> {
        if k == 0 {
            return invalid("atom bound needs K >= 1");
        }
        let mut p = BigRational::from_integer(3.into());
        for j in 1..=k {
            let (_, b) = self.factor(j)?;
            let a = BigRational::one() - &b;
            p *= &a * &a + &b * &b;
        }
        Ok(AtomBound { k, value: arith::rat_to_f64(&p), exact: p })
    }

    /// Sample from the product of the first `depth` factor measures; factor `k`
    /// puts mass `a^2 + b^2` at 0 and `ab` at each of `+x_k`, `-x_k`.
    pub fn sample(&self, count: usize, seed: u64, depth: usize) -> Result<Vec<BigRational>> {
        if depth == 0 {
            return invalid("sampling depth must be at least 1");
        }
        let mut laws = Vec::with_capacity(depth);
        for k in 1..=depth {
            let (x, b) = self.factor(k)?;
            let a = BigRational::one() - &b;
            let stay = &a * &a + &b * &b;
            let plus = &stay + &a * &b;
            laws.push((x, u64_threshold(&stay).unwrap_or(u64::MAX), u64_threshold(&plus).unwrap_or(u64::MAX)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| {
                let mut s = BigRational::zero();
                for (x, t0, t1) in &laws {
                    let u: u64 = rng.gen();
                    if u < *t0 {
                        continue;
                    } else if u < *t1 {
                        s += x;
                    } else {
                        s -= x;
                    }
                }
                arith::frac(&s)
            })
            .collect())
    }

    /// Exact Fourier coefficient of the truncated product for small `n` and the
    /// explicit family, as a complex number, by expanding all factor measures.
    /// Used to cross-check the product formula.
    pub fn expanded_fourier(&self, n: i64, k: usize) -> Result<Complex64> {
        let mut z = Complex64::new(1.0, 0.0);
        for j in 1..=k {
            let (x, b) = self.factor(j)?;
            let a = BigRational::one() - &b;
            let nx = BigRational::from_integer(n.into()) * &x;
            let ab = arith::rat_to_f64(&(&a * &b));
            let w = super::phase(&nx) * ab + super::phase(&-nx) * ab;
            z *= w + arith::rat_to_f64(&(&a * &a + &b * &b));
        }
        Ok(z)
    }
}

fn check_b(b: &BigRational) -> Result<()> {
    if !b.is_positive() || b > &arith::rat(1, 2) {
        return invalid("riesz weights need 0 < b <= 1/2");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn two_pow(m: u64) -> BigInt {
        BigInt::from(num_bigint::BigUint::one() << m as usize)
    }

    /// Direct oracle: the same product evaluated with the textbook formula in f64.
    fn oracle_gap(m: u32, k: usize) -> f64 {
        let mut p = 1.0f64;
        for j in 1..=k {
            let b = 1.0 / (j as f64 + 1.0);
            let a = 1.0 - b;
            let theta = if (j as u32) <= m { 0.0 } else { 2.0 * PI * 0.5f64.powi((j as u32 - m) as i32) };
            p *= 1.0 - 2.0 * a * b * (1.0 - theta.cos());
        }
        1.0 - p
    }

    #[test]
    fn dyadic_gap_bound() {
        let nu = RieszMeasure::dyadic_harmonic();
        for m in 5..=40u64 {
            let v = nu.fourier(&two_pow(m), Some(m as usize + 60)).unwrap();
            assert!(v.width() < 1e-6);
            let (_, gap_hi) = v.gap();
            assert!(gap_hi <= 2.0 * PI * PI / m as f64);
            assert!((1.0 - v.re - oracle_gap(m as u32, m as usize + 60)).abs() < 1e-9);
        }
    }

    #[test]
    fn shifted_powers_stay_away() {
        let nu = RieszMeasure::dyadic_harmonic();
        for m in 10..=40u64 {
            let v = nu.fourier(&(two_pow(m) + 1), Some(m as usize + 60)).unwrap();
            assert!(1.0 - v.upper >= 0.5);
        }
    }

    #[test]
    fn atom_bounds() {
        let nu = RieszMeasure::dyadic_harmonic();
        let one =
            RieszMeasure::new(RieszFactors::Explicit { factors: vec![RieszFactor { x: rat(1, 3), b: rat(1, 2) }] })
                .unwrap();
        assert_eq!(one.atom_bound(1).unwrap().exact, rat(3, 2));
        assert!(nu.atom_bound(200).unwrap().value < 0.1);
        let mut last = nu.atom_bound(1).unwrap().exact;
        for k in 2..60 {
            let b = nu.atom_bound(k).unwrap().exact;
            assert!(b < last);
            last = b;
        }
        let c = RieszMeasure::new(RieszFactors::Geometric { base: 3, weights: WeightRule::Constant { b: rat(1, 4) } })
            .unwrap();
        // 3 (1 - 2ab)^K with ab = 3/16
        assert_eq!(c.atom_bound(5).unwrap().exact, rat(3, 1) * rat(5, 8).pow(5));
    }

    #[test]
    fn auto_truncation_is_narrow() {
        let nu = RieszMeasure::dyadic_harmonic();
        for n in [1i64, 3, 1000, 123_456_789] {
            assert!(nu.fourier(&BigInt::from(n), None).unwrap().width() < 1e-6);
        }
    }

    #[test]
    fn explicit_tail_bracket() {
        let f = |x, b| RieszFactor { x: rat(1, x), b: rat(1, b) };
        let nu = RieszMeasure::new(RieszFactors::Explicit { factors: vec![f(3, 2), f(5, 3), f(7, 4)] }).unwrap();
        let full = nu.fourier(&BigInt::from(2), Some(3)).unwrap();
        let part = nu.fourier(&BigInt::from(2), Some(1)).unwrap();
        assert!(part.lower <= full.re && full.re <= part.upper);
        assert!(nu.fourier(&BigInt::from(2), Some(4)).is_err());
    }

    #[test]
    fn sampling_matches_low_coefficients() {
        let nu = RieszMeasure::dyadic_harmonic();
        let xs = nu.sample(20_000, 1, 20).unwrap();
        for n in [1i64, 2, 3] {
            let emp: f64 = xs.iter().map(|x| super::super::phase(&(x * rat(n, 1))).re).sum::<f64>() / xs.len() as f64;
            let exact = nu.fourier(&BigInt::from(n), Some(20)).unwrap().re;
            assert!((emp - exact).abs() < 0.03, "n={n}: {emp} vs {exact}");
        }
    }

    proptest! {
        #[test]
        fn product_matches_expansion(n in -200i64..200, k in 1usize..12) {
            let nu = RieszMeasure::dyadic_harmonic();
            let v = nu.fourier(&BigInt::from(n), Some(k)).unwrap();
            let z = nu.expanded_fourier(n, k).unwrap();
            prop_assert!((v.re - z.re).abs() < 1e-12 && z.im.abs() < 1e-12);
            prop_assert!(v.re >= 0.0 && v.re <= 1.0);
        }
    }
}
