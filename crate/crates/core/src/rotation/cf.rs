//! Continued fractions of irrationals in (0, 1), convergents, certified `||n alpha||`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::arith::{self, floor_sum};
use crate::error::{invalid, Error, Result};

/// An irrational `alpha = [0; a_1, a_2, ...]`. The integer part is irrelevant for
/// rotations and is dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ContinuedFraction {
    /// `prefix` followed by `period` repeated forever (quadratic irrationals).
    Periodic { prefix: Vec<u64>, period: Vec<u64> },
    /// A finite certified prefix of an irrational; later quotients are unknown.
    Known { terms: Vec<u64> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CfRepr {
    Terms(Vec<u64>),
    Text(String),
    Tagged(CfTagged),
}

#[derive(Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum CfTagged {
    Periodic {
        #[serde(default)]
        prefix: Vec<u64>,
        period: Vec<u64>,
    },
    Known {
        terms: Vec<u64>,
    },
}

impl<'de> Deserialize<'de> for ContinuedFraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let cf = match CfRepr::deserialize(d)? {
            CfRepr::Terms(terms) => ContinuedFraction::Known { terms },
            CfRepr::Text(s) => ContinuedFraction::parse(&s).map_err(D::Error::custom)?,
            CfRepr::Tagged(CfTagged::Periodic { prefix, period }) => ContinuedFraction::Periodic { prefix, period },
            CfRepr::Tagged(CfTagged::Known { terms }) => ContinuedFraction::Known { terms },
        };
        cf.validate().map_err(D::Error::custom)?;
        Ok(cf)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    #[serde(with = "crate::arith::serde_big::nat")]
    pub p: BigUint,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub q: BigUint,
}

impl ContinuedFraction {
    /// `[0; 1, 1, 1, ...] = (sqrt 5 - 1)/2`.
    pub fn golden_mean() -> Self {
        ContinuedFraction::Periodic { prefix: vec![], period: vec![1] }
    }

    /// `[0; 2, 2, 2, ...] = sqrt 2 - 1`.
    pub fn sqrt2_minus_1() -> Self {
        ContinuedFraction::Periodic { prefix: vec![], period: vec![2] }
    }

    pub fn periodic(prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        let cf = ContinuedFraction::Periodic { prefix, period };
        cf.validate()?;
        Ok(cf)
    }

    /// Named constants ("golden", "sqrt2m1") or a decimal expansion.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "golden" | "golden_mean" => Ok(Self::golden_mean()),
            "sqrt2m1" | "silver" => Ok(Self::sqrt2_minus_1()),
            other => Self::from_decimal(other),
        }
    }

    /// Expand a decimal string `d.ddd` treating it as known to within one unit in
    /// the last digit. Partial quotients are kept only while both ends of that
    /// interval agree.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let x = arith::parse_rational(s)?;
        let digits = s.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
        let ulp = BigRational::new(BigInt::one(), num_traits::pow::pow(BigInt::from(10), digits));
        let x = arith::frac(&x);
        let mut lo = &x - &ulp;
        let mut hi = &x + &ulp;
        if lo <= BigRational::zero() || hi >= BigRational::one() {
            return invalid(format!("decimal '{s}' does not determine a point of (0,1)"));
        }
        let mut terms = Vec::new();
        loop {
            // alpha in [lo, hi] subset (0,1); 1/alpha in [1/hi, 1/lo]
            let a_lo = (BigRational::one() / &hi).floor();
            let a_hi = (BigRational::one() / &lo).floor();
            if a_lo != a_hi {
                break;
            }
            let a = a_lo.to_integer();
            let nlo = BigRational::one() / &hi - BigRational::from_integer(a.clone());
            let nhi = BigRational::one() / &lo - BigRational::from_integer(a.clone());
            let Some(a) = a.to_u64() else { break };
            terms.push(a);
            if nlo.is_zero() {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        if terms.is_empty() {
            return invalid(format!("decimal '{s}' too short to determine a_1"));
        }
        Ok(ContinuedFraction::Known { terms })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ContinuedFraction::Periodic { prefix, period } => {
                if period.is_empty() {
                    return invalid("periodic continued fraction needs a nonempty period");
                }
                if prefix.iter().chain(period).any(|&a| a == 0) {
                    return invalid("partial quotients must be positive");
                }
            }
            ContinuedFraction::Known { terms } => {
                if terms.is_empty() || terms.contains(&0) {
                    return invalid("known prefix must be nonempty with positive quotients");
                }
            }
        }
        Ok(())
    }

    /// `a_n` for `n >= 1`.
    pub fn partial_quotient(&self, n: usize) -> Result<u64> {
        if n == 0 {
            return invalid("partial quotients are indexed from 1");
        }
        match self {
            ContinuedFraction::Periodic { prefix, period } => {
                let i = n - 1;
                Ok(if i < prefix.len() { prefix[i] } else { period[(i - prefix.len()) % period.len()] })
            }
            ContinuedFraction::Known { terms } => terms.get(n - 1).copied().ok_or_else(|| Error::Precision {
                required_bits: 0,
                context: format!("partial quotient a_{n} is ambiguous: only {} quotients are determined", terms.len()),
            }),
        }
    }

    /// Convergents `(p_0, q_0), ..., (p_n, q_n)` with `p_0 = 0`, `q_0 = 1`.
    pub fn convergents(&self, n: usize) -> Result<Vec<Convergent>> {
        let mut e = Expansion::new(self.clone());
        e.ensure(n)?;
        Ok((0..=n).map(|k| Convergent { p: e.p[k].clone(), q: e.q[k].clone() }).collect())
    }

    pub fn convergent(&self, n: usize) -> Result<Convergent> {
        Ok(self.convergents(n)?.pop().expect("nonempty"))
    }
}

/// Lazily extended table of convergents, with certified evaluation of `||n alpha||`.
#[derive(Clone, Debug)]
pub struct Expansion {
    cf: ContinuedFraction,
    pub(crate) p: Vec<BigUint>,
    pub(crate) q: Vec<BigUint>,
}

impl Expansion {
    pub fn new(cf: ContinuedFraction) -> Self {
        Expansion { cf, p: vec![BigUint::zero()], q: vec![BigUint::one()] }
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn ensure(&mut self, n: usize) -> Result<()> {
        while self.q.len() <= n {
            let k = self.q.len();
            let a = BigUint::from(self.cf.partial_quotient(k)?);
            let (pk, qk) = if k == 1 {
                (BigUint::one(), a)
            } else {
                (&a * &self.p[k - 1] + &self.p[k - 2], &a * &self.q[k - 1] + &self.q[k - 2])
            };
            self.p.push(pk);
            self.q.push(qk);
        }
        Ok(())
    }

    pub fn p(&mut self, k: usize) -> Result<BigUint> {
        self.ensure(k)?;
        Ok(self.p[k].clone())
    }

    pub fn q(&mut self, k: usize) -> Result<BigUint> {
        self.ensure(k)?;
        Ok(self.q[k].clone())
    }

    /// Least `k` with `q_k > bound`.
    pub fn index_above(&mut self, bound: &BigUint) -> Result<usize> {
        let mut k = 0;
        loop {
            self.ensure(k)?;
            if &self.q[k] > bound {
                return Ok(k);
            }
            k += 1;
        }
    }

    /// Certified bracket `[lo, hi]` for `||n alpha||` using the first convergent
    /// with `q_k > 4 n 2^64 2^extra`.
    pub fn norm_bracket(&mut self, n: &BigUint, extra_bits: u32) -> Result<(BigRational, BigRational)> {
        let bound = (n * 4u32 + 1u32) << (64 + extra_bits as usize);
        let k = self.index_above(&bound)?;
        self.ensure(k + 1)?;
        let (p, q, q1) = (&self.p[k], &self.q[k], &self.q[k + 1]);
        let r = (n * p) % q;
        let d = std::cmp::min(r.clone(), q - &r);
        let approx = arith::rat_big(&d, q);
        let err = arith::rat_big(n, &(q * q1));
        let lo = if approx > err { &approx - &err } else { BigRational::zero() };
        Ok((lo, approx + err))
    }

    /// Certified comparison of `||n alpha||` with a rational threshold (`n >= 1`).
    pub fn compare_norm(&mut self, n: &BigUint, thr: &BigRational) -> Result<Ordering> {
        let mut extra = 0u32;
        loop {
            let (lo, hi) = self.norm_bracket(n, extra)?;
            if &hi < thr {
                return Ok(Ordering::Less);
            }
            if &lo > thr {
                return Ok(Ordering::Greater);
            }
            extra += 64;
            if extra > 1 << 14 {
                return Err(Error::Precision {
                    required_bits: extra as u64,
                    context: format!("cannot separate ||{n} alpha|| from {}", arith::fmt_rational(thr)),
                });
            }
        }
    }

    /// `||n alpha|| < thr`, certified.
    pub fn norm_below(&mut self, n: &BigUint, thr: &BigRational) -> Result<bool> {
        Ok(self.compare_norm(n, thr)? == Ordering::Less)
    }

    /// Exact `#{1 <= n <= m : ||n alpha|| <= delta}` for rational `0 < delta <= 1/2`,
    /// via floor sums bracketed by convergents on both sides of alpha.
    pub fn count_close_returns(&mut self, m: &BigUint, delta: &BigRational) -> Result<BigUint> {
        if m.is_zero() {
            return Ok(BigUint::zero());
        }
        let mut k = self.index_above(&(m << 40usize))?;
        let mi = BigInt::from(m.clone());
        let s = delta.numer().clone();
        let t = delta.denom().clone();
        for _ in 0..64 {
            self.ensure(k + 1)?;
            // convergents of even index lie below alpha, odd above
            let (lo_i, hi_i) = if k % 2 == 0 { (k, k + 1) } else { (k + 1, k) };
            let sum = |p: &BigUint, q: &BigUint, beta_num: &BigInt| -> BigInt {
                let p = BigInt::from(p.clone());
                let q = BigInt::from(q.clone());
                let a = &p * &t;
                floor_sum(&mi, &(&q * &t), &a, &(&a + beta_num * &q))
            };
            let neg = -&s;
            let (plo, qlo) = (&self.p[lo_i], &self.q[lo_i]);
            let (phi, qhi) = (&self.p[hi_i], &self.q[hi_i]);
            let lower = sum(plo, qlo, &s) - sum(phi, qhi, &neg);
            let upper = sum(phi, qhi, &s) - sum(plo, qlo, &neg);
            if lower == upper {
                return arith::nonneg(&lower).ok_or_else(|| Error::Invariant("negative return count".into()));
            }
            k += 2;
        }
        Err(Error::Precision {
            required_bits: self.q.last().map(|q| q.bits()).unwrap_or(0),
            context: "return count bracket did not close".into(),
        })
    }
}

/// `q_n ||q_n alpha|| <= 1`, checked exactly with a deeper convergent.
pub fn check_lac2(e: &mut Expansion, n: usize) -> Result<bool> {
    let qn = e.q(n)?;
    let pn = e.p(n)?;
    let k = e.index_above(&(&qn << 128usize))?.max(n + 2);
    let (pk, qk, qk1) = (e.p(k)?, e.q(k)?, e.q(k + 1)?);
    // |q_n alpha - p_n| <= |q_n p_k/q_k - p_n| + q_n/(q_k q_{k+1})
    let approx = (arith::rat_big(&(&qn * &pk), &qk) - BigRational::from_integer(BigInt::from(pn))).abs();
    let bound = approx + arith::rat_big(&qn, &(&qk * &qk1));
    Ok(BigRational::from_integer(BigInt::from(qn)) * bound <= BigRational::one())
}

/// `p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}`.
pub fn determinant_holds(e: &mut Expansion, n: usize) -> Result<bool> {
    if n == 0 {
        return Ok(true);
    }
    e.ensure(n)?;
    let lhs = BigInt::from(&e.p[n] * &e.q[n - 1]) - BigInt::from(&e.p[n - 1] * &e.q[n]);
    let rhs = if (n - 1).is_even() { BigInt::one() } else { -BigInt::one() };
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, rat};

    fn qs(cf: &ContinuedFraction, n: usize) -> Vec<u64> {
        cf.convergents(n).unwrap().iter().map(|c| c.q.to_u64().unwrap()).collect()
    }

    #[test]
    fn golden_and_silver_denominators() {
        assert_eq!(qs(&ContinuedFraction::golden_mean(), 6), vec![1, 1, 2, 3, 5, 8, 13]);
        assert_eq!(qs(&ContinuedFraction::sqrt2_minus_1(), 4), vec![1, 2, 5, 12, 29]);
    }

    #[test]
    fn decimal_input_stops_at_ambiguity() {
        let cf = ContinuedFraction::from_decimal("0.6180339887").unwrap();
        let ContinuedFraction::Known { terms } = &cf else { panic!() };
        assert!(terms.len() >= 8 && terms.iter().all(|&a| a == 1), "{terms:?}");
        let err = cf.partial_quotient(terms.len() + 1).unwrap_err();
        assert!(err.to_string().contains(&format!("a_{}", terms.len() + 1)));
    }

    #[test]
    fn json_forms() {
        let a: ContinuedFraction = serde_json::from_str("[1,2,3]").unwrap();
        assert_eq!(a, ContinuedFraction::Known { terms: vec![1, 2, 3] });
        let g: ContinuedFraction = serde_json::from_str("\"golden\"").unwrap();
        assert_eq!(g, ContinuedFraction::golden_mean());
        let p: ContinuedFraction = serde_json::from_str(r#"{"form":"periodic","period":[2]}"#).unwrap();
        assert_eq!(p, ContinuedFraction::sqrt2_minus_1());
        assert!(serde_json::from_str::<ContinuedFraction>("[0,1]").is_err());
    }

    #[test]
    fn norm_matches_float() {
        let mut e = Expansion::new(ContinuedFraction::golden_mean());
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        for n in 1..200u64 {
            let (lo, hi) = e.norm_bracket(&big(n), 0).unwrap();
            let x = n as f64 * alpha;
            let f = (x - x.round()).abs();
            assert!((arith::rat_to_f64(&lo) - f).abs() < 1e-12);
            assert!(hi > lo && &hi - &lo < rat(1, 1i64 << 60));
        }
    }

    #[test]
    fn return_counts_match_scan() {
        let mut e = Expansion::new(ContinuedFraction::golden_mean());
        let delta = rat(1, 16);
        let mut scan = 0u64;
        for n in 1..=3000u64 {
            if e.compare_norm(&big(n), &delta).unwrap() == Ordering::Less {
                scan += 1;
            }
            if n % 250 == 0 {
                assert_eq!(e.count_close_returns(&big(n), &delta).unwrap(), big(scan), "n={n}");
            }
        }
    }

    #[test]
    fn lac2_and_determinant() {
        for cf in [ContinuedFraction::golden_mean(), ContinuedFraction::sqrt2_minus_1()] {
            let mut e = Expansion::new(cf);
            for n in 0..=40 {
                assert!(check_lac2(&mut e, n).unwrap());
                assert!(determinant_holds(&mut e, n).unwrap());
            }
        }
    }
}
