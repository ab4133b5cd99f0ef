//! Strictly increasing big-integer sequences `(n_m)_{m >= 1}`.

mod report;

pub use report::{density, finite_sums, growth_report, min_gap as report_min_gap, GrowthReport, RatioStats};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rotation::{ContinuedFraction, Expansion};

/// Consecutive ratios `rho_{m+1} = n_{m+1}/n_m` of an integer-ratio product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RatioRule {
    Constant {
        ratio: u64,
    },
    /// `rho_{m+1} = start + step (m - 1)`.
    Arithmetic {
        start: u64,
        step: u64,
    },
    /// Finite list; the sequence ends when it runs out.
    List {
        ratios: Vec<u64>,
    },
}

impl RatioRule {
    /// Ratio `n_{m+1}/n_m` for `m >= 1`.
    pub fn ratio(&self, m: u64) -> Option<u64> {
        match self {
            RatioRule::Constant { ratio } => Some(*ratio),
            RatioRule::Arithmetic { start, step } => Some(start + step * (m - 1)),
            RatioRule::List { ratios } => ratios.get((m - 1) as usize).copied(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            RatioRule::Constant { ratio } => *ratio >= 2,
            RatioRule::Arithmetic { start, .. } => *start >= 2,
            RatioRule::List { ratios } => ratios.iter().all(|&r| r >= 2),
        };
        if ok {
            Ok(())
        } else {
            invalid("integer ratios must be >= 2")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntSequence {
    /// `a^m`.
    Powers { base: u64 },
    /// `a^{e(m)}` with `e(m) = sum_i exponent[i] m^i`, e.g. `2^{m^2}`.
    ExpPoly { base: u64, exponent: Vec<u64> },
    /// `n_1 = first`, `n_{m+1} = rho_{m+1} n_m`.
    IntegerRatioProduct {
        #[serde(with = "crate::arith::serde_big::nat", default = "one")]
        first: BigUint,
        ratios: RatioRule,
    },
    /// `p(m) = sum_i coeffs[i] m^i`.
    Polynomial { coeffs: Vec<i64> },
    /// `a^m + p(m)`.
    PerturbedPowers { base: u64, coeffs: Vec<i64> },
    /// `n_m = q_{m-1}`, the convergent denominators of alpha.
    #[serde(alias = "continued_fraction_denominators")]
    CfDenominators { alpha: ContinuedFraction },
    /// `(3^{m+1} - 1)/2 - 1`.
    ChaconHeightsMinusOne,
    Explicit {
        #[serde(with = "crate::arith::serde_big::nat_vec")]
        terms: Vec<BigUint>,
    },
    /// Sorted, deduplicated merge.
    Union { parts: Vec<IntSequence> },
    /// `n_m + offset`.
    Shifted { base: Box<IntSequence>, offset: i64 },
    /// `n_m = sum_i coeffs[i] n_{m-1-i}` after the initial terms.
    LinearRecurrence {
        coeffs: Vec<i64>,
        #[serde(with = "crate::arith::serde_big::nat_vec")]
        initial: Vec<BigUint>,
    },
}

fn one() -> BigUint {
    BigUint::one()
}

pub type TermIter<'a> = Box<dyn Iterator<Item = Result<BigUint>> + 'a>;

fn eval_poly(coeffs: &[i64], m: u64) -> BigInt {
    let mb = BigInt::from(m);
    coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * &mb + BigInt::from(c))
}

impl IntSequence {
    pub fn powers(base: u64) -> Self {
        IntSequence::Powers { base }
    }

    pub fn factorial() -> Self {
        IntSequence::IntegerRatioProduct { first: BigUint::one(), ratios: RatioRule::Arithmetic { start: 2, step: 1 } }
    }

    pub fn explicit(terms: Vec<BigUint>) -> Result<Self> {
        let s = IntSequence::Explicit { terms };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit_u64(terms: &[u64]) -> Result<Self> {
        Self::explicit(terms.iter().map(|&t| BigUint::from(t)).collect())
    }

    pub fn shifted(base: IntSequence, offset: i64) -> Self {
        IntSequence::Shifted { base: Box::new(base), offset }
    }

    pub fn union(parts: Vec<IntSequence>) -> Self {
        IntSequence::Union { parts }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: IntSequence = serde_json::from_str(s).map_err(|e| Error::Config(format!("sequence spec: {e}")))?;
        seq.validate()?;
        Ok(seq)
    }

    /// Eager parameter checks. Monotonicity of formula kinds is checked while generating.
    pub fn validate(&self) -> Result<()> {
        match self {
            IntSequence::Powers { base } | IntSequence::PerturbedPowers { base, .. } => {
                if *base < 2 {
                    return invalid(format!("base must be >= 2, got {base}"));
                }
            }
            IntSequence::ExpPoly { base, exponent } => {
                if *base < 2 || exponent.iter().skip(1).all(|&c| c == 0) {
                    return invalid("exp_poly needs base >= 2 and a nonconstant exponent");
                }
            }
            IntSequence::IntegerRatioProduct { first, ratios } => {
                if first.is_zero() {
                    return invalid("first term must be positive");
                }
                ratios.validate()?;
            }
            IntSequence::Polynomial { coeffs } => {
                if coeffs.iter().skip(1).all(|&c| c == 0) {
                    return invalid("polynomial must be nonconstant");
                }
            }
            IntSequence::CfDenominators { alpha } => alpha.validate()?,
            IntSequence::ChaconHeightsMinusOne => {}
            IntSequence::Explicit { terms } => {
                if terms.first().map(|t| t.is_zero()).unwrap_or(false) {
                    return invalid("explicit terms must be positive");
                }
                if let Some(i) = terms.windows(2).position(|w| w[1] <= w[0]) {
                    return invalid(format!("explicit list not strictly increasing at index {}", i + 2));
                }
            }
            IntSequence::Union { parts } => {
                if parts.is_empty() {
                    return invalid("union of no sequences");
                }
                for p in parts {
                    p.validate()?;
                }
            }
            IntSequence::Shifted { base, .. } => base.validate()?,
            IntSequence::LinearRecurrence { coeffs, initial } => {
                if coeffs.is_empty() || initial.len() != coeffs.len() {
                    return invalid("linear recurrence needs as many initial terms as coefficients");
                }
            }
        }
        Ok(())
    }

    /// Whether the sequence may repeat its first term once (q_0 = q_1 = 1 when a_1 = 1).
    fn allows_leading_repeat(&self) -> bool {
        matches!(self, IntSequence::CfDenominators { .. })
    }

    /// Terms `n_1, n_2, ...`, checked to be strictly increasing and positive.
    pub fn iter(&self) -> TermIter<'_> {
        let mut raw = self.raw_iter();
        let lead = self.allows_leading_repeat();
        let mut prev: Option<BigUint> = None;
        let mut idx = 0u64;
        let mut done = false;
        Box::new(std::iter::from_fn(move || {
            if done {
                return None;
            }
            let t = match raw.next()? {
                Ok(t) => t,
                Err(e) => {
                    done = true;
                    return Some(Err(e));
                }
            };
            idx += 1;
            let ok = !t.is_zero()
                && match &prev {
                    None => true,
                    Some(p) => &t > p || (lead && idx == 2 && &t == p),
                };
            if !ok {
                done = true;
                return Some(Err(Error::InvalidParameter(format!(
                    "sequence is not strictly increasing and positive at index {idx}"
                ))));
            }
            prev = Some(t.clone());
            Some(Ok(t))
        }))
    }

    fn raw_iter(&self) -> TermIter<'_> {
        fn closed<'a>(f: impl Fn(u64) -> Result<BigUint> + 'a) -> TermIter<'a> {
            Box::new((1u64..).map(f))
        }
        match self {
            IntSequence::Powers { base } => closed(move |m| Ok(BigUint::from(*base).pow(m as u32))),
            IntSequence::ExpPoly { base, exponent } => closed(move |m| {
                let e: u64 = exponent
                    .iter()
                    .rev()
                    .try_fold(0u64, |acc, &c| acc.checked_mul(m)?.checked_add(c))
                    .filter(|&e| e <= u32::MAX as u64)
                    .ok_or_else(|| Error::Budget(format!("exponent at m={m} too large")))?;
                Ok(BigUint::from(*base).pow(e as u32))
            }),
            IntSequence::IntegerRatioProduct { first, ratios } => {
                let mut cur: Option<BigUint> = None;
                let mut m = 0u64;
                Box::new(std::iter::from_fn(move || {
                    m += 1;
                    cur = match cur.take() {
                        None => Some(first.clone()),
                        Some(c) => Some(c * ratios.ratio(m - 1)?),
                    };
                    cur.clone().map(Ok)
                }))
            }
            IntSequence::Polynomial { coeffs } => closed(move |m| {
                eval_poly(coeffs, m)
                    .to_biguint()
                    .ok_or_else(|| Error::InvalidParameter(format!("polynomial negative at m={m}")))
            }),
            IntSequence::PerturbedPowers { base, coeffs } => closed(move |m| {
                (BigInt::from(*base).pow(m as u32) + eval_poly(coeffs, m))
                    .to_biguint()
                    .ok_or_else(|| Error::InvalidParameter(format!("perturbed power negative at m={m}")))
            }),
            IntSequence::CfDenominators { alpha } => {
                let mut e = Expansion::new(alpha.clone());
                Box::new((1u64..).map(move |m| e.q((m - 1) as usize)))
            }
            IntSequence::ChaconHeightsMinusOne => {
                closed(|m| Ok((BigUint::from(3u32).pow(m as u32 + 1) - 1u32) / 2u32 - 1u32))
            }
            IntSequence::Explicit { terms } => Box::new(terms.iter().cloned().map(Ok)),
            IntSequence::Union { parts } => {
                let mut its: Vec<std::iter::Peekable<TermIter<'_>>> =
                    parts.iter().map(|p| p.iter().peekable()).collect();
                let mut last: Option<BigUint> = None;
                Box::new(std::iter::from_fn(move || loop {
                    let mut best: Option<(usize, BigUint)> = None;
                    for (i, it) in its.iter_mut().enumerate() {
                        match it.peek() {
                            Some(Err(_)) => return it.next(),
                            Some(Ok(v)) if best.as_ref().is_none_or(|(_, b)| v < b) => {
                                best = Some((i, v.clone()));
                            }
                            _ => {}
                        }
                    }
                    let (i, v) = best?;
                    its[i].next();
                    if last.as_ref() == Some(&v) {
                        continue;
                    }
                    last = Some(v.clone());
                    return Some(Ok(v));
                }))
            }
            IntSequence::Shifted { base, offset } => {
                let off = BigInt::from(*offset);
                Box::new(base.iter().map(move |t| {
                    let v = BigInt::from(t?) + &off;
                    v.to_biguint()
                        .filter(|x| !x.is_zero())
                        .ok_or_else(|| Error::InvalidParameter("shifted term not positive".into()))
                }))
            }
            IntSequence::LinearRecurrence { coeffs, initial } => {
                let mut window: Vec<BigInt> = initial.iter().map(|t| BigInt::from(t.clone())).collect();
                let k = coeffs.len();
                let mut m = 0usize;
                Box::new(std::iter::from_fn(move || {
                    m += 1;
                    if m <= k {
                        return Some(Ok(initial[m - 1].clone()));
                    }
                    let next: BigInt =
                        coeffs.iter().enumerate().map(|(i, &c)| BigInt::from(c) * &window[window.len() - 1 - i]).sum();
                    window.remove(0);
                    window.push(next.clone());
                    Some(
                        next.to_biguint()
                            .ok_or_else(|| Error::InvalidParameter(format!("linear recurrence negative at m={m}"))),
                    )
                }))
            }
        }
    }
}

impl IntSequence {
    /// `n_m` for `m >= 1`.
    pub fn term(&self, m: u64) -> Result<BigUint> {
        if m == 0 {
            return invalid("terms are indexed from 1");
        }
        match self {
            IntSequence::Powers { base } => Ok(BigUint::from(*base).pow(m as u32)),
            IntSequence::ChaconHeightsMinusOne => Ok((BigUint::from(3u32).pow(m as u32 + 1) - 1u32) / 2u32 - 1u32),
            _ => {
                let mut it = self.iter();
                for _ in 1..m {
                    match it.next() {
                        Some(Ok(_)) => {}
                        Some(Err(e)) => return Err(e),
                        None => return invalid(format!("sequence has fewer than {m} terms")),
                    }
                }
                it.next().unwrap_or_else(|| invalid(format!("sequence has fewer than {m} terms")))
            }
        }
    }

    /// Up to `count` leading terms (fewer for a finite sequence).
    pub fn prefix(&self, count: usize) -> Result<Vec<BigUint>> {
        self.iter().take(count).collect()
    }

    /// Exactly `count` leading terms.
    pub fn terms(&self, count: usize) -> Result<Vec<BigUint>> {
        let v = self.prefix(count)?;
        if v.len() < count {
            return invalid(format!("sequence has only {} terms, {count} requested", v.len()));
        }
        Ok(v)
    }

    /// All terms `<= bound`, in order.
    pub fn terms_upto(&self, bound: &BigUint) -> Result<Vec<BigUint>> {
        let mut out = Vec::new();
        for t in self.iter() {
            let t = t?;
            if &t > bound {
                break;
            }
            out.push(t);
        }
        Ok(out)
    }

    /// Integer ratios `n_{m+1}/n_m` for `m < count`, if all exact.
    pub fn integer_ratios(&self, count: usize) -> Result<Option<Vec<u64>>> {
        let t = self.terms(count + 1)?;
        let mut out = Vec::with_capacity(count);
        for w in t.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Ok(None);
            }
            match (&w[1] / &w[0]).to_u64() {
                Some(r) => out.push(r),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}
