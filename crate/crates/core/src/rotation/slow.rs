//! Rigidity sequences for a rotation whose density beats a prescribed rate
//! infinitely often.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cf::{ContinuedFraction, Expansion};
use crate::arith;
use crate::error::{invalid, Error, Result};

/// A decreasing rate `d_N -> 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DensityRule {
    /// `d_N = 1/ln(N + 2)`.
    InverseLog,
    /// `d_N = N^(-1/root)`.
    InverseRoot { root: u32 },
}

// ln 2 lies in [LN2_LO, LN2_HI]
const LN2_LO: (i64, i64) = (6931, 10000);
const LN2_HI: (i64, i64) = (6932, 10000);

impl DensityRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensityRule::InverseRoot { root } if *root < 1 => invalid("root must be >= 1"),
            _ => Ok(()),
        }
    }

    /// Some `N_k` with `d_N <= 4^-k` for every `N >= N_k`.
    pub fn threshold(&self, k: u32) -> BigUint {
        match self {
            DensityRule::InverseLog => {
                // ln(N+2) > b ln 2 >= b * 0.6931 >= 4^k once N >= 2^b
                let four_k = BigUint::from(4u32).pow(k);
                let b = arith::ceil_nat(&(arith::rat_big(&four_k, &BigUint::one()) / arith::rat(LN2_LO.0, LN2_LO.1)));
                BigUint::one() << b.to_usize().expect("threshold exponent fits usize")
            }
            DensityRule::InverseRoot { root } => BigUint::from(4u32).pow(k * root),
        }
    }

    /// Whether `count / n > d_n`, when decidable from the certified bounds.
    pub fn exceeds(&self, count: &BigUint, n: &BigUint) -> Option<bool> {
        match self {
            DensityRule::InverseLog => {
                // count * ln(n+2) > n ?
                let b = arith::bitlen(&(n + 2u32));
                let ln_lo = arith::rat(LN2_LO.0, LN2_LO.1) * BigRational::from_integer((b - 1).into());
                let ln_hi = arith::rat(LN2_HI.0, LN2_HI.1) * BigRational::from_integer(b.into());
                let c = arith::rat_big(count, &BigUint::one());
                let nn = arith::rat_big(n, &BigUint::one());
                if &c * ln_lo > nn {
                    Some(true)
                } else if c * ln_hi <= nn {
                    Some(false)
                } else {
                    None
                }
            }
            DensityRule::InverseRoot { root } => {
                let r = *root;
                Some(count.pow(r) > n.pow(r - 1))
            }
        }
    }

    /// Floating value of `d_n` for display.
    pub fn value_f64(&self, n: &BigUint) -> f64 {
        match self {
            DensityRule::InverseLog => {
                let b = arith::bitlen(&(n + 2u32)) as f64;
                1.0 / (b * std::f64::consts::LN_2)
            }
            DensityRule::InverseRoot { root } => {
                let ln_n = arith::bitlen(n) as f64 * std::f64::consts::LN_2;
                (-ln_n / *root as f64).exp()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowCheckpoint {
    pub k: u32,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub threshold: BigUint,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub m_k: BigUint,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub arc: BigRational,
    /// Hits in `(M_{k-1}, M_k]` added at this level.
    #[serde(with = "crate::arith::serde_big::nat")]
    pub added: BigUint,
    /// `#(sequence ∩ [1, M_k])`.
    #[serde(with = "crate::arith::serde_big::nat")]
    pub count: BigUint,
    pub m_k_bits: u64,
    pub density_f64: f64,
    pub rate_f64: f64,
    /// `D(M_k) >= 2^-k`, exact.
    pub density_at_least_arc: bool,
    /// `D(M_k) > d_{M_k}`, certified.
    pub beats_rate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowRigiditySequence {
    pub alpha: ContinuedFraction,
    pub rule: DensityRule,
    pub checkpoints: Vec<SlowCheckpoint>,
}

pub fn slow_rigidity_sequence(
    alpha: &ContinuedFraction,
    rule: &DensityRule,
    k_max: u32,
    max_doublings: u32,
) -> Result<SlowRigiditySequence> {
    rule.validate()?;
    if k_max == 0 {
        return invalid("k_max must be >= 1");
    }
    let mut e = Expansion::new(alpha.clone());
    let mut prev = BigUint::zero();
    let mut total = BigUint::zero();
    let mut checkpoints = Vec::new();
    for k in 1..=k_max {
        let arc = BigRational::new(1.into(), BigUint::from(2u32).pow(k).into());
        let nk = rule.threshold(k);
        let mut m = std::cmp::max(nk.clone(), &prev + 1u32);
        let mut found = None;
        for _ in 0..=max_doublings {
            let c = e.count_close_returns(&m, &arc)?;
            if (&c << k as usize) >= m {
                found = Some(c);
                break;
            }
            m <<= 1usize;
        }
        let Some(c) = found else {
            return Err(Error::Budget(format!("scan horizon exhausted before M_{k} was found")));
        };
        let before = e.count_close_returns(&prev, &arc)?;
        let added = &c - &before;
        total += &added;
        let at_least = (&total << k as usize) >= m;
        let beats = rule.exceeds(&total, &m);
        if !at_least || beats != Some(true) {
            return Err(Error::Invariant(format!(
                "checkpoint {k}: density verification failed (>= 2^-k: {at_least}, > d: {beats:?})"
            )));
        }
        checkpoints.push(SlowCheckpoint {
            k,
            threshold: nk,
            m_k: m.clone(),
            arc,
            added,
            count: total.clone(),
            m_k_bits: m.bits(),
            density_f64: arith::rat_to_f64(&arith::rat_big(&total, &m)),
            rate_f64: rule.value_f64(&m),
            density_at_least_arc: at_least,
            beats_rate: true,
        });
        prev = m;
    }
    Ok(SlowRigiditySequence { alpha: alpha.clone(), rule: rule.clone(), checkpoints })
}

impl SlowRigiditySequence {
    fn level_of(&self, n: &BigUint) -> Option<&SlowCheckpoint> {
        self.checkpoints.iter().find(|c| n <= &c.m_k)
    }

    /// Membership test, certified.
    pub fn contains(&self, n: &BigUint) -> Result<bool> {
        if n.is_zero() {
            return Ok(false);
        }
        let Some(c) = self.level_of(n) else { return Ok(false) };
        let mut e = Expansion::new(self.alpha.clone());
        Ok(e.compare_norm(n, &c.arc)? != Ordering::Greater)
    }

    /// The terms up to `limit` in increasing order, with the arc used for each.
    pub fn terms_upto(&self, limit: u64) -> Result<Vec<(u64, BigRational)>> {
        let mut e = Expansion::new(self.alpha.clone());
        let mut out = Vec::new();
        for n in 1..=limit {
            let nb = BigUint::from(n);
            let Some(c) = self.level_of(&nb) else { break };
            if e.compare_norm(&nb, &c.arc)? != Ordering::Greater {
                out.push((n, c.arc.clone()));
            }
        }
        Ok(out)
    }
}
