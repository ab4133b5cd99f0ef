//! Syndeticity of return times of an irrational rotation to a small arc.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::cf::{ContinuedFraction, Expansion};
use crate::arith;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyndeticCertificate {
    #[serde(with = "crate::arith::serde_big::rat")]
    pub eps: BigRational,
    /// Every window `[M+1, M+N]` inside the scanned horizon holds some `n`
    /// with `||n alpha|| < eps/2`.
    pub n: u64,
    pub method: String,
    /// Index `k` of the first denominator with `||q_k alpha|| < eps/4`.
    pub k: usize,
    pub horizon: u64,
    /// First few hits, for inspection.
    pub first_hits: Vec<u64>,
}

/// Hits `n in [from, to]` with `||n alpha|| < thr`, certified.
pub fn scan_hits(e: &mut Expansion, from: u64, to: u64, thr: &BigRational) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for n in from..=to {
        if e.compare_norm(&BigUint::from(n), thr)? == Ordering::Less {
            out.push(n);
        }
    }
    Ok(out)
}

/// Largest gap between consecutive hits, counting the gap from 0 to the first hit.
fn max_gap(hits: &[u64]) -> u64 {
    let mut prev = 0;
    let mut g = 0;
    for &h in hits {
        g = g.max(h - prev);
        prev = h;
    }
    g
}

pub fn syndeticity_constant(alpha: &ContinuedFraction, eps: &BigRational) -> Result<SyndeticCertificate> {
    let half = arith::rat(1, 2);
    if eps <= &BigRational::from_integer(0.into()) || eps > &half {
        return invalid("syndeticity needs 0 < eps <= 1/2");
    }
    let mut e = Expansion::new(alpha.clone());
    let quarter = eps / BigRational::from_integer(4.into());
    let mut k = 1;
    loop {
        let qk = e.q(k)?;
        if e.compare_norm(&qk, &quarter)? == Ordering::Less {
            break;
        }
        k += 1;
        if k > 10_000 {
            return Err(Error::Budget("no denominator reached eps/4".into()));
        }
    }
    let cycle = &e.q(k)? + &e.q(k + 1)?;
    let cycle = cycle
        .to_u64()
        .filter(|&c| c <= 50_000_000)
        .ok_or_else(|| Error::Budget("return cycle too long to scan".into()))?;
    let thr = eps / BigRational::from_integer(2.into());
    let mut horizon = cycle;
    let mut hits = scan_hits(&mut e, 1, horizon, &thr)?;
    loop {
        if hits.is_empty() {
            return Err(Error::Invariant("no return inside a full cycle".into()));
        }
        // close the last gap
        let mut n = horizon;
        loop {
            n += 1;
            if e.compare_norm(&BigUint::from(n), &thr)? == Ordering::Less {
                hits.push(n);
                break;
            }
        }
        horizon = n;
        let g = max_gap(&hits);
        let mut verdict = None;
        for extra in [0u32, 32, 64, 128] {
            verdict = arc_covered(&mut e, eps, g, extra)?;
            if verdict.is_some() {
                break;
            }
        }
        match verdict {
            Some(true) => {
                return Ok(SyndeticCertificate {
                    eps: eps.clone(),
                    n: g,
                    method: "scan-with-return-cover".into(),
                    k,
                    horizon,
                    first_hits: hits.iter().copied().take(16).collect(),
                })
            }
            Some(false) => {
                // a longer gap exists; scan further
                if horizon > 200_000_000 {
                    return Err(Error::Budget("syndeticity scan horizon exceeded".into()));
                }
                let more = scan_hits(&mut e, horizon + 1, 2 * horizon, &thr)?;
                hits.extend(more);
                horizon *= 2;
            }
            None => return Err(Error::Precision { required_bits: 256, context: "return cover".into() }),
        }
    }
}

/// Whether the arc `(-eps/2, eps/2)` is covered by its translates by `-r alpha`,
/// `1 <= r <= big_r`, i.e. whether every point of the arc returns within `big_r`
/// steps. `None` when the working precision cannot decide.
fn arc_covered(e: &mut Expansion, eps: &BigRational, big_r: u64, extra: u32) -> Result<Option<bool>> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let a = eps.numer().clone();
    let b = eps.denom().clone();
    let bound = (BigUint::from(8u32) * b.magnitude() * big_r) << extra as usize;
    let kk = e.index_above(&bound)?;
    let p = BigInt::from(e.p(kk)?);
    let q = BigInt::from(e.q(kk)?);
    // unit = 1 / (2 b q); positions exact up to 1/4 unit
    let scale = BigInt::from(2) * &b;
    let half_width = &a * &q;
    let lim: BigInt = BigInt::from(2) * &half_width + 2;
    let halfq = &q / 2;
    let mut ivs: Vec<BigInt> = Vec::new();
    for r in 1..=big_r {
        let mut c = (-(&p * r)).mod_floor(&q);
        if c > halfq {
            c -= &q;
        }
        let c = c * &scale;
        if c.magnitude() < lim.magnitude() {
            ivs.push(c);
        }
    }
    ivs.sort();
    let covers = |slack: i64| {
        let mut cur = -half_width.clone();
        for c in &ivs {
            let left = c - &half_width - slack;
            if left > cur {
                return false;
            }
            let right = c + &half_width + slack;
            if right > cur {
                cur = right;
            }
        }
        cur >= half_width
    };
    if covers(-1) {
        Ok(Some(true))
    } else if !covers(1) {
        Ok(Some(false))
    } else {
        Ok(None)
    }
}

impl SyndeticCertificate {
    /// Brute rescan over `horizon + windows * N`: every window of length N holds a hit.
    pub fn recheck(&self, alpha: &ContinuedFraction, windows: u64) -> Result<bool> {
        let mut e = Expansion::new(alpha.clone());
        let end = self.horizon + windows * self.n;
        let thr = &self.eps / BigRational::from_integer(2.into());
        let hits = scan_hits(&mut e, 1, end, &thr)?;
        let mut prev = 0;
        for &h in &hits {
            if h - prev > self.n {
                return Ok(false);
            }
            prev = h;
        }
        Ok(end - prev < self.n)
    }
}
