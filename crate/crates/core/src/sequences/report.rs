use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::IntSequence;
use crate::arith::{self, serde_big};
use crate::error::{invalid, Error, Result};

/// `D(N, n) = #({n_m} ∩ [1, N]) / N`, by enumeration.
pub fn density(seq: &IntSequence, n: &BigUint) -> Result<BigRational> {
    if n.is_zero() {
        return invalid("density needs N >= 1");
    }
    let mut terms = seq.terms_upto(n)?;
    terms.dedup();
    Ok(arith::rat_big(&BigUint::from(terms.len()), n))
}

/// All sums over nonempty subsets of `{n_lo, ..., n_hi}` that are `<= cap`.
pub fn finite_sums(seq: &IntSequence, lo: u64, hi: u64, cap: &BigUint, budget: usize) -> Result<Vec<BigUint>> {
    if lo == 0 || lo > hi {
        return invalid("finite_sums needs 1 <= lo <= hi");
    }
    let terms = seq.terms(hi as usize)?;
    let mut sums: BTreeSet<BigUint> = BTreeSet::new();
    for t in &terms[(lo - 1) as usize..] {
        let mut next: Vec<BigUint> = Vec::new();
        if t <= cap {
            next.push(t.clone());
        }
        for s in &sums {
            let v = s + t;
            if &v <= cap {
                next.push(v);
            }
        }
        sums.extend(next);
        if sums.len() > budget {
            return Err(Error::Budget(format!("finite_sums exceeded {budget} outputs")));
        }
    }
    Ok(sums.into_iter().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioStats {
    /// Smallest `n_{m+1}/n_m` over `1 <= m < 2M - 1`.
    #[serde(with = "serde_big::rat")]
    pub inf_ratio: BigRational,
    pub inf_ratio_f64: f64,
    /// Smallest ratio over the tail window; an estimate, not a limit.
    pub liminf_estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub horizon: u64,
    pub density_samples: Vec<(serde_big::Nat, serde_big::Rat)>,
    /// `min (n_{m+1} - n_m)` over the tail window `M - 1 <= m <= 2(M - 1)`.
    #[serde(with = "serde_big::nat")]
    pub min_tail_gap: BigUint,
    pub tail_window: (u64, u64),
    pub ratio_stats: RatioStats,
    pub sidon_constant: f64,
    /// True when `D(N) <= C log N / N` fails at some sampled N.
    pub sidon_density_flag: bool,
}

/// Minimum gap over `m in [from, to]` (1-based), clamped to the available terms.
pub fn min_gap(terms: &[BigUint], from: u64, to: u64) -> Option<(BigUint, u64, u64)> {
    let last = (terms.len() as u64).saturating_sub(1).min(to);
    if from == 0 || from > last {
        return None;
    }
    let g = (from..=last).map(|m| &terms[m as usize] - &terms[(m - 1) as usize]).min()?;
    Some((g, from, last))
}

pub fn growth_report(seq: &IntSequence, samples: &[BigUint], horizon: u64, sidon_c: f64) -> Result<GrowthReport> {
    if horizon < 2 {
        return invalid("growth_report needs horizon >= 2");
    }
    let terms = seq.prefix((2 * horizon) as usize)?;
    if terms.len() < 2 {
        return invalid("growth_report needs at least two terms");
    }
    let (gap, a, b) = min_gap(&terms, horizon - 1, 2 * (horizon - 1))
        .or_else(|| min_gap(&terms, 1, terms.len() as u64))
        .expect("two terms available");
    let ratio = |m: usize| arith::rat_big(&terms[m], &terms[m - 1]);
    let inf_ratio = (1..terms.len()).map(ratio).min().expect("nonempty");
    let liminf = (a as usize..=b as usize).map(|m| arith::rat_to_f64(&ratio(m))).fold(f64::INFINITY, f64::min);
    let mut density_samples = Vec::new();
    let mut sidon_flag = false;
    for n in samples {
        let d = density(seq, n)?;
        let nf = n.to_f64().unwrap_or(f64::MAX);
        let count = arith::rat_to_f64(&d) * nf;
        if nf > 1.0 && count > sidon_c * nf.ln() + 1e-9 {
            sidon_flag = true;
        }
        density_samples.push((serde_big::Nat(n.clone()), serde_big::Rat(d)));
    }
    Ok(GrowthReport {
        horizon,
        density_samples,
        min_tail_gap: gap,
        tail_window: (a, b),
        ratio_stats: RatioStats { inf_ratio_f64: arith::rat_to_f64(&inf_ratio), inf_ratio, liminf_estimate: liminf },
        sidon_constant: sidon_c,
        sidon_density_flag: sidon_flag,
    })
}
