//! Rigidity sequences for a rotation with growth `n_m <= C Psi(m)`.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::cf::{ContinuedFraction, Expansion};
use super::syndetic::{syndeticity_constant, SyndeticCertificate};
use crate::arith;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GrowthRule {
    /// `m * ceil(log2(m + 1))`.
    MLog2,
    /// `m * ceil(sqrt m)`.
    MSqrt,
    /// `m^2`.
    MSquared,
}

impl GrowthRule {
    pub fn psi(&self, m: u64) -> u64 {
        match self {
            GrowthRule::MLog2 => m * arith::ceil_log2(&BigUint::from(m + 1)),
            GrowthRule::MSqrt => {
                let r = (m as f64).sqrt() as u64;
                let r = (r.saturating_sub(2)..=r + 2).find(|x| x * x >= m).unwrap();
                m * r
            }
            GrowthRule::MSquared => m * m,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthLevel {
    pub level: u32,
    pub block_len: u64,
    pub blocks: u64,
    pub start: u64,
    pub emitted: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedGrowthSequence {
    pub alpha: ContinuedFraction,
    pub psi: GrowthRule,
    pub c: u64,
    pub terms: Vec<u64>,
    /// Level `L` used for each term (arc `||n alpha|| < 2^-(L+1)`).
    pub term_levels: Vec<u32>,
    pub levels: Vec<GrowthLevel>,
    pub syndetic: Vec<SyndeticCertificate>,
    /// `n_m <= C Psi(m)` for every emitted m.
    pub bound_holds: bool,
}

pub struct GrowthParams {
    pub l_max: u32,
    pub horizon: u64,
    pub max_terms: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams { l_max: 4, horizon: 1 << 20, max_terms: 100 }
    }
}

pub fn bounded_growth_rigidity_sequence(
    alpha: &ContinuedFraction,
    psi: &GrowthRule,
    params: &GrowthParams,
) -> Result<BoundedGrowthSequence> {
    if params.l_max == 0 || params.horizon < 2 || params.max_terms == 0 {
        return invalid("l_max, horizon and max_terms must be positive");
    }
    let h = params.horizon as usize;
    // theta(m) = min_{m <= j <= horizon} floor(Psi(j)/j); comparisons against integers are exact
    let mut theta = vec![0u64; h + 1];
    let mut run = u64::MAX;
    for j in (1..=h).rev() {
        let v = psi.psi(j as u64) / j as u64;
        if v == 0 {
            return invalid("growth rule must satisfy Psi(m) >= m");
        }
        run = run.min(v);
        theta[j] = run;
    }
    let mut syn = Vec::new();
    for s in 1..=params.l_max + 1 {
        let eps = BigRational::new(1.into(), (BigUint::from(1u32) << s as usize).into());
        syn.push(syndeticity_constant(alpha, &eps)?);
    }
    let n_of = |s: u32| syn[(s - 1) as usize].n;
    let c = n_of(1);
    let mut e = Expansion::new(alpha.clone());
    let mut terms = Vec::new();
    let mut term_levels = Vec::new();
    let mut levels = Vec::new();
    let mut start = 0u64;
    let mut prev_k = 0u64;
    for l in 1..=params.l_max {
        if terms.len() >= params.max_terms {
            break;
        }
        let need = n_of(l + 1);
        let from = (prev_k + 1).max(1) as usize;
        let k_l = (from..=h)
            .find(|&k| theta[k] >= need)
            .ok_or_else(|| Error::Budget(format!("theta normalization hits horizon {} at level {l}", params.horizon)))?
            as u64;
        let len = n_of(l);
        let thr = BigRational::new(1.into(), (BigUint::from(1u32) << (l + 1) as usize).into());
        let mut emitted = 0;
        for j in 0..k_l {
            if terms.len() >= params.max_terms {
                break;
            }
            let lo = start + j * len + 1;
            let hi = start + (j + 1) * len;
            let mut pick = None;
            for n in lo..=hi {
                if e.norm_below(&BigUint::from(n), &thr)? {
                    pick = Some(n);
                    break;
                }
            }
            let n = pick
                .ok_or_else(|| Error::Invariant(format!("syndetic scan failure: block [{lo}, {hi}] has no return")))?;
            terms.push(n);
            term_levels.push(l);
            emitted += 1;
        }
        levels.push(GrowthLevel { level: l, block_len: len, blocks: k_l, start, emitted });
        start += k_l * len;
        prev_k = k_l;
    }
    let bound_holds = terms.iter().enumerate().all(|(i, &n)| (n as u128) <= c as u128 * psi.psi(i as u64 + 1) as u128);
    Ok(BoundedGrowthSequence {
        alpha: alpha.clone(),
        psi: psi.clone(),
        c,
        terms,
        term_levels,
        levels,
        syndetic: syn,
        bound_holds,
    })
}

impl BoundedGrowthSequence {
    /// Minimum of `n_{m+1}/n_m` over the second half of the emitted terms.
    pub fn tail_min_ratio(&self) -> f64 {
        let t = &self.terms;
        (t.len() / 2..t.len().saturating_sub(1)).map(|i| t[i + 1] as f64 / t[i] as f64).fold(f64::INFINITY, f64::min)
    }

    pub fn as_sequence(&self) -> crate::sequences::IntSequence {
        crate::sequences::IntSequence::Explicit { terms: self.terms.iter().map(|&n| BigUint::from(n)).collect() }
    }

    /// Independent recheck of every arc condition with a float-free evaluator.
    pub fn recheck_arcs(&self) -> Result<bool> {
        let mut e = Expansion::new(self.alpha.clone());
        for (&n, &l) in self.terms.iter().zip(&self.term_levels) {
            let (_, hi) = e.norm_bracket(&BigUint::from(n), 64)?;
            let thr = BigRational::new(1.into(), (BigUint::from(1u32) << (l + 1) as usize).into());
            if hi >= thr {
                return Ok(false);
            }
        }
        Ok(self.terms.windows(2).all(|w| w[0] < w[1]) && self.terms.first().map(|&t| t >= 1).unwrap_or(true))
    }
}
