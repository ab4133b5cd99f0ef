use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use super::{CircleMeasure, FourierValue, Truncation};
use crate::error::{invalid, Result};
use crate::sequences::IntSequence;

/// `1 - Re nu^(n_m)` with its bracket.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub m: u64,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub n_m: BigUint,
    pub gap: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
}

impl GapPoint {
    fn new(m: u64, n_m: BigUint, v: &FourierValue) -> Self {
        let (gap_lower, gap_upper) = v.gap();
        GapPoint { m, n_m, gap: 1.0 - v.re, gap_lower, gap_upper }
    }
}

/// Gaps for `m` in `from..=to`. Raw values, no verdict.
pub fn rigidity_gap_profile(
    measure: &CircleMeasure,
    seq: &IntSequence,
    from: u64,
    to: u64,
    trunc: Truncation,
) -> Result<Vec<GapPoint>> {
    if from == 0 || to < from {
        return invalid("profile range must satisfy 1 <= from <= to");
    }
    let terms = seq.terms(to as usize)?;
    (from..=to)
        .map(|m| {
            let n = terms[m as usize - 1].clone();
            let v = measure.fourier(&BigInt::from(n.clone()), trunc.resolve(m)?)?;
            Ok(GapPoint::new(m, n, &v))
        })
        .collect()
}

/// `(1/(2N+1)) sum_{|n| <= N} |nu^(n)|^2`.
pub fn wiener_average(measure: &CircleMeasure, n_max: u64, k: Option<usize>) -> Result<f64> {
    let mut s = 1.0;
    for n in 1..=n_max {
        s += 2.0 * measure.fourier(&BigInt::from(n), k)?.value().norm_sqr();
    }
    Ok(s / (2 * n_max + 1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualGapPoint {
    pub m: u64,
    pub first: GapPoint,
    pub second: GapPoint,
}

/// Side-by-side gap profiles along two sequences, e.g. `2^m` and `2^m + 3^m`.
pub fn dual_gap_profile(
    measure: &CircleMeasure,
    first: &IntSequence,
    second: &IntSequence,
    from: u64,
    to: u64,
    trunc: Truncation,
) -> Result<Vec<DualGapPoint>> {
    let a = rigidity_gap_profile(measure, first, from, to, trunc)?;
    let b = rigidity_gap_profile(measure, second, from, to, trunc)?;
    Ok(a.into_iter().zip(b).map(|(first, second)| DualGapPoint { m: first.m, first, second }).collect())
}
