//! Finite obstructions to being a rigidity sequence: linear forms, Weyl sums,
//! small-norm partial sums, gap growth and sumset density.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, serde_big};
use crate::error::{invalid, Error, Result};
use crate::rotation::{ContinuedFraction, Expansion};
use crate::sequences::IntSequence;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearFormWitness {
    pub coefficients: Vec<i64>,
    #[serde(with = "serde_big::int")]
    pub d: BigInt,
    pub window_start: u64,
    pub window_len: u64,
    /// Re-verification at `2W` further positions.
    pub reverified: bool,
}

#[derive(Clone, Debug)]
pub struct SearchParams {
    pub k_max: usize,
    pub c_max: i64,
    pub start: u64,
    pub window: u64,
    /// Maximum number of coefficient vectors examined.
    pub candidate_budget: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { k_max: 4, c_max: 8, start: 1, window: 16, candidate_budget: 50_000_000 }
    }
}

fn form(c: &[i64], terms: &[BigInt], at: usize) -> BigInt {
    c.iter().enumerate().map(|(k, &ck)| &terms[at + k] * ck).sum()
}

/// Next vector in lexicographic order over `[-c, c]^K`; false when exhausted.
fn advance(v: &mut [i64], c: i64) -> bool {
    for i in (0..v.len()).rev() {
        if v[i] < c {
            v[i] += 1;
            return true;
        }
        v[i] = -c;
    }
    false
}

/// Smallest coefficient vector (by K, then max |c|, then lexicographic order) whose
/// linear form over consecutive terms is a nonzero constant on the window.
/// The sign is normalized so that `d > 0`.
pub fn differencing_obstruction(seq: &IntSequence, p: &SearchParams) -> Result<Option<LinearFormWitness>> {
    if p.k_max == 0 || p.k_max > 6 || p.c_max < 1 || p.c_max > 16 || p.window < 8 || p.start == 0 {
        return invalid("search needs 1 <= K_max <= 6, 1 <= C_max <= 16, W >= 8, M >= 1");
    }
    let need = (p.start - 1 + 3 * p.window) as usize + p.k_max;
    let terms: Vec<BigInt> = seq.prefix(need)?.into_iter().map(BigInt::from).collect();
    let base = (p.start - 1) as usize;
    if terms.len() < base + p.window as usize + p.k_max - 1 {
        return invalid("not enough terms for the requested window");
    }
    let mut examined = 0u64;
    for k in 1..=p.k_max {
        for cm in 1..=p.c_max {
            let mut v = vec![-cm; k];
            loop {
                let maxed = v.iter().any(|x| x.abs() == cm);
                if maxed && v[0] != 0 && v[k - 1] != 0 {
                    examined += 1;
                    if examined > p.candidate_budget {
                        return Err(Error::Budget(format!(
                            "linear-form search stopped after {} candidates (K = {k}, max|c| = {cm})",
                            p.candidate_budget
                        )));
                    }
                    let d = form(&v, &terms, base);
                    if !d.is_zero() && (1..p.window as usize).all(|j| form(&v, &terms, base + j) == d) {
                        let (coefficients, d) = if d.is_negative() {
                            (v.iter().map(|x| -x).collect::<Vec<_>>(), -d)
                        } else {
                            (v.clone(), d)
                        };
                        let end = base + p.window as usize;
                        let extra: Vec<usize> =
                            (end..end + 2 * p.window as usize).filter(|&j| j + k <= terms.len()).collect();
                        let reverified = extra.len() == 2 * p.window as usize
                            && extra.iter().all(|&j| form(&coefficients, &terms, j) == d);
                        return Ok(Some(LinearFormWitness {
                            coefficients,
                            d,
                            window_start: p.start,
                            window_len: p.window,
                            reverified,
                        }));
                    }
                }
                if !advance(&mut v, cm) {
                    break;
                }
            }
        }
    }
    Ok(None)
}

/// `sum_k c_k n_{m+k-1}` for `m = 1..=count`; e.g. `(-2, 1)` gives `n_{m+1} - 2 n_m`.
pub fn derived_sequence(seq: &IntSequence, coeffs: &[i64], count: usize) -> Result<Vec<BigInt>> {
    if coeffs.is_empty() {
        return invalid("derived sequence needs coefficients");
    }
    let terms: Vec<BigInt> = seq.terms(count + coeffs.len() - 1)?.into_iter().map(BigInt::from).collect();
    Ok((0..count).map(|m| form(coeffs, &terms, m)).collect())
}

/// `e^{2 pi i t}` with exact values at multiples of 1/4.
pub fn unit_root(t: &BigRational) -> Complex64 {
    let f = arith::frac(t);
    let four = &f * BigRational::from_integer(4.into());
    if four.is_integer() {
        return match four.to_integer().to_u8() {
            Some(0) => Complex64::new(1.0, 0.0),
            Some(1) => Complex64::new(0.0, 1.0),
            Some(2) => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let a = 2.0 * std::f64::consts::PI * arith::rat_to_f64(&f);
    Complex64::new(a.cos(), a.sin())
}

/// `(1/M) sum_{m <= M} e^{2 pi i n_m x}` with exact phase reduction.
pub fn weyl_average(terms: &[BigUint], x: &BigRational) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for n in terms {
        s += unit_root(&(x * BigRational::from_integer(BigInt::from(n.clone()))));
    }
    s / terms.len() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylProfile {
    pub horizon: u64,
    pub seed: u64,
    pub precision_bits: u64,
    /// Sample points as exact dyadic rationals "p/q".
    pub points: Vec<serde_big::Rat>,
    pub averages: Vec<(f64, f64)>,
    pub max_abs: f64,
    pub threshold: f64,
    pub equidistribution_evidence: bool,
}

pub fn weyl_profile(
    seq: &IntSequence,
    samples: usize,
    seed: u64,
    horizon: u64,
    threshold: f64,
    precision_bits: Option<u64>,
) -> Result<WeylProfile> {
    if horizon == 0 || samples == 0 {
        return invalid("weyl_profile needs M >= 1 and at least one sample");
    }
    let terms = seq.terms(horizon as usize)?;
    let required = arith::bitlen(terms.last().expect("nonempty")) + 64;
    let bits = precision_bits.unwrap_or(required);
    if bits < required {
        return Err(Error::Precision { required_bits: required, context: format!("Weyl sums up to n_{horizon}") });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = BigUint::one() << bits as usize;
    let mut points = Vec::with_capacity(samples);
    let mut averages = Vec::with_capacity(samples);
    let mut max_abs = 0f64;
    for _ in 0..samples {
        let x = rng.gen_biguint(bits);
        let xr = arith::rat_big(&x, &den);
        let avg = weyl_average(&terms, &xr);
        max_abs = max_abs.max(avg.norm());
        averages.push((avg.re, avg.im));
        points.push(serde_big::Rat(xr));
    }
    Ok(WeylProfile {
        horizon,
        seed,
        precision_bits: bits,
        points,
        averages,
        max_abs,
        threshold,
        equidistribution_evidence: max_abs < threshold,
    })
}

/// A real number given exactly, as a fixed-point approximation, or by its continued fraction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RealInput {
    Rational {
        #[serde(with = "serde_big::rat")]
        value: BigRational,
    },
    /// `mantissa / 2^frac_bits`, accurate to `2^-frac_bits`.
    Fixed {
        #[serde(with = "serde_big::nat")]
        mantissa: BigUint,
        frac_bits: u64,
    },
    Cf {
        alpha: ContinuedFraction,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSum {
    pub horizon: u64,
    #[serde(with = "serde_big::rat")]
    pub value: BigRational,
    pub value_f64: f64,
    /// `|true sum - value| <= error_bound`.
    #[serde(with = "serde_big::rat")]
    pub error_bound: BigRational,
}

/// `sum_{m <= M} ||n_m x||`.
pub fn abs_norm_partial_sum(seq: &IntSequence, x: &RealInput, horizon: u64) -> Result<PartialSum> {
    let terms = seq.terms(horizon as usize)?;
    let mut value = BigRational::zero();
    let mut err = BigRational::zero();
    match x {
        RealInput::Rational { value: v } => {
            for n in &terms {
                value += arith::dist_to_int(&(v * BigRational::from_integer(BigInt::from(n.clone()))));
            }
        }
        RealInput::Fixed { mantissa, frac_bits } => {
            let required = arith::bitlen(terms.last().expect("nonempty")) + 64;
            if *frac_bits < required {
                return Err(Error::Precision {
                    required_bits: required,
                    context: format!("||n_m x|| up to m = {horizon}"),
                });
            }
            let den = BigUint::one() << *frac_bits as usize;
            let v = arith::rat_big(mantissa, &den);
            for n in &terms {
                value += arith::dist_to_int(&(&v * BigRational::from_integer(BigInt::from(n.clone()))));
                err += arith::rat_big(n, &den);
            }
        }
        RealInput::Cf { alpha } => {
            let mut e = Expansion::new(alpha.clone());
            for n in &terms {
                let (lo, hi) = e.norm_bracket(n, 0)?;
                let mid = (&lo + &hi) / BigRational::from_integer(2.into());
                err += (&hi - &lo) / BigRational::from_integer(2.into());
                value += mid;
            }
        }
    }
    Ok(PartialSum { horizon, value_f64: arith::rat_to_f64(&value), value, error_bound: err })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapDivergence {
    pub diverging: bool,
    #[serde(with = "serde_big::nat")]
    pub min_tail_gap: BigUint,
    /// `(M, min gap over the tail window at M)` at `M = H/4, H/2, H`.
    pub checkpoints: Vec<(u64, serde_big::Nat)>,
}

/// Evidence that gaps tend to infinity: the tail-window minimum gap strictly
/// increases across three scales of the horizon.
pub fn gap_divergence(seq: &IntSequence, horizon: u64) -> Result<GapDivergence> {
    if horizon < 4 {
        return invalid("gap_divergence needs horizon >= 4");
    }
    let terms = seq.prefix((2 * horizon) as usize)?;
    let mut checkpoints = Vec::new();
    for m in [horizon.div_ceil(4).max(2), horizon.div_ceil(2), horizon] {
        let (g, _, _) = crate::sequences::report_min_gap(&terms, m - 1, 2 * (m - 1))
            .ok_or_else(|| Error::InvalidParameter("sequence too short for gap evidence".into()))?;
        checkpoints.push((m, serde_big::Nat(g)));
    }
    let diverging = checkpoints.windows(2).all(|w| w[0].1 .0 < w[1].1 .0);
    Ok(GapDivergence {
        diverging,
        min_tail_gap: checkpoints.last().expect("three checkpoints").1 .0.clone(),
        checkpoints,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SumsetProbe {
    pub coefficients: Vec<i64>,
    pub n: u64,
    pub count: u64,
    #[serde(with = "serde_big::rat")]
    pub density: BigRational,
    pub contains_zero: bool,
    /// Elements other than 0, for nonzero-constant reporting.
    pub nonzero_count: u64,
    pub terms_used: usize,
    /// Mixed-sign probes enumerate a finite term range and are lower bounds.
    pub lower_bound: bool,
}

/// `#((c_1 A + ... + c_L A) ∩ [-N, N]) / (2N + 1)`.
pub fn sumset_density_probe(seq: &IntSequence, coeffs: &[i64], n: u64, budget: u64) -> Result<SumsetProbe> {
    if coeffs.is_empty() || coeffs.len() > 3 || coeffs.contains(&0) || n == 0 {
        return invalid("sumset probe needs 1 to 3 nonzero coefficients and N >= 1");
    }
    let mixed = coeffs.iter().any(|&c| c > 0) && coeffs.iter().any(|&c| c < 0);
    let total: u64 = coeffs.iter().map(|c| c.unsigned_abs()).sum();
    let terms: Vec<BigUint> = if mixed {
        let reach = BigUint::from(total) * n;
        let mut out: Vec<BigUint> = Vec::new();
        for t in seq.iter() {
            let t = t?;
            let stop = out.last().map(|p| &t - p > reach && t > reach).unwrap_or(false);
            out.push(t);
            if stop || out.len() as u64 > budget {
                break;
            }
        }
        out
    } else {
        let minc = coeffs.iter().map(|c| c.unsigned_abs()).min().expect("nonempty");
        seq.terms_upto(&BigUint::from(n / minc))?
    };
    let work = (terms.len() as u64).saturating_pow(coeffs.len() as u32);
    if work > budget {
        return Err(Error::Budget(format!("sumset enumeration needs {work} steps, budget {budget}")));
    }
    let t: Vec<BigInt> = terms.iter().map(|x| BigInt::from(x.clone())).collect();
    let lim = BigInt::from(n);
    let mut set: BTreeSet<i64> = BTreeSet::new();
    let mut idx = vec![0usize; coeffs.len()];
    if !t.is_empty() {
        loop {
            let s: BigInt = idx.iter().zip(coeffs).map(|(&i, &c)| &t[i] * c).sum();
            if s.abs() <= lim {
                set.insert(s.to_i64().expect("bounded by N"));
            }
            let mut j = coeffs.len();
            let mut done = true;
            while j > 0 {
                j -= 1;
                idx[j] += 1;
                if idx[j] < t.len() {
                    done = false;
                    break;
                }
                idx[j] = 0;
            }
            if done {
                break;
            }
        }
    }
    let count = set.len() as u64;
    let contains_zero = set.contains(&0);
    Ok(SumsetProbe {
        coefficients: coeffs.to_vec(),
        n,
        count,
        density: BigRational::new(count.into(), (2 * n + 1).into()),
        contains_zero,
        nonzero_count: count - contains_zero as u64,
        terms_used: t.len(),
        lower_bound: mixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, rat};
    use proptest::prelude::*;

    fn witness(seq: &IntSequence) -> Option<(Vec<i64>, i64)> {
        differencing_obstruction(seq, &SearchParams::default())
            .unwrap()
            .map(|w| (w.coefficients, w.d.to_i64().unwrap()))
    }

    #[test]
    fn hand_witnesses() {
        let s = IntSequence::shifted(IntSequence::powers(2), 1);
        assert_eq!(witness(&s), Some((vec![2, -1], 1)));
        let s = IntSequence::PerturbedPowers { base: 2, coeffs: vec![0, 1] };
        assert_eq!(witness(&s), Some((vec![-2, 3, -1], 1)));
        let s = IntSequence::Polynomial { coeffs: vec![0, 0, 1] };
        assert_eq!(witness(&s), Some((vec![1, -2, 1], 2)));
        assert_eq!(witness(&IntSequence::powers(2)), None);
    }

    #[test]
    fn witness_reverifies() {
        let s = IntSequence::Polynomial { coeffs: vec![1, 0, 1] };
        let w = differencing_obstruction(&s, &SearchParams::default()).unwrap().unwrap();
        assert!(w.reverified);
    }

    #[test]
    fn budget_error() {
        let p = SearchParams { k_max: 6, c_max: 16, candidate_budget: 1000, ..Default::default() };
        let e = differencing_obstruction(&IntSequence::powers(3), &p).unwrap_err();
        assert!(matches!(e, Error::Budget(_)));
    }

    #[test]
    fn weyl_exact_cases() {
        let t = IntSequence::powers(3).terms(20).unwrap();
        assert_eq!(weyl_average(&t, &rat(0, 1)), Complex64::new(1.0, 0.0));
        let t = vec![big(1), big(2)];
        assert_eq!(weyl_average(&t, &rat(1, 2)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn weyl_precision_shortfall() {
        let e = weyl_profile(&IntSequence::powers(2), 2, 0, 100, 0.1, Some(64)).unwrap_err();
        match e {
            Error::Precision { required_bits, .. } => assert_eq!(required_bits, 165),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn abs_sum_dyadic() {
        let x = RealInput::Rational { value: rat(1, 1024) };
        let s = abs_norm_partial_sum(&IntSequence::powers(2), &x, 30).unwrap();
        let expect: BigRational = (1..10).map(|m| rat(1, 1 << (10 - m))).sum();
        assert_eq!(s.value, expect);
        assert!(s.error_bound.is_zero());
        let f = RealInput::Fixed { mantissa: big(1), frac_bits: 10 };
        assert!(abs_norm_partial_sum(&IntSequence::powers(2), &f, 30).is_err());
    }

    #[test]
    fn lac2_partial_sums() {
        let g = ContinuedFraction::golden_mean();
        let seq = IntSequence::CfDenominators { alpha: g.clone() };
        let s = abs_norm_partial_sum(&seq, &RealInput::Cf { alpha: g }, 40).unwrap();
        let bound: BigRational = seq.terms(40).unwrap().iter().map(|q| arith::rat_big(&big(1), q)).sum();
        assert!(s.value + s.error_bound <= bound);
    }

    #[test]
    fn gap_examples() {
        assert!(gap_divergence(&IntSequence::powers(2), 10).unwrap().diverging);
        let u = IntSequence::union(vec![IntSequence::powers(2), IntSequence::shifted(IntSequence::powers(2), 1)]);
        let g = gap_divergence(&u, 10).unwrap();
        assert!(!g.diverging);
        assert_eq!(g.min_tail_gap, big(1));
        assert!(gap_divergence(&IntSequence::ChaconHeightsMinusOne, 10).unwrap().diverging);
    }

    #[test]
    fn sumset_examples() {
        let sq = IntSequence::Polynomial { coeffs: vec![0, 0, 1] };
        let p = sumset_density_probe(&sq, &[1, -1], 99, 10_000_000).unwrap();
        assert!(p.density >= rat(50, 199));
        assert!(p.contains_zero && p.nonzero_count == p.count - 1);
        let p = sumset_density_probe(&IntSequence::powers(2), &[1], 1024, 1_000_000).unwrap();
        assert_eq!(p.density, rat(10, 2049));
    }

    #[test]
    fn derived_differences() {
        let s = IntSequence::shifted(IntSequence::powers(2), 1);
        let d = derived_sequence(&s, &[2, -1], 5).unwrap();
        assert!(d.iter().all(|x| x == &BigInt::one()));
    }

    proptest! {
        #[test]
        fn partial_sums_monotone(a in 2u64..5, num in 1i64..1000) {
            let x = RealInput::Rational { value: rat(num, 1009) };
            let seq = IntSequence::powers(a);
            let mut last = BigRational::zero();
            for m in 1..15 {
                let s = abs_norm_partial_sum(&seq, &x, m).unwrap().value;
                prop_assert!(s >= last);
                last = s;
            }
        }

        #[test]
        fn weyl_bounded(seed in 0u64..1000) {
            let p = weyl_profile(&IntSequence::powers(3), 4, seed, 50, 0.1, None).unwrap();
            prop_assert!(p.averages.iter().all(|(r, i)| (r * r + i * i).sqrt() <= 1.0 + 1e-12));
        }

        #[test]
        fn no_witness_for_powers(a in 2u64..=5) {
            prop_assert!(witness(&IntSequence::powers(a)).is_none());
        }
    }
}
