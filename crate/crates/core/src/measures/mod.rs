//! Positive Borel probability measures on the circle with computable Fourier
//! coefficients `nu^(n) = int e^{-2 pi i n x} d nu(x)`.
//!
//! Four families are supported: finitely many atoms, Riesz products, product
//! measures on odometer digit blocks, and uniform measures on nested arcs.
//! Every Fourier value carries a bracket for its real part.

mod atomic;
mod block;
mod cantor;
mod profile;
mod riesz;

pub use atomic::{Atom, AtomicMeasure};
pub use block::{BlockMeasure, EpsRule, LengthRule};
pub use cantor::{cantor_support, ArcLevelCheck, CantorArc, CantorParams, HSchedule};
pub use profile::{dual_gap_profile, rigidity_gap_profile, wiener_average, DualGapPoint, GapPoint};
pub use riesz::{AtomBound, RieszFactor, RieszFactors, RieszMeasure, WeightRule};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::sequences::IntSequence;

/// A Fourier coefficient with a bracket `[lower, upper]` for its real part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub re: f64,
    pub im: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FourierValue {
    pub fn one() -> Self {
        FourierValue { re: 1.0, im: 0.0, lower: 1.0, upper: 1.0 }
    }

    /// Value with a symmetric bracket of half-width `err` on the real part,
    /// clipped to `[-1, 1]`.
    pub fn with_error(z: Complex64, err: f64) -> Self {
        FourierValue { re: z.re, im: z.im, lower: (z.re - err).max(-1.0), upper: (z.re + err).min(1.0) }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Bracket for `1 - Re nu^(n)`.
    pub fn gap(&self) -> (f64, f64) {
        (1.0 - self.upper, 1.0 - self.lower)
    }
}

/// How many factors (or digits) to use for product-type measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Truncation {
    /// Smallest depth whose certified bracket is narrower than `1e-6`.
    #[default]
    Auto,
    Fixed {
        k: usize,
    },
    /// `K = m + offset` along a profile indexed by `m`.
    IndexPlus {
        offset: usize,
    },
}

impl Truncation {
    pub fn resolve(&self, m: u64) -> Result<Option<usize>> {
        match *self {
            Truncation::Auto => Ok(None),
            Truncation::Fixed { k: 0 } => invalid("truncation K must be at least 1"),
            Truncation::Fixed { k } => Ok(Some(k)),
            Truncation::IndexPlus { offset } => {
                let k = m as usize + offset;
                if k == 0 {
                    return invalid("truncation K must be at least 1");
                }
                Ok(Some(k))
            }
        }
    }
}

/// JSON description of a measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Atomic {
        atoms: Vec<Atom>,
    },
    Riesz {
        factors: RieszFactors,
    },
    OdometerBlock {
        sequence: IntSequence,
        lengths: LengthRule,
        eps: EpsRule,
        #[serde(default)]
        digits: Option<usize>,
    },
    CantorArc {
        sequence: IntSequence,
        h: HSchedule,
        #[serde(default)]
        params: CantorParams,
    },
}

#[derive(Clone, Debug)]
pub enum CircleMeasure {
    Atomic(AtomicMeasure),
    Riesz(RieszMeasure),
    OdometerBlock(BlockMeasure),
    CantorArc(CantorArc),
}

impl CircleMeasure {
    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        Ok(match spec {
            MeasureSpec::Atomic { atoms } => CircleMeasure::Atomic(AtomicMeasure::new(atoms.clone())?),
            MeasureSpec::Riesz { factors } => CircleMeasure::Riesz(RieszMeasure::new(factors.clone())?),
            MeasureSpec::OdometerBlock { sequence, lengths, eps, digits } => CircleMeasure::OdometerBlock(
                BlockMeasure::new(sequence, lengths.clone(), eps.clone(), digits.unwrap_or(block::DEFAULT_DIGITS))?,
            ),
            MeasureSpec::CantorArc { sequence, h, params } => {
                CircleMeasure::CantorArc(cantor_support(sequence, h, params)?)
            }
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(s).map_err(|e| Error::Config(format!("measure spec: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CircleMeasure::Atomic(_) => "atomic",
            CircleMeasure::Riesz(_) => "riesz",
            CircleMeasure::OdometerBlock(_) => "odometer_block",
            CircleMeasure::CantorArc(_) => "cantor_arc",
        }
    }

    /// `nu^(n)`; `k` is the number of factors for product types (`None` picks a
    /// depth with a narrow certified bracket when one exists).
    pub fn fourier(&self, n: &BigInt, k: Option<usize>) -> Result<FourierValue> {
        if k == Some(0) && !matches!(self, CircleMeasure::Atomic(_)) {
            return invalid("truncation K must be at least 1");
        }
        if n.is_zero() {
            return Ok(FourierValue::one());
        }
        match self {
            CircleMeasure::Atomic(m) => Ok(m.fourier(n)),
            CircleMeasure::Riesz(m) => m.fourier(n, k),
            CircleMeasure::OdometerBlock(m) => m.fourier(n),
            CircleMeasure::CantorArc(m) => Ok(m.fourier(n)),
        }
    }

    /// Deterministic sample of `count` points of `[0, 1)`. `depth` is the number of
    /// Riesz factors or odometer digits used (ignored otherwise).
    pub fn sample(&self, count: usize, seed: u64, depth: Option<usize>) -> Result<Vec<BigRational>> {
        match self {
            CircleMeasure::Atomic(m) => Ok(m.sample(count, seed)),
            CircleMeasure::Riesz(m) => m.sample(count, seed, depth.unwrap_or(32)),
            CircleMeasure::OdometerBlock(m) => {
                let d = depth.unwrap_or(64).min(m.digits());
                Ok(m.sample_digits(count, seed, d)?.iter().map(|s| m.point(s)).collect())
            }
            CircleMeasure::CantorArc(m) => Ok(m.sample(count, seed)),
        }
    }
}

/// `e^{-2 pi i t}`.
pub(crate) fn phase(t: &BigRational) -> Complex64 {
    crate::obstruct::unit_root(&-t)
}

/// `sin(pi t)` after exact reduction of `t` modulo 2.
pub(crate) fn sin_pi(t: &BigRational) -> f64 {
    let two = BigRational::from_integer(2.into());
    let mut r = t - (t / &two).floor() * &two;
    if r > BigRational::from_integer(1.into()) {
        r -= &two;
    }
    let one = BigRational::from_integer(1.into());
    if r.is_zero() || r.abs() == one {
        return 0.0;
    }
    // sin(pi r) = sin(pi (1 - r)); keep the argument in [-1/2, 1/2]
    let half = arith::rat(1, 2);
    if r > half {
        r = &one - r;
    } else if r < -half.clone() {
        r = -one - r;
    }
    (std::f64::consts::PI * arith::rat_to_f64(&r)).sin()
}

/// Exact threshold `floor(p 2^64)` for comparing against a uniform `u64`.
pub(crate) fn u64_threshold(p: &BigRational) -> Option<u64> {
    use num_traits::ToPrimitive;
    let scaled = (p * BigRational::from_integer(BigInt::from(1u128 << 64))).floor().to_integer();
    if scaled.is_negative() {
        Some(0)
    } else {
        scaled.to_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_reduction() {
        assert_eq!(sin_pi(&arith::rat(7, 1)), 0.0);
        assert!((sin_pi(&arith::rat(1, 2)) - 1.0).abs() < 1e-15);
        assert!((sin_pi(&arith::rat(1001, 2)) - 1.0).abs() < 1e-15);
        assert!((sin_pi(&arith::rat(-1, 6)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_json_forms() {
        let m = CircleMeasure::from_json(r#"{"kind":"atomic","atoms":[{"angle":"0","mass":"1"}]}"#).unwrap();
        assert_eq!(m.kind(), "atomic");
        let m = CircleMeasure::from_json(
            r#"{"kind":"riesz","factors":{"family":"geometric","base":2,"weights":{"rule":"harmonic"}}}"#,
        )
        .unwrap();
        assert_eq!(m.kind(), "riesz");
        let m = CircleMeasure::from_json(
            r#"{"kind":"odometer_block","sequence":{"kind":"powers","base":2},
                "lengths":{"rule":"affine","start":1,"step":1},"eps":{"rule":"harmonic","offset":2}}"#,
        )
        .unwrap();
        assert_eq!(m.kind(), "odometer_block");
        assert!(CircleMeasure::from_json(r#"{"kind":"atomic","atoms":[{"angle":"0","mass":"1/2"}]}"#).is_err());
        assert!(matches!(CircleMeasure::from_json("{"), Err(Error::Config(_))));
    }

    #[test]
    fn n_zero_is_total_mass() {
        let m = CircleMeasure::Riesz(RieszMeasure::dyadic_harmonic());
        assert_eq!(m.fourier(&BigInt::zero(), Some(3)).unwrap(), FourierValue::one());
        assert!(m.fourier(&BigInt::from(3), Some(0)).is_err());
    }
}
