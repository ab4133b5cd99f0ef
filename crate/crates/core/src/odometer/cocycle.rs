use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{OdometerPoint, OdometerSystem};
use crate::arith::{self, Interval};
use crate::error::{invalid, Error, Result};

/// Coefficient `a_{n_m}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Coefficient {
    Rational {
        #[serde(with = "crate::arith::serde_big::rat")]
        re: BigRational,
        #[serde(with = "crate::arith::serde_big::rat", default = "BigRational::zero")]
        im: BigRational,
    },
    /// `scale / (sqrt(root_of) n_m)`.
    HeightScaled {
        #[serde(with = "crate::arith::serde_big::rat")]
        scale: BigRational,
        root_of: u64,
    },
}

impl Coefficient {
    /// `|a|^2` given `n_m`.
    pub fn abs_sq(&self, n_m: &BigUint) -> BigRational {
        match self {
            Coefficient::Rational { re, im } => re * re + im * im,
            Coefficient::HeightScaled { .. } => {
                let n = BigRational::from_integer(BigInt::from(n_m.clone()));
                self.height_abs_sq() / (&n * &n)
            }
        }
    }

    /// `|n_m a|^2`; needs no big heights for the height-scaled form.
    pub fn height_abs_sq_with(&self, n_m: impl FnOnce() -> Result<BigUint>) -> Result<BigRational> {
        match self {
            Coefficient::Rational { .. } => {
                let n = BigRational::from_integer(BigInt::from(n_m()?));
                Ok(self.abs_sq(&BigUint::one()) * &n * &n)
            }
            Coefficient::HeightScaled { .. } => Ok(self.height_abs_sq()),
        }
    }

    fn height_abs_sq(&self) -> BigRational {
        match self {
            Coefficient::HeightScaled { scale, root_of } => {
                scale * scale / BigRational::from_integer((*root_of).into())
            }
            Coefficient::Rational { .. } => unreachable!("only for the height-scaled form"),
        }
    }

    pub fn value(&self, n_m: &BigUint) -> Complex64 {
        match self {
            Coefficient::Rational { re, im } => Complex64::new(arith::rat_to_f64(re), arith::rat_to_f64(im)),
            Coefficient::HeightScaled { scale, root_of } => {
                let s = arith::rat_to_f64(&(scale / BigRational::from_integer(BigInt::from(n_m.clone()))));
                Complex64::new(s / (*root_of as f64).sqrt(), 0.0)
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Rational { re, im } => re.is_zero() && im.is_zero(),
            Coefficient::HeightScaled { scale, .. } => scale.is_zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleTerm {
    pub m: usize,
    pub coeff: Coefficient,
}

/// `f = sum_{terms} a_{n_m} 1_{n_m}`, support indices strictly increasing, `m >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleSpec {
    pub terms: Vec<CocycleTerm>,
}

impl CocycleSpec {
    pub fn new(terms: Vec<CocycleTerm>) -> Result<Self> {
        let f = CocycleSpec { terms };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let mut last = 0;
        for t in &self.terms {
            if t.m <= last {
                return invalid("cocycle support indices must be >= 1 and strictly increasing");
            }
            if let Coefficient::HeightScaled { root_of: 0, .. } = t.coeff {
                return invalid("root_of must be positive");
            }
            last = t.m;
        }
        Ok(())
    }

    pub fn zero() -> Self {
        CocycleSpec { terms: Vec::new() }
    }

    /// `a_{n_{m_k}} = 1/(sqrt(k) n_{m_k})` on greedily chosen `m_k`:
    /// `m_1 = 1` and `m_{k+1}` the least index with `n_{m_{k+1}} >= 2 n_{m_k}`.
    pub fn good_function(sys: &OdometerSystem, count: usize) -> Result<Self> {
        let mut terms = Vec::with_capacity(count);
        let mut m = 1;
        for k in 1..=count as u64 {
            if m > sys.levels() {
                return Err(Error::Budget(format!("good function needs more than {} levels", sys.levels())));
            }
            terms.push(CocycleTerm { m, coeff: Coefficient::HeightScaled { scale: BigRational::one(), root_of: k } });
            // advance until the product of ratios reaches 2
            let mut prod = 1u64;
            while prod < 2 {
                prod = prod.saturating_mul(sys.ratio(m).unwrap_or(2));
                m += 1;
            }
        }
        Ok(CocycleSpec { terms })
    }

    /// `a_{n_m} = 1/(m n_m)` for `m = 1..=count`.
    pub fn inverse_index(count: usize) -> Self {
        CocycleSpec {
            terms: (1..=count)
                .map(|m| CocycleTerm {
                    m,
                    coeff: Coefficient::HeightScaled { scale: arith::rat(1, m as i64), root_of: 1 },
                })
                .collect(),
        }
    }
}

/// `f^{(n)}(x)` kept formally: for each support index `m`, the multiset of
/// exponents `{J + j : j < n}` modulo `n_m` as a circular difference array
/// (full turns and constants dropped, since `sum_r e^{2 pi i r/n_m} = 0`). Two
/// values are equal exactly when the cocycle sums are equal.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CocycleValue {
    parts: BTreeMap<usize, BTreeMap<BigUint, i64>>,
}

impl CocycleValue {
    fn bump(&mut self, m: usize, at: BigUint, by: i64) {
        let part = self.parts.entry(m).or_default();
        let e = part.entry(at.clone()).or_insert(0);
        *e += by;
        if *e == 0 {
            part.remove(&at);
        }
        if part.is_empty() {
            self.parts.remove(&m);
        }
    }

    /// Exponents `start, start+1, ..., start+len-1` modulo `n`.
    fn push_arc(&mut self, m: usize, n: &BigUint, start: &BigUint, len: &BigUint) {
        let len = len % n;
        if len.is_zero() {
            return;
        }
        let s = start % n;
        let e = (&s + &len) % n;
        self.bump(m, s, 1);
        self.bump(m, e, -1);
    }

    pub fn plus(&self, other: &CocycleValue) -> CocycleValue {
        let mut out = self.clone();
        for (m, part) in &other.parts {
            for (at, by) in part {
                out.bump(*m, at.clone(), *by);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Numerical value; `sum_{r >= b} e^{2 pi i r/n} = -e^{pi i (b-1)/n} sin(pi b/n) / sin(pi/n)`.
    pub fn value(&self, sys: &OdometerSystem, f: &CocycleSpec) -> Result<Complex64> {
        let mut z = Complex64::new(0.0, 0.0);
        for t in &f.terms {
            let Some(part) = self.parts.get(&t.m) else { continue };
            let n = sys.height(t.m)?;
            let nb = BigInt::from(n.clone());
            let s1 = crate::measures::sin_pi(&BigRational::new(BigInt::one(), nb.clone()));
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, &d) in part {
                let bb = BigInt::from(b.clone());
                let ph = crate::obstruct::unit_root(&BigRational::new(&bb - 1, &nb * 2));
                let sb = crate::measures::sin_pi(&BigRational::new(bb, nb.clone()));
                acc -= ph * (sb / s1) * d as f64;
            }
            z += acc * t.coeff.value(&n);
        }
        Ok(z)
    }
}

/// `f^{(n)}(x) = sum_m a_{n_m} sum_{j < n} 1_{n_m}(T^j x)`.
pub fn cocycle_sum(sys: &OdometerSystem, f: &CocycleSpec, x: &OdometerPoint, n: &BigUint) -> Result<CocycleValue> {
    f.validate()?;
    let mut v = CocycleValue::default();
    for t in &f.terms {
        if t.coeff.is_zero() {
            continue;
        }
        let c = sys.character(t.m, x)?;
        v.push_arc(t.m, &c.n_m, &c.j, n);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBound {
    pub m0: usize,
    pub trunc: usize,
    /// Certified enclosure of `||f^{(n_{m0})}||_2^2` for the truncated `f`.
    #[serde(with = "crate::arith::serde_big::rat")]
    pub norm_lower: BigRational,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub norm_upper: BigRational,
    /// `n_{m0}^2 sum_{m0 < m <= trunc} |a_{n_m}|^2`.
    #[serde(with = "crate::arith::serde_big::rat")]
    pub bound: BigRational,
    pub holds: bool,
    pub precision_bits: u32,
}

/// `||f^{(n_{m0})}||^2 = sum_{m > m0} |a_{n_m}|^2 sin^2(pi n_{m0}/n_m) / sin^2(pi/n_m)`
/// by orthonormality of characters; terms with `m <= m0` vanish.
pub fn cocycle_norm_bound(sys: &OdometerSystem, f: &CocycleSpec, m0: usize, trunc: usize) -> Result<NormBound> {
    f.validate()?;
    if trunc <= m0 {
        return invalid("truncation must exceed m0");
    }
    let n0 = sys.height(m0)?;
    let n0r = BigRational::from_integer(BigInt::from(n0.clone()));
    let top = sys.height(trunc)?;
    let prec = (2 * arith::bitlen(&top) + 96) as u32;
    let mut norm = Interval::point_int(0, prec);
    let mut sum_sq = BigRational::zero();
    let pi = Interval::pi(prec);
    for t in f.terms.iter().filter(|t| t.m > m0 && t.m <= trunc) {
        let n = sys.height(t.m)?;
        let a2 = t.coeff.abs_sq(&n);
        sum_sq += &a2;
        if n0.is_one() {
            continue;
        }
        let ratio = {
            let nr = BigRational::from_integer(BigInt::from(n.clone()));
            let num = pi.mul_rational(&(&n0r / &nr)).sin();
            let den = pi.mul_rational(&(BigRational::one() / &nr)).sin();
            num.div(&den)
                .ok_or_else(|| Error::Precision { required_bits: 2 * prec as u64, context: "sin(pi/n_m)".into() })?
                .square()
        };
        norm = norm.add(&ratio.mul_rational(&a2));
    }
    let bound = &n0r * &n0r * sum_sq;
    if n0.is_one() {
        // every ratio is exactly 1
        return Ok(NormBound {
            m0,
            trunc,
            norm_lower: bound.clone(),
            norm_upper: bound.clone(),
            bound,
            holds: true,
            precision_bits: prec,
        });
    }
    let norm_upper = norm.upper();
    Ok(NormBound {
        m0,
        trunc,
        norm_lower: norm.lower().max(BigRational::zero()),
        holds: norm_upper <= bound,
        norm_upper,
        bound,
        precision_bits: prec,
    })
}

/// `S_K = sum_{k <= K} |n_{m_k} a_{n_{m_k}}|^2` over the support, in order.
pub fn coboundary_partial_sums(sys: &OdometerSystem, f: &CocycleSpec) -> Result<Vec<BigRational>> {
    f.validate()?;
    let mut s = BigRational::zero();
    f.terms
        .iter()
        .map(|t| {
            s += t.coeff.height_abs_sq_with(|| sys.height(t.m))?;
            Ok(s.clone())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoboundaryReport {
    pub terms: usize,
    /// `(K, S_K)` at powers of two and at the end.
    pub checkpoints: Vec<(usize, String)>,
    pub last: f64,
    /// `S_K - S_{K/2}`: about `ln 2` for harmonic growth, about `1/K` for `sum 1/k^2`.
    pub tail: f64,
    /// `S_K / ln K`.
    pub log_ratio: f64,
    pub verdict: String,
}

/// `f` is an `L_2` coboundary iff `(n_m a_{n_m})` is square summable; report
/// the partial sums and a growth reading over the truncation.
pub fn coboundary_test(sys: &OdometerSystem, f: &CocycleSpec) -> Result<CoboundaryReport> {
    let sums = coboundary_partial_sums(sys, f)?;
    let k = sums.len();
    if k == 0 || sums.last().is_some_and(|s| s.is_zero()) {
        return Ok(CoboundaryReport {
            terms: k,
            checkpoints: Vec::new(),
            last: 0.0,
            tail: 0.0,
            log_ratio: 0.0,
            verdict: "zero cocycle: trivially a coboundary".into(),
        });
    }
    let mut checkpoints = Vec::new();
    let mut p = 1;
    while p < k {
        checkpoints.push((p, arith::fmt_rational(&sums[p - 1])));
        p *= 2;
    }
    checkpoints.push((k, arith::fmt_rational(&sums[k - 1])));
    let last = arith::rat_to_f64(&sums[k - 1]);
    let half = if k >= 2 { arith::rat_to_f64(&sums[k / 2 - 1]) } else { 0.0 };
    let tail = last - half;
    let log_ratio = if k > 1 { last / (k as f64).ln() } else { f64::NAN };
    let verdict = if tail.is_sign_negative() || sums.iter().any(|s| s.is_negative()) {
        "invalid partial sums".to_string()
    } else if tail > 0.1 {
        format!("diverging over {k} terms (tail {tail:.4}): no L2 solution of f = g - g(T)")
    } else {
        format!("bounded over {k} terms (tail {tail:.3e}): consistent with an L2 coboundary")
    };
    Ok(CoboundaryReport { terms: k, checkpoints, last, tail, log_ratio, verdict })
}
