//! The `(n_t)`-odometer: `X = prod {0, ..., rho_t - 1}`, `T x = x + 1^` with
//! carries to the right, Haar measure, characters `1_{n_m}` and cocycles
//! `f = sum a_{n_m} 1_{n_m}`.

mod cocycle;
mod experiment;

pub use cocycle::{
    coboundary_partial_sums, coboundary_test, cocycle_norm_bound, cocycle_sum, CoboundaryReport, CocycleSpec,
    CocycleTerm, CocycleValue, Coefficient, NormBound,
};
pub use experiment::{ratio_experiment, RatioExperiment};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Bits};
use crate::error::{invalid, Error, Result};
use crate::rankone::CyclicSystem;
use crate::sequences::RatioRule;

/// Heights kept in memory; deeper ones are recomputed on demand.
const CACHED_HEIGHTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdometerSystem {
    ratios: Vec<u64>,
    #[serde(skip)]
    heights: Vec<BigUint>,
}

impl OdometerSystem {
    /// `rho_0, rho_1, ...`, each at least 2.
    pub fn new(ratios: Vec<u64>) -> Result<Self> {
        if ratios.is_empty() {
            return invalid("odometer needs at least one ratio");
        }
        if let Some(t) = ratios.iter().position(|&r| r < 2) {
            return invalid(format!("rho_{t} must be at least 2"));
        }
        let mut heights = vec![BigUint::one()];
        for &r in ratios.iter().take(CACHED_HEIGHTS) {
            let next = heights.last().unwrap() * r;
            heights.push(next);
        }
        Ok(OdometerSystem { ratios, heights })
    }

    /// `rho_t = rule.ratio(t + 1)` for `t < levels`.
    pub fn from_rule(rule: &RatioRule, levels: usize) -> Result<Self> {
        let ratios: Option<Vec<u64>> = (1..=levels as u64).map(|m| rule.ratio(m)).collect();
        Self::new(ratios.ok_or_else(|| Error::InvalidParameter(format!("ratio rule has fewer than {levels} terms")))?)
    }

    /// `rho = (2, 3, 4, ...)`, so `n_t = (t + 1)!`.
    pub fn factorial(levels: usize) -> Self {
        Self::new((2..2 + levels as u64).collect()).expect("ratios >= 2")
    }

    /// Number of digits `T`; heights `n_0 ..= n_T` are defined.
    pub fn levels(&self) -> usize {
        self.ratios.len()
    }

    pub fn ratios(&self) -> &[u64] {
        &self.ratios
    }

    pub fn ratio(&self, t: usize) -> Result<u64> {
        self.ratios.get(t).copied().ok_or_else(|| self.too_deep(t))
    }

    fn too_deep(&self, t: usize) -> Error {
        Error::Budget(format!("digit {t} is beyond the {} materialized levels", self.levels()))
    }

    /// `n_t = rho_0 ... rho_{t-1}`.
    pub fn height(&self, t: usize) -> Result<BigUint> {
        if t > self.levels() {
            return Err(self.too_deep(t));
        }
        if let Some(h) = self.heights.get(t) {
            return Ok(h.clone());
        }
        let mut h = self.heights.last().unwrap().clone();
        for &r in &self.ratios[self.heights.len() - 1..t] {
            h *= r;
        }
        Ok(h)
    }

    /// Mixed-radix digits of `r` (shortest form, at least one digit).
    pub fn digits_of(&self, r: &BigUint) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        let mut q = r.clone();
        let mut t = 0;
        loop {
            let rho = self.ratio(t)?;
            let (next, d) = q.div_rem(&BigUint::from(rho));
            out.push(d.to_u64().unwrap());
            q = next;
            t += 1;
            if q.is_zero() {
                return Ok(out);
            }
            if t == self.levels() {
                return Err(Error::Budget(format!("{r} does not fit in {} digits", self.levels())));
            }
        }
    }

    /// `k(r)`: number of trailing zero digits of `r >= 1`, i.e. the index of the
    /// lowest nonzero digit.
    pub fn trailing_zero_digits(&self, r: &BigUint) -> Result<usize> {
        if r.is_zero() {
            return invalid("k(r) needs r >= 1");
        }
        let mut q = r.clone();
        let mut t = 0;
        loop {
            let rho = BigUint::from(self.ratio(t)?);
            let (next, d) = q.div_rem(&rho);
            if !d.is_zero() {
                return Ok(t);
            }
            q = next;
            t += 1;
        }
    }

    /// `T^r x`.
    pub fn add(&self, x: &OdometerPoint, r: &BigUint) -> Result<OdometerPoint> {
        x.check(self)?;
        let mut digits = x.digits.clone();
        let mut carry = r.clone();
        let mut t = 0;
        while !carry.is_zero() {
            let rho = self.ratio(t)?;
            if t == digits.len() {
                digits.push(x.extension_digit(self, t)?);
            }
            let s = carry + digits[t];
            let (q, d) = s.div_rem(&BigUint::from(rho));
            digits[t] = d.to_u64().unwrap();
            carry = q;
            t += 1;
        }
        Ok(OdometerPoint { digits, extension: x.extension.clone() })
    }

    /// `1_{n_m}(x) = e^{2 pi i j / n_m}` with `j = sum_{t < m} x_t n_t`.
    pub fn character(&self, m: usize, x: &OdometerPoint) -> Result<Character> {
        x.check(self)?;
        let mut j = BigUint::zero();
        for t in (0..m).rev() {
            j = j * self.ratio(t)? + x.digit(self, t)?;
        }
        Ok(Character { m, j, n_m: self.height(m)? })
    }

    /// `p(T^r A Δ A)` for `A = D_0^{n_{t0+1}}`, the base of the height-`n_{t0+1}` tower.
    /// `T^r A` is the level `r mod n_{t0+1}`, which is the base exactly when
    /// `k(r) > t0`.
    pub fn cylinder_delta(&self, r: &BigUint, t0: usize) -> Result<BigRational> {
        if r.is_zero() {
            return invalid("cylinder_delta needs r >= 1");
        }
        let h = self.height(t0 + 1)?;
        if (r % &h).is_zero() {
            return Ok(BigRational::zero());
        }
        let k = self.trailing_zero_digits(r)?;
        debug_assert!(k <= t0);
        Ok(BigRational::new(2.into(), h.into()))
    }

    /// Cylinders of depth `t` as the cyclic system `Z/n_t` (level `j` is
    /// `T^j D_0^{n_t}`), with the base level as a set.
    pub fn cylinder_system(&self, t: usize) -> Result<(CyclicSystem, Bits)> {
        let n = self
            .height(t)?
            .to_usize()
            .filter(|&n| n <= 100_000_000)
            .ok_or_else(|| Error::Budget(format!("n_{t} is too large for an explicit cylinder algebra")))?;
        let sys = CyclicSystem::new(n)?;
        let base = sys.set([0]);
        Ok((sys, base))
    }
}

/// How digits past the materialized prefix are read.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Extension {
    #[default]
    ZeroFill,
    /// Digit `t` drawn uniformly from a stream keyed by `(seed, t)`.
    Sampled { seed: u64 },
    /// Reading past the prefix is an error.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdometerPoint {
    pub digits: Vec<u64>,
    #[serde(default)]
    pub extension: Extension,
}

impl OdometerPoint {
    pub fn zero() -> Self {
        OdometerPoint { digits: Vec::new(), extension: Extension::ZeroFill }
    }

    /// `1^ = (1, 0, 0, ...)`.
    pub fn one_hat() -> Self {
        OdometerPoint { digits: vec![1], extension: Extension::ZeroFill }
    }

    pub fn new(sys: &OdometerSystem, digits: Vec<u64>, extension: Extension) -> Result<Self> {
        let p = OdometerPoint { digits, extension };
        p.check(sys)?;
        Ok(p)
    }

    /// A point with `len` independent uniform digits.
    pub fn sampled(sys: &OdometerSystem, len: usize, seed: u64) -> Result<Self> {
        let ext = Extension::Sampled { seed };
        let p = OdometerPoint { digits: Vec::new(), extension: ext };
        let digits = (0..len).map(|t| p.extension_digit(sys, t)).collect::<Result<_>>()?;
        Ok(OdometerPoint { digits, extension: Extension::Sampled { seed } })
    }

    fn check(&self, sys: &OdometerSystem) -> Result<()> {
        for (t, &d) in self.digits.iter().enumerate() {
            if d >= sys.ratio(t)? {
                return invalid(format!("digit x_{t} = {d} is not below rho_{t}"));
            }
        }
        Ok(())
    }

    fn extension_digit(&self, sys: &OdometerSystem, t: usize) -> Result<u64> {
        match &self.extension {
            Extension::ZeroFill => Ok(0),
            Extension::Sampled { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(t as u64);
                Ok(rng.gen_range(0..sys.ratio(t)?))
            }
            Extension::Strict => Err(Error::Budget(format!("digit {t} is not materialized"))),
        }
    }

    pub fn digit(&self, sys: &OdometerSystem, t: usize) -> Result<u64> {
        match self.digits.get(t) {
            Some(&d) => Ok(d),
            None => self.extension_digit(sys, t),
        }
    }
}

/// `e^{2 pi i j / n_m}`, kept as the exact pair `(j, n_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Character {
    pub m: usize,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub j: BigUint,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub n_m: BigUint,
}

impl Character {
    /// Angle `j / n_m` in `[0, 1)`.
    pub fn angle(&self) -> BigRational {
        arith::rat_big(&self.j, &self.n_m)
    }

    pub fn value(&self) -> Complex64 {
        crate::obstruct::unit_root(&self.angle())
    }
}
