use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{phase, u64_threshold, FourierValue};
use crate::arith;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "crate::arith::serde_big::rat")]
    pub angle: BigRational,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub mass: BigRational,
}

impl Atom {
    pub fn new(angle: BigRational, mass: BigRational) -> Self {
        Atom { angle, mass }
    }
}

/// Finitely many point masses at rational angles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Angles are reduced modulo 1 and equal angles merged. Masses must be
    /// nonnegative and sum to 1.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("atomic measure needs at least one atom");
        }
        let mut merged: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        let mut total = BigRational::zero();
        for a in atoms {
            if a.mass.is_negative() {
                return invalid("atom masses must be nonnegative");
            }
            total += &a.mass;
            *merged.entry(arith::frac(&a.angle)).or_insert_with(BigRational::zero) += a.mass;
        }
        if !total.is_one() {
            return invalid(format!("atom masses sum to {}, not 1", arith::fmt_rational(&total)));
        }
        Ok(AtomicMeasure {
            atoms: merged.into_iter().filter(|(_, m)| !m.is_zero()).map(|(angle, mass)| Atom { angle, mass }).collect(),
        })
    }

    pub fn dirac(angle: BigRational) -> Self {
        AtomicMeasure::new(vec![Atom::new(angle, BigRational::one())]).expect("unit mass")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn fourier(&self, n: &BigInt) -> FourierValue {
        let nn = BigRational::from_integer(n.clone());
        let mut z = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            z += phase(&(&nn * &a.angle)) * arith::rat_to_f64(&a.mass);
        }
        FourierValue::with_error(z, 4.0 * f64::EPSILON * (self.atoms.len() as f64 + 1.0))
    }

    /// `nu * nu~` where `nu~(A) = nu(-A)`; its coefficients are `|nu^(n)|^2`.
    pub fn convolve_adjoint(&self) -> AtomicMeasure {
        let mut out = Vec::with_capacity(self.atoms.len() * self.atoms.len());
        for a in &self.atoms {
            for b in &self.atoms {
                out.push(Atom::new(&a.angle - &b.angle, &a.mass * &b.mass));
            }
        }
        AtomicMeasure::new(out).expect("product of probability measures")
    }

    /// Sum of squared masses, the limit of the Wiener averages.
    pub fn sum_sq_masses(&self) -> BigRational {
        self.atoms.iter().map(|a| &a.mass * &a.mass).sum()
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<BigRational> {
        let mut cum = BigRational::zero();
        let cuts: Vec<u64> = self
            .atoms
            .iter()
            .map(|a| {
                cum += &a.mass;
                u64_threshold(&cum).unwrap_or(u64::MAX)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: u64 = rng.gen();
                let i = cuts.iter().position(|&c| u < c).unwrap_or(self.atoms.len() - 1);
                self.atoms[i].angle.clone()
            })
            .collect()
    }
}
