//! Non-recurrent sets built from rigidity: given `TA` disjoint from `A` and
//! `p(T^{n_m} A Δ A) -> 0`, remove from `B = TA` the preimages of the small
//! symmetric differences along a subsequence.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, Bits};
use crate::error::{invalid, Error, Result};
use crate::sequences::IntSequence;

/// `x -> x + 1` on `Z/n` with normalized counting measure. Finite unions of
/// odometer cylinders of one depth form such a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSystem {
    n: usize,
}

impl CyclicSystem {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid("cyclic system needs at least 2 points");
        }
        if n > 100_000_000 {
            return Err(Error::Budget(format!("cyclic system of size {n} exceeds 10^8 points")));
        }
        Ok(CyclicSystem { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn measure(&self, s: &Bits) -> BigRational {
        arith::rat(s.count_ones() as i64, self.n as i64)
    }

    /// `T^k S` for `k >= 0`.
    pub fn shift(&self, s: &Bits, k: &BigUint) -> Bits {
        let k = (k % self.n).to_usize().expect("reduced mod n");
        Bits::from_positions(self.n, s.ones().map(|i| (i + k) % self.n))
    }

    /// `T^{-k} S`.
    pub fn unshift(&self, s: &Bits, k: &BigUint) -> Bits {
        let k = (k % self.n).to_usize().expect("reduced mod n");
        Bits::from_positions(self.n, s.ones().map(|i| (i + self.n - k) % self.n))
    }

    pub fn set(&self, pos: impl IntoIterator<Item = usize>) -> Bits {
        Bits::from_positions(self.n, pos)
    }
}

fn sym_diff(a: &Bits, b: &Bits) -> Bits {
    Bits::from_positions(a.len(), (0..a.len()).filter(|&i| a.get(i) != b.get(i)))
}

fn minus(a: &Bits, b: &Bits) -> Bits {
    Bits::from_positions(a.len(), a.ones().filter(|&i| !b.get(i)))
}

fn meets(a: &Bits, b: &Bits) -> bool {
    a.ones().any(|i| b.get(i))
}

#[derive(Clone, Debug, Serialize)]
pub struct Selected {
    pub m: u64,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub n_m: BigUint,
    /// `p(T^{n_m - 1} B Δ A)`.
    #[serde(with = "crate::arith::serde_big::rat")]
    pub delta: BigRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonrecurrentSet {
    pub positions: Vec<usize>,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub mass: BigRational,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub a_mass: BigRational,
    #[serde(with = "crate::arith::serde_big::rat")]
    pub delta_sum: BigRational,
    pub selected: Vec<Selected>,
    /// `p(C) > 0` and `T^{n - 1} C` misses `C` for every selected `n`.
    pub verified: bool,
}

/// Greedily select terms `n_m` (in order, among the first `horizon`) whose
/// `p(T^{n_m - 1} B Δ A)` keeps the running sum within `budget p(A)`,
/// stop after `max_selected`, and return
/// `C = B \ U_s T^{-(n_s - 1)} (T^{n_s - 1} B Δ A)` with an exact check.
pub fn nonrecurrent_set_from_rigidity(
    sys: &CyclicSystem,
    a: &Bits,
    seq: &IntSequence,
    budget: &BigRational,
    horizon: usize,
    max_selected: usize,
) -> Result<NonrecurrentSet> {
    if a.len() != sys.size() {
        return invalid("set size does not match the system");
    }
    let pa = sys.measure(a);
    if pa.is_zero() {
        return invalid("A must have positive measure");
    }
    if !budget.is_positive() {
        return invalid("budget must be positive");
    }
    let one = BigUint::from(1u32);
    let b = sys.shift(a, &one);
    if meets(&b, a) {
        return invalid("TA must be disjoint from A");
    }
    let allowance = budget * &pa;
    let mut c = b.clone();
    let mut sum = BigRational::zero();
    let mut selected = Vec::new();
    for (i, n) in seq.iter().take(horizon).enumerate() {
        let n = n?;
        if n.is_zero() {
            continue;
        }
        let k = &n - 1u32;
        let d = sym_diff(&sys.shift(&b, &k), a);
        let delta = sys.measure(&d);
        if &sum + &delta > allowance {
            continue;
        }
        sum += &delta;
        c = minus(&c, &sys.unshift(&d, &k));
        selected.push(Selected { m: i as u64 + 1, n_m: n, delta });
        if selected.len() == max_selected {
            break;
        }
    }
    if selected.is_empty() {
        return Err(Error::Infeasible("no term meets the budget within the horizon".into()));
    }
    let mass = sys.measure(&c);
    let verified = mass > BigRational::zero() && selected.iter().all(|s| !meets(&sys.shift(&c, &(&s.n_m - 1u32)), &c));
    if !verified {
        return Err(Error::Invariant("constructed set recurs along a selected term".into()));
    }
    Ok(NonrecurrentSet { positions: c.ones().collect(), mass, a_mass: pa, delta_sum: sum, selected, verified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn periodic_toy_keeps_all_of_ta() {
        // n_m = 6m on Z/6: every T^{n_m} is the identity, nothing is removed
        let sys = CyclicSystem::new(6).unwrap();
        let a = sys.set([0]);
        let seq = IntSequence::Polynomial { coeffs: vec![0, 6] };
        let r = nonrecurrent_set_from_rigidity(&sys, &a, &seq, &rat(1, 100), 50, 20).unwrap();
        assert_eq!(r.positions, vec![1]);
        assert_eq!(r.selected.len(), 20);
        assert!(r.delta_sum.is_zero());
    }

    #[test]
    fn skips_expensive_terms_and_removes_cheap_ones() {
        // Z/12, A = {0, 2, 4}: n = 4 costs 4/12, n = 12 and 24 cost nothing
        let sys = CyclicSystem::new(12).unwrap();
        let a = sys.set([0, 2, 4]);
        let seq = IntSequence::explicit_u64(&[4, 12, 24]).unwrap();
        let r = nonrecurrent_set_from_rigidity(&sys, &a, &seq, &rat(1, 100), 10, 20).unwrap();
        assert_eq!(r.selected.iter().map(|s| s.m).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(r.positions, vec![1, 3, 5]);
        // with budget 2 the term 4 is taken: C = B minus T^{-3}(T^3 B Δ A) = {1}
        let r = nonrecurrent_set_from_rigidity(&sys, &a, &seq, &rat(2, 1), 10, 20).unwrap();
        assert_eq!(r.selected.len(), 3);
        assert_eq!(r.positions, vec![1]);
        assert_eq!(r.delta_sum, rat(4, 12));
    }

    #[test]
    fn rejects_recurrent_a() {
        let sys = CyclicSystem::new(4).unwrap();
        assert!(nonrecurrent_set_from_rigidity(&sys, &sys.set([0, 1]), &IntSequence::powers(2), &rat(1, 100), 5, 5)
            .is_err());
    }
}
