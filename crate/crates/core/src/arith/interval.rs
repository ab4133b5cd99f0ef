//! Certified dyadic interval arithmetic: `[lo, hi] / 2^prec` with outward rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub prec: u32,
}

fn unit(prec: u32) -> BigInt {
    BigInt::one() << prec
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Interval {
    pub fn point_int(v: i64, prec: u32) -> Self {
        let x = BigInt::from(v) << prec;
        Interval { lo: x.clone(), hi: x, prec }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let num = r.numer() << prec;
        Interval { lo: floor_div(&num, r.denom()), hi: ceil_div(&num, r.denom()), prec }
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(self.lo.clone(), unit(self.prec))
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(self.hi.clone(), unit(self.prec))
    }

    pub fn width(&self) -> BigRational {
        self.upper() - self.lower()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.prec, o.prec);
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.prec, o.prec);
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, prec: self.prec }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.prec, o.prec);
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mn = c.iter().min().unwrap();
        let mx = c.iter().max().unwrap();
        let u = unit(self.prec);
        Interval { lo: floor_div(mn, &u), hi: ceil_div(mx, &u), prec: self.prec }
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        self.mul(&Interval::from_rational(r, self.prec))
    }

    /// Division by an interval that does not contain zero.
    pub fn div(&self, o: &Self) -> Option<Self> {
        assert_eq!(self.prec, o.prec);
        if o.lo.sign() != o.hi.sign() || o.lo.is_zero() || o.hi.is_zero() {
            return None;
        }
        let sa = [&self.lo << self.prec, &self.hi << self.prec];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for a in &sa {
            for b in [&o.lo, &o.hi] {
                let f = floor_div(a, b);
                let c = ceil_div(a, b);
                lo = Some(match lo {
                    Some(v) if v <= f => v,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(v) if v >= c => v,
                    _ => c,
                });
            }
        }
        Some(Interval { lo: lo.unwrap(), hi: hi.unwrap(), prec: self.prec })
    }

    pub fn square(&self) -> Self {
        let s = self.mul(self);
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval { lo: BigInt::zero(), hi: s.hi, prec: s.prec }
        } else {
            s
        }
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower() <= r && r <= &self.upper()
    }

    /// Certified enclosure of pi.
    pub fn pi(prec: u32) -> Self {
        let guard = 32;
        let p = prec + guard;
        let (a, ea) = atan_inv(5, p);
        let (b, eb) = atan_inv(239, p);
        let s = a * 16 - b * 4;
        let err = BigInt::from(16 * ea + 4 * eb);
        let g = unit(guard);
        Interval { lo: floor_div(&(&s - &err), &g), hi: ceil_div(&(&s + &err), &g), prec }
    }

    /// Certified enclosure of sin over an interval inside `[0, 2]`.
    ///
    /// sin is increasing on `[0, pi/2]`; above 1.5 the upper bound is clamped to 1,
    /// which is always valid, and the lower end uses the endpoint minimum.
    pub fn sin(&self) -> Self {
        assert!(!self.lo.is_negative(), "sin enclosure expects a nonnegative argument");
        assert!(self.hi <= (BigInt::from(2) << self.prec), "sin enclosure expects argument <= 2");
        let guard = 32;
        let p = self.prec + guard;
        let lo_pt = &self.lo << guard;
        let hi_pt = &self.hi << guard;
        let (slo, elo) = sin_point(&lo_pt, p);
        let (shi, ehi) = sin_point(&hi_pt, p);
        let g = unit(guard);
        let one = unit(p);
        let three_halves = (BigInt::from(3) << p) / 2;
        let mut lower = &slo - BigInt::from(elo);
        let mut upper = &shi + BigInt::from(ehi);
        if hi_pt > three_halves {
            // possibly past the maximum: min over endpoints for the low side
            let alt = &shi - BigInt::from(ehi);
            if alt < lower {
                lower = alt;
            }
            upper = one;
        }
        Interval { lo: floor_div(&lower, &g), hi: ceil_div(&upper, &g), prec: self.prec }
    }
}

/// atan(1/x) in fixed point with `p` fractional bits, and an error bound in units.
fn atan_inv(x: u64, p: u32) -> (BigInt, u64) {
    let xb = BigInt::from(x);
    let x2 = &xb * &xb;
    let mut power = unit(p) / &xb; // floor(2^p / x^(2k+1))
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut terms = 0u64;
    while !power.is_zero() {
        let t = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += t;
        } else {
            sum -= t;
        }
        power /= &x2;
        k += 1;
        terms += 1;
    }
    (sum, 2 * terms + 2)
}

/// sin(v / 2^p) for 0 <= v <= 2 * 2^p, with an error bound in units of 2^-p.
fn sin_point(v: &BigInt, p: u32) -> (BigInt, u64) {
    let u = unit(p);
    let v2 = (v * v) / &u;
    let mut term = v.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        if k.is_multiple_of(2) {
            sum += &term;
        } else {
            sum -= &term;
        }
        term = (&term * &v2) / &u / BigInt::from((2 * k + 2) * (2 * k + 3));
        k += 1;
    }
    // each step truncates by < 1 unit and perturbs later terms by < 1 unit in total;
    // the omitted alternating tail is below one unit as well
    (sum, 3 * k + 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn pi_encloses_known_digits() {
        let pi = Interval::pi(200);
        let lo = crate::arith::parse_rational("3.14159265358979323846264338327950288").unwrap();
        let hi = crate::arith::parse_rational("3.14159265358979323846264338327950289").unwrap();
        assert!(pi.lower() > lo && pi.upper() < hi);
        assert!(pi.width() < rat(1, 1i64 << 60));
    }

    #[test]
    fn sin_of_small_and_half_pi() {
        let x = Interval::from_rational(&rat(1, 2), 128);
        let s = x.sin();
        let f = 0.5f64.sin();
        assert!(crate::arith::rat_to_f64(&s.lower()) <= f + 1e-15);
        assert!(crate::arith::rat_to_f64(&s.upper()) >= f - 1e-15);
        let half_pi = Interval::pi(128).mul_rational(&rat(1, 2));
        let s = half_pi.sin();
        assert!(s.upper() <= rat(1, 1));
        assert!(s.lower() > rat(1, 1) - rat(1, 1i64 << 50));
    }

    #[test]
    fn division_brackets() {
        let a = Interval::from_rational(&rat(1, 3), 64);
        let b = Interval::from_rational(&rat(2, 7), 64);
        let q = a.div(&b).unwrap();
        assert!(q.contains(&rat(7, 6)));
        let z = Interval::from_rational(&rat(0, 1), 64);
        assert!(a.div(&z).is_none());
    }
}
