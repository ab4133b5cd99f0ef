//! Exact arithmetic helpers shared by every module.

pub mod bits;
pub mod floor_sum;
pub mod interval;
pub mod serde_big;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use bits::Bits;
pub use floor_sum::floor_sum;
pub use interval::Interval;

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_big(p: &BigUint, q: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(p.clone()), BigInt::from(q.clone()))
}

pub fn to_int(n: &BigUint) -> BigInt {
    BigInt::from(n.clone())
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Distance to the nearest integer, `||x||`.
pub fn dist_to_int(x: &BigRational) -> BigRational {
    let f = frac(x);
    let g = BigRational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// Rational to f64 that never overflows for huge numerator and denominator.
pub fn rat_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = x.numer();
    let d = x.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let n2 = n >> shift;
    let d2 = d >> shift;
    match (n2.to_f64(), d2.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => 0.0,
    }
}

/// `t mod 1` of the rational `num/den` as an f64 in `[0, 1)`.
pub fn angle_f64(num: &BigInt, den: &BigUint) -> f64 {
    let d = BigInt::from(den.clone());
    let r = num.mod_floor(&d);
    rat_to_f64(&BigRational::new(r, d))
}

pub fn pow_big(base: u64, exp: u64) -> BigUint {
    num_traits::pow::pow(BigUint::from(base), exp as usize)
}

/// Number of bits of `n` (0 for zero).
pub fn bitlen(n: &BigUint) -> u64 {
    n.bits()
}

/// Parse "p/q", "p", or a finite decimal "a.bcd" exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::InvalidParameter(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        let mant: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(mant, den);
        return Ok(if neg { -v } else { v });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// "p/q" (or "p" for integers).
pub fn fmt_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn nonneg(x: &BigInt) -> Option<BigUint> {
    if x.sign() == Sign::Minus {
        None
    } else {
        x.to_biguint()
    }
}

pub fn abs_rat(x: &BigRational) -> BigRational {
    x.abs()
}

/// Floor of a nonnegative rational as BigUint.
pub fn floor_nat(x: &BigRational) -> BigUint {
    x.floor().to_integer().to_biguint().unwrap_or_default()
}

/// Smallest integer `>= x` for a nonnegative rational.
pub fn ceil_nat(x: &BigRational) -> BigUint {
    x.ceil().to_integer().to_biguint().unwrap_or_default()
}

/// Integer square root, floor.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: &BigUint) -> u64 {
    if n.is_zero() || n.is_one() {
        return 0;
    }
    let b = n.bits();
    if (n - BigUint::one()).bits() < b {
        b - 1
    } else {
        b
    }
}
