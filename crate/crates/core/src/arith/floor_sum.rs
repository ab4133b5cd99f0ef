//! `sum_{i=0}^{n-1} floor((a*i + b)/m)` in O(log) big-integer steps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn floor_sum(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    assert!(m.is_positive(), "floor_sum modulus must be positive");
    if !n.is_positive() {
        return BigInt::zero();
    }
    let mut ans = BigInt::zero();
    let (qa, a) = a.div_mod_floor(m);
    let (qb, b) = b.div_mod_floor(m);
    let two = BigInt::from(2);
    ans += &qa * (n * (n - BigInt::one())) / &two;
    ans += &qb * n;
    ans + unsigned(n.clone(), m.clone(), a, b)
}

fn unsigned(mut n: BigInt, mut m: BigInt, mut a: BigInt, mut b: BigInt) -> BigInt {
    let two = BigInt::from(2);
    let mut ans = BigInt::zero();
    loop {
        if a >= m {
            let (q, r) = a.div_rem(&m);
            ans += (&n * (&n - BigInt::one())) / &two * q;
            a = r;
        }
        if b >= m {
            let (q, r) = b.div_rem(&m);
            ans += &n * q;
            b = r;
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        let (q, r) = y_max.div_rem(&m);
        n = q;
        b = r;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: i64, m: i64, a: i64, b: i64) -> i64 {
        (0..n).map(|i| (a * i + b).div_euclid(m)).sum()
    }

    #[test]
    fn small_cases() {
        let f = |n: i64, m: i64, a: i64, b: i64| floor_sum(&n.into(), &m.into(), &a.into(), &b.into());
        assert_eq!(f(4, 10, 6, 3), BigInt::from(brute(4, 10, 6, 3)));
        assert_eq!(f(0, 3, 1, 1), BigInt::zero());
        assert_eq!(f(5, 7, -3, -11), BigInt::from(brute(5, 7, -3, -11)));
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 0i64..300, m in 1i64..200, a in -500i64..500, b in -500i64..500) {
            let got = floor_sum(&n.into(), &m.into(), &a.into(), &b.into());
            prop_assert_eq!(got, BigInt::from(brute(n, m, a, b)));
        }
    }
}
