//! Elementary number theory on machine integers and big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Kronecker–Jacobi–Legendre symbol `(d / n)`.
pub fn kronecker(d: i128, n: i128) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut sign = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            sign = -1;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
    }
    sign * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol for odd positive `n` and `0 <= a < n`.
fn jacobi(mut a: i128, mut n: i128) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol on big integers, reduced to the machine kernel.
pub fn kronecker_big(d: &BigInt, n: &BigInt) -> Result<i32> {
    let n128 = to_i128(n)?;
    // (d/n) only depends on d modulo 4|n| when n != 0
    let d128 = if n128 != 0 {
        let m = BigInt::from(4) * n.abs();
        let r = d.mod_floor(&m);
        // keep the sign information needed for negative n
        if d.is_negative() {
            to_i128(&(r - &m))?
        } else {
            to_i128(&r)?
        }
    } else {
        to_i128(d).unwrap_or(2)
    };
    Ok(kronecker(d128, n128))
}

/// Inverse of `x` modulo `m`, in `[1, m)`; modulus one maps everything to 1.
pub fn mod_inverse(x: &BigInt, m: &BigInt) -> Result<BigInt> {
    if !m.is_positive() {
        return Err(Error::BadModulus(m.clone()));
    }
    if m.is_one() {
        return Ok(BigInt::one());
    }
    let e = x.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return Err(Error::NotInvertible {
            x: x.clone(),
            m: m.clone(),
        });
    }
    Ok(e.x.mod_floor(m))
}

pub fn mod_inverse_u64(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    let e = (x as i128).rem_euclid(m as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// Trial-division factorisation, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Splits `n = s * b^2` with `s` square-free; returns `(s, b)`.
pub fn squarefree_decomposition(n: u64) -> (u64, u64) {
    let mut s = 1;
    let mut b = 1;
    for (p, e) in factorize(n) {
        if e % 2 == 1 {
            s *= p;
        }
        b *= p.pow(e / 2);
    }
    (s, b)
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

pub fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

pub fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Overflow(x.to_string()))
}

pub fn to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64().ok_or_else(|| Error::Overflow(x.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_by_squares(d: i128, p: i128) -> i32 {
        let r = d.rem_euclid(p);
        if r == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-1, 3), -1);
        for d in -20..20 {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(-1, -1), -1);
    }

    #[test]
    fn kronecker_matches_residue_tables() {
        for p in [3i128, 5, 7, 11, 13, 37] {
            for d in -60..60 {
                assert_eq!(kronecker(d, p), legendre_by_squares(d, p), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for d1 in -15i128..15 {
            for d2 in -15i128..15 {
                for n in 1i128..30 {
                    assert_eq!(kronecker(d1 * d2, n), kronecker(d1, n) * kronecker(d2, n));
                }
            }
        }
        for d in -30i128..30 {
            for n1 in -12i128..12 {
                for n2 in -12i128..12 {
                    if n1 == 0 || n2 == 0 {
                        continue;
                    }
                    assert_eq!(
                        kronecker(d, n1 * n2),
                        kronecker(d, n1) * kronecker(d, n2),
                        "d={d} n1={n1} n2={n2}"
                    );
                }
            }
        }
    }

    #[test]
    fn kronecker_big_agrees() {
        for d in -40i64..40 {
            for n in -20i64..20 {
                assert_eq!(
                    kronecker_big(&BigInt::from(d), &BigInt::from(n)).unwrap(),
                    kronecker(d as i128, n as i128)
                );
            }
        }
    }

    #[test]
    fn mod_inverse_examples() {
        let inv = |x: i64, m: i64| mod_inverse(&BigInt::from(x), &BigInt::from(m));
        assert_eq!(inv(5, 12).unwrap(), BigInt::from(5));
        assert_eq!(inv(7, 12).unwrap(), BigInt::from(7));
        assert_eq!(inv(3, 1).unwrap(), BigInt::from(1));
        assert_eq!(inv(-1, 12).unwrap(), BigInt::from(11));
        assert!(matches!(inv(4, 12), Err(Error::NotInvertible { .. })));
        assert_eq!(mod_inverse_u64(13, 12), Some(1));
        assert_eq!(mod_inverse_u64(6, 9), None);
    }

    #[test]
    fn factor_helpers() {
        assert_eq!(factorize(576), vec![(2, 6), (3, 2)]);
        assert_eq!(squarefree_decomposition(48), (3, 4));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(isqrt_u128(99), 9);
        assert_eq!(isqrt_u128(100), 10);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(floor_div(-7, 2), -4);
    }
}
