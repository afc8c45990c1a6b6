//! Short vectors of shifted lattices and coset theta series.
//!
//! The search runs on machine integers: coordinates `x = (x0, x1, x2)` in the
//! basis of `L`, constrained to `x ≡ ν (mod a)`, with `x2` outermost. Every
//! interval endpoint is an exact integer square-root bound.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::arith::{ceil_div, factorize, floor_div, isqrt_u128, to_i128, to_u64};
use crate::coset::Coset;
use crate::error::{Error, Result};
use crate::linalg::{IntMat3, Vec3};
use crate::qseries::QSeries;

type G = [[i128; 3]; 3];

const ENTRY_LIMIT: i128 = 1 << 25;
const BOUND_LIMIT: i128 = 1 << 50;

/// The data of `aL + ν` as machine integers.
#[derive(Clone, Debug)]
pub(crate) struct Kernel {
    pub g: G,
    pub a: i128,
    pub nu: [i128; 3],
}

fn isqrt(n: i128) -> i128 {
    debug_assert!(n >= 0);
    isqrt_u128(n as u128) as i128
}

/// First integer `≥ lo` congruent to `r` mod `m`.
fn first_congruent(lo: i128, r: i128, m: i128) -> i128 {
    lo + (r - lo).rem_euclid(m)
}

impl Kernel {
    pub fn new(c: &Coset) -> Result<Self> {
        Kernel::from_parts(c.gram(), c.modulus(), c.shift())
    }

    pub fn from_parts(gram: &IntMat3, a: &BigInt, nu: &Vec3) -> Result<Self> {
        let g = gram.to_i128()?;
        if g.iter().flatten().any(|x| x.abs() >= ENTRY_LIMIT) {
            return Err(Error::Overflow(format!("gram entries {gram:?}")));
        }
        let a = to_i128(a)?;
        if a >= ENTRY_LIMIT {
            return Err(Error::Overflow(a.to_string()));
        }
        let nu = [to_i128(&nu[0])?, to_i128(&nu[1])?, to_i128(&nu[2])?];
        Ok(Kernel { g, a, nu })
    }

    fn check_bound(bound: i128) -> Result<()> {
        if !(0..BOUND_LIMIT).contains(&bound) {
            return Err(Error::Overflow(format!("norm bound {bound}")));
        }
        Ok(())
    }

    fn det(&self) -> i128 {
        crate::linalg::det_i128(&self.g)
    }

    fn m01(&self) -> i128 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[0][1]
    }

    /// Admissible `x2` values, in increasing order.
    fn x2_values(&self, bound: i128) -> Vec<i128> {
        // det · x2² ≤ m01 · bound
        let s = isqrt(self.m01() * bound / self.det());
        let mut out = Vec::new();
        let mut x2 = first_congruent(-s, self.nu[2], self.a);
        while x2 <= s {
            out.push(x2);
            x2 += self.a;
        }
        out
    }

    /// Calls `f(x1, lo, hi, lin, rest)` for every admissible `x1`, where
    /// `[lo, hi]` is the integer range for `x0` before the congruence
    /// condition, and `Q(x) = g00·x0² + 2·lin·x0 + rest`.
    fn for_each_x1<F: FnMut(i128, i128, i128, i128, i128)>(&self, x2: i128, bound: i128, mut f: F) {
        let g = &self.g;
        let g00 = g[0][0];
        let m01 = self.m01();
        let e = g00 * g[1][2] - g[0][1] * g[0][2];
        // (m01·x1 + e·x2)² ≤ m01·g00·bound − g00·det·x2²
        let d = m01 * g00 * bound - g00 * self.det() * x2 * x2;
        if d < 0 {
            return;
        }
        let s = isqrt(d);
        let lo1 = ceil_div(-e * x2 - s, m01);
        let hi1 = floor_div(-e * x2 + s, m01);
        let mut x1 = first_congruent(lo1, self.nu[1], self.a);
        while x1 <= hi1 {
            let lin = g[0][1] * x1 + g[0][2] * x2;
            let rest = g[1][1] * x1 * x1 + 2 * g[1][2] * x1 * x2 + g[2][2] * x2 * x2;
            // (g00·x0 + lin)² ≤ g00·bound − (g00·rest − lin²)
            let r = g00 * bound - (g00 * rest - lin * lin);
            if r >= 0 {
                let s0 = isqrt(r);
                let lo0 = ceil_div(-lin - s0, g00);
                let hi0 = floor_div(-lin + s0, g00);
                f(x1, lo0, hi0, lin, rest);
            }
            x1 += self.a;
        }
    }

    fn for_each_in_layer<F: FnMut([i128; 3], i128)>(&self, x2: i128, bound: i128, mut f: F) {
        let g00 = self.g[0][0];
        let a = self.a;
        let nu0 = self.nu[0];
        self.for_each_x1(x2, bound, |x1, lo0, hi0, lin, rest| {
            let mut x0 = first_congruent(lo0, nu0, a);
            while x0 <= hi0 {
                let q = g00 * x0 * x0 + 2 * lin * x0 + rest;
                f([x0, x1, x2], q);
                x0 += a;
            }
        });
    }

    /// All `x` in the coset with `Q(x) ≤ bound`, unordered.
    pub fn vectors(&self, bound: i128) -> Result<Vec<([i128; 3], i128)>> {
        Kernel::check_bound(bound)?;
        let mut out = Vec::new();
        for x2 in self.x2_values(bound) {
            self.for_each_in_layer(x2, bound, |x, q| out.push((x, q)));
        }
        Ok(out)
    }

    /// Vectors with `Q(x) = norm`.
    pub fn vectors_of_norm(&self, norm: i128) -> Result<Vec<[i128; 3]>> {
        Kernel::check_bound(norm)?;
        let mut out = Vec::new();
        for x2 in self.x2_values(norm) {
            self.for_each_in_layer(x2, norm, |x, q| {
                if q == norm {
                    out.push(x)
                }
            });
        }
        Ok(out)
    }

    /// `r(n)` for `0 ≤ n ≤ bound`.
    pub fn counts(&self, bound: u64) -> Result<Vec<u64>> {
        let b = bound as i128;
        Kernel::check_bound(b)?;
        let layers = self.x2_values(b);
        let merged = layers
            .par_iter()
            .map(|&x2| {
                let mut c = vec![0u64; bound as usize + 1];
                self.for_each_in_layer(x2, b, |_, q| c[q as usize] += 1);
                c
            })
            .reduce(
                || vec![0u64; bound as usize + 1],
                |mut acc, c| {
                    acc.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                    acc
                },
            );
        Ok(merged)
    }

    /// Same coset in the basis `e_i ↦ Σ_j u[j][i] e_j`.
    fn transformed(&self, u: &G, uinv: &G) -> Kernel {
        let mut g = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        g[i][j] += u[k][i] * self.g[k][l] * u[l][j];
                    }
                }
            }
        }
        let nu = std::array::from_fn(|i| {
            (0..3)
                .map(|j| uinv[i][j] * self.nu[j])
                .sum::<i128>()
                .rem_euclid(self.a)
        });
        Kernel { g, a: self.a, nu }
    }

    /// `r(p²n)` for `0 ≤ n ≤ bound`.
    ///
    /// For odd `p` prime to `a` the innermost coordinate is restricted to the
    /// roots of `Q ≡ 0 (mod p²)`, so only the vectors that count are visited.
    pub fn counts_scaled(&self, p: u64, bound: u64) -> Result<Vec<u64>> {
        let p = p as i128;
        let p2 = p * p;
        let big = p2
            .checked_mul(bound as i128)
            .ok_or_else(|| Error::Overflow(format!("{p}^2 * {bound}")))?;
        Kernel::check_bound(big)?;
        let unit_diag = |k: &Kernel| k.g[0][0].rem_euclid(p) != 0;
        let fast = p % 2 == 1 && self.a % p != 0;
        let k = if !fast || unit_diag(self) {
            Some(self.clone())
        } else {
            candidate_bases()
                .iter()
                .map(|(u, ui)| self.transformed(u, ui))
                .find(unit_diag)
        };
        let k = match (fast, k) {
            (true, Some(k)) => k,
            _ => {
                // even p, p | a, or no basis vector of unit norm mod p: plain filter
                let mut c = vec![0u64; bound as usize + 1];
                for x2 in self.x2_values(big) {
                    self.for_each_in_layer(x2, big, |_, q| {
                        if q % p2 == 0 {
                            c[(q / p2) as usize] += 1;
                        }
                    });
                }
                return Ok(c);
            }
        };
        let roots = SqrtTable::new(p);
        let a = k.a;
        let m = p2 * a;
        let a_inv_p2 = crate::arith::mod_inverse_u64(a as u64, p2 as u64).unwrap() as i128;
        let layers = k.x2_values(big);
        let merged = layers
            .par_iter()
            .map(|&x2| {
                let mut c = vec![0u64; bound as usize + 1];
                let g00 = k.g[0][0];
                let g00_inv =
                    crate::arith::mod_inverse_u64(g00.rem_euclid(p2) as u64, p2 as u64).unwrap()
                        as i128;
                k.for_each_x1(x2, big, |_, lo0, hi0, lin, rest| {
                    // g00·y² + 2·lin·y + rest ≡ 0 (mod p²) ⟺ (g00·y + lin)² ≡ lin² − g00·rest
                    let disc = (lin * lin - g00 * rest).rem_euclid(p2);
                    for &z in roots.roots(disc) {
                        let y = (z - lin).rem_euclid(p2) * g00_inv % p2;
                        // x0 ≡ y (mod p²), x0 ≡ ν0 (mod a)
                        let r = crt(y, p2, k.nu[0], a, a_inv_p2);
                        let mut x0 = first_congruent(lo0, r, m);
                        while x0 <= hi0 {
                            let q = g00 * x0 * x0 + 2 * lin * x0 + rest;
                            debug_assert_eq!(q % p2, 0);
                            c[(q / p2) as usize] += 1;
                            x0 += m;
                        }
                    }
                });
                c
            })
            .reduce(
                || vec![0u64; bound as usize + 1],
                |mut acc, c| {
                    acc.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                    acc
                },
            );
        Ok(merged)
    }
}

/// `x ≡ r1 (mod m1)`, `x ≡ r2 (mod m2)`, given `m2⁻¹ mod m1`.
fn crt(r1: i128, m1: i128, r2: i128, m2: i128, m2_inv_mod_m1: i128) -> i128 {
    // x = r2 + m2·t with m2·t ≡ r1 − r2 (mod m1)
    let t = ((r1 - r2).rem_euclid(m1) * m2_inv_mod_m1).rem_euclid(m1);
    (r2 + m2 * t).rem_euclid(m1 * m2)
}

/// Unimodular changes of basis making some vector `e_i` or `e_i + e_j` the
/// first basis vector, with their inverses.
fn candidate_bases() -> Vec<(G, G)> {
    let perm = |i: usize, j: usize, k: usize| {
        let mut u = [[0i128; 3]; 3];
        u[i][0] = 1;
        u[j][1] = 1;
        u[k][2] = 1;
        u
    };
    let inv = |u: &G| {
        let m = IntMat3::from_i128(*u).to_rat().inverse().unwrap().to_int().unwrap();
        m.to_i128().unwrap()
    };
    let mut out = Vec::new();
    for (i, j, k) in [(1, 0, 2), (2, 1, 0)] {
        let u = perm(i, j, k);
        out.push((u, inv(&u)));
    }
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let mut u = perm(i, j, k);
        u[j][0] = 1;
        out.push((u, inv(&u)));
    }
    out
}

/// Square roots modulo `p²`.
struct SqrtTable {
    roots: Vec<Vec<i128>>,
}

impl SqrtTable {
    fn new(p: i128) -> Self {
        let p2 = p * p;
        let mut roots = vec![Vec::new(); p2 as usize];
        for z in 0..p2 {
            roots[(z * z % p2) as usize].push(z);
        }
        SqrtTable { roots }
    }

    fn roots(&self, r: i128) -> &[i128] {
        &self.roots[r as usize]
    }
}

fn to_bound(bound: &BigInt) -> Result<i128> {
    if bound < &BigInt::from(0) {
        return Ok(-1);
    }
    to_i128(bound)
}

/// All elements of the coset with `Q(x) ≤ bound`, in lattice coordinates,
/// sorted lexicographically.
pub fn short_vectors(c: &Coset, bound: &BigInt) -> Result<Vec<Vec3>> {
    let b = to_bound(bound)?;
    if b < 0 {
        return Ok(Vec::new());
    }
    let k = Kernel::new(c)?;
    let mut v: Vec<[i128; 3]> = k.vectors(b)?.into_iter().map(|(x, _)| x).collect();
    v.sort();
    Ok(v.into_iter().map(|x| x.map(BigInt::from)).collect())
}

/// Elements of the coset of norm exactly `n`, sorted lexicographically.
pub fn vectors_of_norm(c: &Coset, n: &BigInt) -> Result<Vec<Vec3>> {
    let k = Kernel::new(c)?;
    let mut v = k.vectors_of_norm(to_i128(n)?)?;
    v.sort();
    Ok(v.into_iter().map(|x| x.map(BigInt::from)).collect())
}

/// Representation numbers `r(n, aL+ν)` for `0 ≤ n ≤ precision`.
pub fn theta_counts(c: &Coset, precision: u64) -> Result<Vec<u64>> {
    Kernel::new(c)?.counts(precision)
}

pub fn theta_series(c: &Coset, precision: u64) -> Result<QSeries> {
    Ok(QSeries::from_counts(&theta_counts(c, precision)?))
}

/// `r(p²n, aL+ν)` for `0 ≤ n ≤ precision`.
pub fn theta_counts_scaled(c: &Coset, p: u64, precision: u64) -> Result<Vec<u64>> {
    Kernel::new(c)?.counts_scaled(p, precision)
}

/// `⌈M·∏_{p|M}(1 + 1/p) / 8⌉` with `M = 4·N_L·a²`.
pub fn default_precision(c: &Coset) -> Result<u64> {
    let m = to_u64(&c.theta_level())?;
    let mut num = m as u128;
    let mut den = 8u128;
    for (p, _) in factorize(m) {
        num *= (p + 1) as u128;
        den *= p as u128;
    }
    Ok(num.div_ceil(den) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;

    fn brute(c: &Coset, bound: i64) -> Vec<Vec3> {
        let mut out = Vec::new();
        let r = 12;
        for x0 in -r..=r {
            for x1 in -r..=r {
                for x2 in -r..=r {
                    let x = int_vec([x0, x1, x2]);
                    if c.contains(&x) && c.norm_of(&x) <= BigInt::from(bound) {
                        out.push(x);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn short_vector_examples() {
        let i3 = Coset::from_gram(IntMat3::identity(), 1, [0, 0, 0]).unwrap();
        let v = short_vectors(&i3, &2.into()).unwrap();
        assert_eq!(v.len(), 19);
        assert_eq!(v, brute(&i3, 2));
        let c = Coset::from_gram(IntMat3::identity(), 2, [1, 1, 1]).unwrap();
        let v = short_vectors(&c, &3.into()).unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|x| x.iter().all(|t| t.magnitude() == &1u32.into())));
        let c = Coset::from_gram(IntMat3::identity(), 12, [5, 5, 5]).unwrap();
        assert!(short_vectors(&c, &74.into()).unwrap().is_empty());
        assert_eq!(
            short_vectors(&c, &75.into()).unwrap(),
            vec![int_vec([5, 5, 5])]
        );
        assert!(short_vectors(&c, &(-1).into()).unwrap().is_empty());
    }

    #[test]
    fn theta_examples() {
        let i3 = Coset::from_gram(IntMat3::identity(), 1, [0, 0, 0]).unwrap();
        let t = theta_counts(&i3, 9).unwrap();
        assert_eq!(t, vec![1, 6, 12, 8, 6, 24, 24, 0, 12, 30]);
        let c = Coset::from_gram(IntMat3::identity(), 2, [1, 1, 1]).unwrap();
        let t = theta_counts(&c, 11).unwrap();
        assert_eq!(t[3], 8);
        assert_eq!(t[11], 24);
        assert!((0..11).filter(|&n| n != 3).all(|n| t[n] == 0));
        let c = Coset::from_gram(IntMat3::identity(), 12, [5, 5, 5]).unwrap();
        assert!(theta_counts(&c, 75).unwrap()[75] >= 1);
    }

    #[test]
    fn scaled_counts_match_direct() {
        let grams = [
            IntMat3::identity(),
            IntMat3::from_i64([[2, 1, 0], [1, 3, 1], [0, 1, 5]]),
            IntMat3::from_i64([[2, 1, 1], [1, 2, 1], [1, 1, 2]]),
            IntMat3::from_i64([[6, 3, 3], [3, 6, 3], [3, 3, 6]]),
            IntMat3::from_i64([[10, 5, 0], [5, 4, 1], [0, 1, 7]]),
        ];
        for g in grams {
            for (a, nu) in [(1, [0, 0, 0]), (2, [1, 0, 1]), (3, [1, 2, 0]), (4, [1, 1, 3])] {
                let c = Coset::from_gram(g.clone(), a, nu).unwrap();
                for p in [2u64, 3, 5, 7] {
                    let bound = 12;
                    let direct = theta_counts(&c, bound * p * p).unwrap();
                    let want: Vec<u64> =
                        (0..=bound).map(|n| direct[(n * p * p) as usize]).collect();
                    assert_eq!(theta_counts_scaled(&c, p, bound).unwrap(), want, "{c} p={p}");
                }
            }
        }
    }

    #[test]
    fn default_precision_example() {
        let c = Coset::from_gram(IntMat3::identity(), 12, [5, 5, 5]).unwrap();
        assert_eq!(default_precision(&c).unwrap(), 144);
        let i3 = Coset::from_gram(IntMat3::identity(), 1, [0, 0, 0]).unwrap();
        assert_eq!(default_precision(&i3).unwrap(), 1);
    }
}
