//! Exact 3×3 integer and rational matrices: Hermite normal form, invariant
//! factors and Gram-matrix reduction.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::to_i128;
use crate::error::{Error, Result};

pub type Vec3 = [BigInt; 3];
pub type RatVec3 = [BigRational; 3];

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat3(pub [[BigInt; 3]; 3]);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMat3(pub [[BigRational; 3]; 3]);

fn zero_vec() -> Vec3 {
    [BigInt::zero(), BigInt::zero(), BigInt::zero()]
}

pub fn int_vec(v: [i64; 3]) -> Vec3 {
    v.map(BigInt::from)
}

pub fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

impl IntMat3 {
    pub fn zero() -> Self {
        IntMat3([zero_vec(), zero_vec(), zero_vec()])
    }

    pub fn identity() -> Self {
        Self::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn from_i64(m: [[i64; 3]; 3]) -> Self {
        IntMat3(m.map(|r| r.map(BigInt::from)))
    }

    pub fn from_i128(m: [[i128; 3]; 3]) -> Self {
        IntMat3(m.map(|r| r.map(BigInt::from)))
    }

    pub fn diag(d: [i64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = BigInt::from(x);
        }
        m
    }

    pub fn to_i128(&self) -> Result<[[i128; 3]; 3]> {
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = to_i128(&self.0[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn to_rat(&self) -> RatMat3 {
        RatMat3(self.0.clone().map(|r| r.map(BigRational::from_integer)))
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        IntMat3(std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        IntMat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| &a[i][k] * &b[k][j]).sum())
        }))
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        std::array::from_fn(|i| (0..3).map(|k| &self.0[i][k] * &v[k]).sum())
    }

    pub fn column(&self, j: usize) -> Vec3 {
        std::array::from_fn(|i| self.0[i][j].clone())
    }

    pub fn det(&self) -> BigInt {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn is_symmetric(&self) -> bool {
        let m = &self.0;
        m[0][1] == m[1][0] && m[0][2] == m[2][0] && m[1][2] == m[2][1]
    }

    /// Sylvester's criterion.
    pub fn is_positive_definite(&self) -> bool {
        let m = &self.0;
        let d1 = m[0][0].clone();
        let d2 = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        d1.is_positive() && d2.is_positive() && self.det().is_positive()
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quad(&self, v: &Vec3) -> BigInt {
        let mv = self.mul_vec(v);
        (0..3).map(|i| &v[i] * &mv[i]).sum()
    }

    pub fn bilinear(&self, u: &Vec3, v: &Vec3) -> BigInt {
        let mv = self.mul_vec(v);
        (0..3).map(|i| &u[i] * &mv[i]).sum()
    }

    /// gcd of the `k × k` minors, for `k = 1, 2, 3`.
    pub fn determinantal_divisors(&self) -> [BigInt; 3] {
        let m = &self.0;
        let mut g1 = BigInt::zero();
        for row in m {
            for x in row {
                g1 = g1.gcd(x);
            }
        }
        let mut g2 = BigInt::zero();
        for (r1, r2) in [(0, 1), (0, 2), (1, 2)] {
            for (c1, c2) in [(0, 1), (0, 2), (1, 2)] {
                let minor = &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
                g2 = g2.gcd(&minor);
            }
        }
        [g1, g2, self.det().abs()]
    }
}

impl RatMat3 {
    pub fn identity() -> Self {
        IntMat3::identity().to_rat()
    }

    pub fn from_i64(m: [[i64; 3]; 3]) -> Self {
        IntMat3::from_i64(m).to_rat()
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        RatMat3(std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        RatMat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(BigRational::zero(), |acc, k| acc + &a[i][k] * &b[k][j])
            })
        }))
    }

    pub fn mul_int(&self, other: &IntMat3) -> Self {
        self.mul(&other.to_rat())
    }

    pub fn mul_vec(&self, v: &RatVec3) -> RatVec3 {
        std::array::from_fn(|i| {
            (0..3).fold(BigRational::zero(), |acc, k| acc + &self.0[i][k] * &v[k])
        })
    }

    pub fn mul_int_vec(&self, v: &Vec3) -> RatVec3 {
        self.mul_vec(&v.clone().map(BigRational::from_integer))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        RatMat3(self.0.clone().map(|r| r.map(|x| x * s)))
    }

    pub fn det(&self) -> BigRational {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::Singular);
        }
        let m = &self.0;
        let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
            &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1]
        };
        // adjugate: inv[i][j] = cofactor(j, i) / det
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Ok(RatMat3(adj.map(|r| r.map(|x| x / &d))))
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_integer())
    }

    pub fn to_int(&self) -> Option<IntMat3> {
        if !self.is_integral() {
            return None;
        }
        Some(IntMat3(self.0.clone().map(|r| r.map(|x| x.to_integer()))))
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator(&self) -> BigInt {
        self.0
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    pub fn column(&self, j: usize) -> RatVec3 {
        std::array::from_fn(|i| self.0[i][j].clone())
    }
}

impl fmt::Display for RatMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Column Hermite normal form of a nonsingular integer matrix: `H = M·U` with
/// `U` unimodular, `H` upper triangular, positive diagonal and
/// `0 <= H[i][j] < H[i][i]` for `j > i`.
pub fn hnf_int(m: &IntMat3) -> Result<IntMat3> {
    if m.det().is_zero() {
        return Err(Error::Singular);
    }
    hnf_columns((0..3).map(|j| m.column(j)).collect())
}

/// Hermite normal form of the rank-3 module spanned by arbitrarily many
/// integer columns.
pub fn hnf_columns(mut active: Vec<Vec3>) -> Result<IntMat3> {
    let mut pivots: [Option<Vec3>; 3] = [None, None, None];
    for r in (0..3).rev() {
        loop {
            let mut nz: Vec<usize> = (0..active.len())
                .filter(|&k| !active[k][r].is_zero())
                .collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&x, &y| active[x][r].abs().cmp(&active[y][r].abs()));
            let piv = active[nz[0]].clone();
            for &k in &nz[1..] {
                let q = active[k][r].div_floor(&piv[r]);
                for i in 0..3 {
                    let t = &piv[i] * &q;
                    active[k][i] -= t;
                }
            }
        }
        let k = (0..active.len())
            .find(|&k| !active[k][r].is_zero())
            .ok_or(Error::Singular)?;
        let mut v = active.swap_remove(k);
        if v[r].is_negative() {
            v = v.map(|x| -x);
        }
        pivots[r] = Some(v);
    }
    let cols: Vec<Vec3> = pivots.into_iter().map(|v| v.unwrap()).collect();
    let mut h: [[BigInt; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()));
    for j in 0..3 {
        for i in (0..j).rev() {
            let q = h[i][j].div_floor(&h[i][i]);
            if !q.is_zero() {
                for row in h.iter_mut() {
                    let t = &row[i] * &q;
                    row[j] -= t;
                }
            }
        }
    }
    Ok(IntMat3(h))
}

/// Canonical basis of the module spanned by rational vectors (rank 3).
pub fn module_basis(gens: &[RatVec3]) -> Result<RatMat3> {
    let d = gens
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let dq = BigRational::from_integer(d.clone());
    let cols = gens
        .iter()
        .map(|v| v.clone().map(|x| (x * &dq).to_integer()))
        .collect();
    let h = hnf_columns(cols)?;
    Ok(h.to_rat().scale(&BigRational::new(BigInt::one(), d)))
}

/// Column Hermite normal form of a nonsingular rational matrix, i.e. the
/// canonical basis of the `ℤ`-module spanned by its columns.
pub fn hnf(m: &RatMat3) -> Result<RatMat3> {
    let d = m.denominator();
    let scaled = m
        .scale(&BigRational::from_integer(d.clone()))
        .to_int()
        .expect("scaled by common denominator");
    let h = hnf_int(&scaled)?;
    Ok(h.to_rat().scale(&BigRational::new(BigInt::one(), d)))
}

/// Basis of the intersection of two full-rank modules in the same space,
/// computed as the dual of the sum of the duals.
pub fn intersect(b1: &RatMat3, b2: &RatMat3) -> Result<RatMat3> {
    let d1 = b1.inverse()?.transpose();
    let d2 = b2.inverse()?.transpose();
    let gens: Vec<RatVec3> = (0..3).map(|j| d1.column(j)).chain((0..3).map(|j| d2.column(j))).collect();
    let sum = module_basis(&gens)?;
    hnf(&sum.inverse()?.transpose())
}

/// `[sup : sub]` for full-rank modules `sub ⊆ sup`, as a rational number
/// (it is an integer exactly when the determinant ratio is).
pub fn index(sub: &RatMat3, sup: &RatMat3) -> Result<BigRational> {
    let r = sub.det() / sup.det();
    if r.is_zero() {
        return Err(Error::Singular);
    }
    Ok(r.abs())
}

/// Invariant factors of the module spanned by the columns of `sub` inside
/// the module spanned by the columns of `lat` (both nonsingular, same space).
pub fn invariant_factors(sub: &RatMat3, lat: &RatMat3) -> Result<[BigInt; 3]> {
    let coords = lat.inverse()?.mul(sub);
    let c = coords.to_int().ok_or(Error::NotSublattice)?;
    if c.det().is_zero() {
        return Err(Error::Singular);
    }
    let [g1, g2, g3] = c.determinantal_divisors();
    Ok([g1.clone(), &g2 / &g1, &g3 / &g2])
}

/// Reduces a positive definite integral Gram matrix. Returns the reduced Gram
/// matrix and a unimodular `U` with `reduced = Uᵀ·gram·U` (columns of `U` are
/// the new basis vectors in old coordinates).
///
/// Pairwise Lagrange steps followed by exhaustive small-coefficient
/// corrections over the other two vectors; basis vectors end sorted by norm.
pub fn reduce_gram(gram: &[[i128; 3]; 3]) -> ([[i128; 3]; 3], [[i128; 3]; 3]) {
    let mut g = *gram;
    let mut u = [[1i128, 0, 0], [0, 1, 0], [0, 0, 1]];

    // b_i <- b_i + c * b_j
    fn add_multiple(g: &mut [[i128; 3]; 3], u: &mut [[i128; 3]; 3], i: usize, j: usize, c: i128) {
        if c == 0 {
            return;
        }
        for row in u.iter_mut() {
            row[i] += c * row[j];
        }
        let gij = g[i][j];
        let gjj = g[j][j];
        g[i][i] += 2 * c * gij + c * c * gjj;
        for k in 0..3 {
            if k != i {
                g[i][k] += c * g[j][k];
                g[k][i] = g[i][k];
            }
        }
    }
    fn swap(g: &mut [[i128; 3]; 3], u: &mut [[i128; 3]; 3], i: usize, j: usize) {
        g.swap(i, j);
        for row in g.iter_mut() {
            row.swap(i, j);
        }
        for row in u.iter_mut() {
            row.swap(i, j);
        }
    }
    fn sort(g: &mut [[i128; 3]; 3], u: &mut [[i128; 3]; 3]) {
        for i in 0..3 {
            for j in 0..2 - i {
                if g[j][j] > g[j + 1][j + 1] {
                    swap(g, u, j, j + 1);
                }
            }
        }
    }

    loop {
        let mut changed = false;
        // Lagrange passes
        loop {
            let mut progress = false;
            for i in 0..3 {
                for j in 0..3 {
                    if i == j || g[j][j] > g[i][i] {
                        continue;
                    }
                    // nearest integer to -g_ij / g_jj
                    let c = -crate::arith::floor_div(2 * g[i][j] + g[j][j], 2 * g[j][j]);
                    if c != 0 {
                        let before = g[i][i];
                        add_multiple(&mut g, &mut u, i, j, c);
                        if g[i][i] < before {
                            progress = true;
                        }
                    }
                }
            }
            if !progress {
                break;
            }
            changed = true;
        }
        sort(&mut g, &mut u);
        // small coefficient corrections
        'outer: for i in 0..3 {
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for cj in -2i128..=2 {
                for ck in -2i128..=2 {
                    if cj == 0 && ck == 0 {
                        continue;
                    }
                    let norm = g[i][i]
                        + cj * cj * g[j][j]
                        + ck * ck * g[k][k]
                        + 2 * cj * g[i][j]
                        + 2 * ck * g[i][k]
                        + 2 * cj * ck * g[j][k];
                    if norm < g[i][i] {
                        add_multiple(&mut g, &mut u, i, j, cj);
                        add_multiple(&mut g, &mut u, i, k, ck);
                        changed = true;
                        break 'outer;
                    }
                }
            }
        }
        sort(&mut g, &mut u);
        if !changed {
            break;
        }
    }
    (g, u)
}

pub fn det_i128(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn transform_gram(gram: &[[i128; 3]; 3], u: &[[i128; 3]; 3]) -> [[i128; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0;
            for k in 0..3 {
                for l in 0..3 {
                    s += u[k][i] * gram[k][l] * u[l][j];
                }
            }
            s
        })
    })
}
