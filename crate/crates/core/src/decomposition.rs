//! Genus averages, Hecke operators `T(p²)` and the splitting of a coset
//! theta series into Eisenstein, unary and cuspidal parts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{
    factorize, is_squarefree, kronecker, mod_inverse, squarefree_decomposition, to_i128, to_u64,
};
use crate::classes::ClassList;
use crate::coset::Coset;
use crate::enumerate::{theta_counts, theta_counts_scaled, theta_series};
use crate::error::{Error, Result};
use crate::neighbors::{check_prime, neighbors};
use crate::qseries::QSeries;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Σ 1/o⁺` over the representatives.
pub fn mass(cl: &ClassList) -> BigRational {
    crate::classes::mass_of(&cl.representatives)
}

/// Weighted average `(1/mass)·Σ θ(s·rep)/o⁺(rep)` with every shift scaled by `s`.
pub fn theta_average_scaled(cl: &ClassList, s: &BigInt, precision: u64) -> Result<QSeries> {
    if cl.is_empty() {
        return Err(Error::EmptyClassList);
    }
    let parts: Vec<QSeries> = cl
        .representatives
        .par_iter()
        .map(|r| {
            let c = r.coset.scale_shift(s)?;
            let w = BigRational::new(BigInt::one(), BigInt::from(r.o_plus));
            Ok(theta_series(&c, precision)?.scale(&w))
        })
        .collect::<Result<_>>()?;
    let total = parts
        .iter()
        .fold(QSeries::zero(precision), |acc, t| acc.add(t));
    Ok(total.scale(&(BigRational::one() / mass(cl))))
}

/// Weighted theta average of a proper genus or spinor genus.
pub fn theta_average(cl: &ClassList, precision: u64) -> Result<QSeries> {
    theta_average_scaled(cl, &BigInt::one(), precision)
}

/// `T(p²)` applied to `θ(aL+ν)`, from three theta enumerations.
pub fn hecke_t_p2(c: &Coset, p: u64, precision: u64) -> Result<QSeries> {
    let scaled = theta_counts_scaled(c, p, precision)?;
    let pb = BigInt::from(p);
    if c.theta_level().mod_floor(&pb).is_zero() {
        return Ok(QSeries::from_counts(&scaled));
    }
    let pbar = mod_inverse(&pb, c.modulus())?;
    let r1 = theta_counts(&c.scale_shift(&pbar)?, precision)?;
    let r2 = theta_counts(&c.scale_shift(&(&pbar * &pbar))?, precision / (p * p))?;
    let d = to_i128(&c.discriminant())?;
    let pi = p as i128;
    let minus_one_p = kronecker(-1, pi) as i64;
    let last = kronecker(4 * d, pi * pi) as i64 * p as i64;
    let mut out = QSeries::zero(precision);
    for n in 0..=precision {
        let mid = minus_one_p * kronecker(4 * d * n as i128, pi) as i64;
        let mut b = int(scaled[n as usize] as i64) + int(mid * r1[n as usize] as i64);
        if n % (p * p) == 0 {
            b += int(last * r2[(n / (p * p)) as usize] as i64);
        }
        out.set(n, b);
    }
    Ok(out)
}

/// `T(p²)` on a weight-3/2 q-expansion whose character takes the value
/// `chi_p` at `p`: `b(n) = a(p²n) + χ(p)(−1/p)(n/p)a(n) + χ(p)²·p·a(n/p²)`.
pub fn hecke_weight_three_halves(f: &QSeries, p: u64, chi_p: i32) -> QSeries {
    let p2 = p * p;
    let precision = f.precision() / p2;
    let pi = p as i128;
    let mut out = QSeries::zero(precision);
    for n in 0..=precision {
        let mut b = f.coeff(p2 * n);
        let k = (chi_p * kronecker(-1, pi) * kronecker(n as i128, pi)) as i64;
        b += int(k) * f.coeff(n);
        if n % p2 == 0 {
            b += int((chi_p * chi_p) as i64 * p as i64) * f.coeff(n / p2);
        }
        out.set(n, b);
    }
    out
}

/// Outcome of comparing two q-expansions coefficientwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub check: String,
    pub prime: u64,
    pub precision: u64,
    pub violations: Vec<u64>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn new(check: &str, prime: u64, lhs: &QSeries, rhs: &QSeries) -> Self {
        IdentityReport {
            check: check.into(),
            prime,
            precision: lhs.precision().min(rhs.precision()),
            violations: lhs.differences(rhs),
        }
    }
}

/// Sum of the theta series of a list of cosets.
pub fn theta_sum(cosets: &[Coset], precision: u64) -> Result<QSeries> {
    let parts: Vec<QSeries> = cosets
        .par_iter()
        .map(|m| theta_series(m, precision))
        .collect::<Result<_>>()?;
    Ok(parts
        .iter()
        .fold(QSeries::zero(precision), |acc, t| acc.add(t)))
}

/// `T(p²)θ(aL+ν) = Σ_{aK+μ ∈ R_p(aL+ν)} θ(aK+μ)`.
pub fn verify_eichler(c: &Coset, p: u64, precision: u64) -> Result<IdentityReport> {
    check_prime(c, p)?;
    let lhs = hecke_t_p2(c, p, precision)?;
    let rhs = theta_sum(&neighbors(c, p)?.members, precision)?;
    Ok(IdentityReport::new("eichler", p, &lhs, &rhs))
}

/// `T(p²)θ_gen⁺(aL+ν) = (p+1)·θ_gen⁺(aL+p̄ν)`, with the right side averaged
/// over the shift-scaled representatives.
pub fn verify_genus_eigen(cl: &ClassList, p: u64, precision: u64) -> Result<IdentityReport> {
    if cl.is_empty() {
        return Err(Error::EmptyClassList);
    }
    check_prime(&cl.seed, p)?;
    let parts: Vec<QSeries> = cl
        .representatives
        .par_iter()
        .map(|r| {
            let w = BigRational::new(BigInt::one(), BigInt::from(r.o_plus));
            Ok(hecke_t_p2(&r.coset, p, precision)?.scale(&w))
        })
        .collect::<Result<_>>()?;
    let lhs = parts
        .iter()
        .fold(QSeries::zero(precision), |acc, t| acc.add(t))
        .scale(&(BigRational::one() / mass(cl)));
    let pbar = mod_inverse(&BigInt::from(p), cl.seed.modulus())?;
    let rhs = theta_average_scaled(cl, &pbar, precision)?.scale(&int(p as i64 + 1));
    Ok(IdentityReport::new("genus-eigen", p, &lhs, &rhs))
}

/// One square class `t·ℤ²` carrying nonzero coefficients of `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareClass {
    pub t: u64,
    /// `4·N_L·a² = 4t·t′·b²` with `t′` square-free.
    pub t_prime: u64,
    pub b: u64,
    /// `m ↦ U(t·m²)/m` on `1 ≤ m` within precision.
    pub sequence: Vec<(u64, BigRational)>,
}

#[derive(Clone, Debug, Default)]
pub struct SupportReport {
    pub square_classes: Vec<SquareClass>,
    pub failures: Vec<String>,
    pub twists_checked: usize,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn square_class_sequence(u: &QSeries, t: u64) -> Vec<(u64, BigRational)> {
    let mut out = Vec::new();
    let mut m = 1u64;
    while t * m * m <= u.precision() {
        out.push((m, u.coeff(t * m * m) / int(m as i64)));
        m += 1;
    }
    out
}

/// Checks the support structure of `U = θ_spn⁺ − θ_gen⁺`:
/// (i) nonzero coefficients sit on `t·m²` with `t` square-free and `4t | 4N_La²`;
/// (ii) `a(m) = U(t·m²)/m` vanishes for `b | m` and depends only on `m mod b`
/// for `m` prime to the level;
/// (iii) `a₁(nm) = a_{m̄}(n)·(−4t·d_L / m)` for `m` prime to the level, using the
/// supplied `U_s` (keyed by `s mod a`) for the shift-scaled class lists.
pub fn support_check(
    u: &QSeries,
    level_l: u64,
    a: u64,
    d_l: u64,
    twists: &BTreeMap<u64, QSeries>,
) -> SupportReport {
    let mut report = SupportReport::default();
    let big_m = 4 * level_l * a * a;
    let mut ts = Vec::new();
    for (n, _) in u.iter() {
        if n == 0 {
            report.failures.push("nonzero constant term".into());
            continue;
        }
        let (t, _) = squarefree_decomposition(n);
        if big_m % (4 * t) != 0 {
            report
                .failures
                .push(format!("index {n} lies in square class {t} with 4·{t} ∤ {big_m}"));
        }
        if !ts.contains(&t) {
            ts.push(t);
        }
    }
    ts.sort();
    for &t in &ts {
        if big_m % (4 * t) != 0 {
            continue;
        }
        let (t_prime, b) = squarefree_decomposition(big_m / (4 * t));
        let seq = square_class_sequence(u, t);
        let coprime = |m: u64| m.gcd(&big_m) == 1;
        for (m, v) in &seq {
            if m % b == 0 && !v.is_zero() {
                report
                    .failures
                    .push(format!("t = {t}: a({m}) = {v} is nonzero although {b} | {m}"));
            }
        }
        let mut by_residue: BTreeMap<u64, (u64, BigRational)> = BTreeMap::new();
        for (m, v) in seq.iter().filter(|(m, _)| coprime(*m)) {
            match by_residue.get(&(m % b)) {
                Some((m0, v0)) if v0 != v => report.failures.push(format!(
                    "t = {t}: a({m}) = {v} but a({m0}) = {v0} with {m} ≡ {m0} mod {b}"
                )),
                Some(_) => {}
                None => {
                    by_residue.insert(m % b, (*m, v.clone()));
                }
            }
        }
        if let Some(u1) = twists.get(&1) {
            let a1 = |k: u64| u1.coeff(t * k * k) / int(k as i64);
            let mut m = 2u64;
            while t * m * m <= u.precision() {
                if coprime(m) {
                    let mbar = crate::arith::mod_inverse_u64(m % a, a).unwrap() % a;
                    let key = if a == 1 { 1 } else { mbar };
                    if let Some(us) = twists.get(&key) {
                        let sign = kronecker(-4 * t as i128 * d_l as i128, m as i128);
                        let mut n = 1u64;
                        while t * (n * m) * (n * m) <= u.precision() {
                            let lhs = a1(n * m);
                            let rhs = us.coeff(t * n * n) / int(n as i64) * int(sign as i64);
                            report.twists_checked += 1;
                            if lhs != rhs {
                                report.failures.push(format!(
                                    "t = {t}: twist relation fails at n = {n}, m = {m}: {lhs} ≠ {rhs}"
                                ));
                            }
                            n += 1;
                        }
                    }
                }
                m += 1;
            }
        }
        report.square_classes.push(SquareClass {
            t,
            t_prime,
            b,
            sequence: seq,
        });
    }
    report
}

/// A function on the integers, periodic mod `modulus`, used as the
/// character in `h(z, ψ) = Σ_{n≥1} ψ(n)·n·q^{n²}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryCharacter {
    pub label: String,
    pub modulus: u64,
    pub values: Vec<i32>,
}

impl UnaryCharacter {
    /// The Kronecker character `(D/·)` of a fundamental discriminant.
    pub fn kronecker(d: i64) -> Self {
        let m = d.unsigned_abs();
        UnaryCharacter {
            label: format!("chi_{d}"),
            modulus: m,
            values: (0..m).map(|n| kronecker(d as i128, n as i128)).collect(),
        }
    }

    /// `δ_r − δ_{−r}` on the units mod `m`.
    pub fn odd_indicator(r: u64, m: u64) -> Self {
        let mut values = vec![0; m as usize];
        values[r as usize] += 1;
        values[((m - r) % m) as usize] -= 1;
        UnaryCharacter {
            label: format!("odd_{r}_mod_{m}"),
            modulus: m,
            values,
        }
    }

    pub fn value(&self, n: u64) -> i32 {
        self.values[(n % self.modulus) as usize]
    }
}

/// `h(t·u²·z, ψ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryTheta {
    pub t: u64,
    pub u: u64,
    pub psi: UnaryCharacter,
}

impl UnaryTheta {
    pub fn series(&self, precision: u64) -> QSeries {
        let mut out = QSeries::zero(precision);
        let step = self.t * self.u * self.u;
        let mut n = 1u64;
        while step * n * n <= precision {
            let v = self.psi.value(n) as i64 * n as i64;
            out.set(step * n * n, int(v));
            n += 1;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct UnaryFit {
    pub terms: Vec<(UnaryTheta, BigRational)>,
    pub residual: QSeries,
    pub candidate_t: Vec<u64>,
}

fn is_fundamental_discriminant(d: i64) -> bool {
    let m = d.rem_euclid(4);
    let abs = d.unsigned_abs();
    if m == 1 {
        return is_squarefree(abs);
    }
    if m == 0 {
        let q = d / 4;
        let r = q.rem_euclid(4);
        return (r == 2 || r == 3) && is_squarefree(q.unsigned_abs());
    }
    false
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let cur = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(cur.iter().map(|d| d * pk));
        }
    }
    out.sort();
    out
}

/// Candidate unary theta functions for square class `t`: odd real primitive
/// characters first, then odd indicator functions at the largest modulus.
fn unary_basis(t: u64, big_m: u64, include_indicators: bool) -> Vec<UnaryTheta> {
    let mut out = Vec::new();
    if big_m % (4 * t) != 0 {
        return out;
    }
    let rest = big_m / (4 * t);
    for u in divisors(rest) {
        if rest % (u * u) != 0 {
            continue;
        }
        let room = rest / (u * u);
        for m in divisors(room) {
            if room % (m * m) != 0 {
                continue;
            }
            let d = -(m as i64);
            if m > 1 && is_fundamental_discriminant(d) {
                out.push(UnaryTheta {
                    t,
                    u,
                    psi: UnaryCharacter::kronecker(d),
                });
            }
        }
        if include_indicators {
            // largest m with m² | room
            let m = divisors(room)
                .into_iter()
                .filter(|m| room % (m * m) == 0)
                .max()
                .unwrap();
            for r in 1..m {
                if 2 * r < m && r.gcd(&m) == 1 {
                    out.push(UnaryTheta {
                        t,
                        u,
                        psi: UnaryCharacter::odd_indicator(r, m),
                    });
                }
            }
        }
    }
    out
}

/// Exact least-index-first solve of `Σ c_i·h_i = target`; returns the
/// coefficients (zero for free or dependent columns).
fn solve(columns: &[QSeries], target: &QSeries) -> Vec<BigRational> {
    let prec = target.precision();
    let rows: Vec<u64> = (1..=prec)
        .filter(|&n| !target.coeff(n).is_zero() || columns.iter().any(|c| !c.coeff(n).is_zero()))
        .collect();
    let k = columns.len();
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|&n| {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c.coeff(n)).collect();
            row.push(target.coeff(n));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..k {
        let Some(pr) = (r..mat.len()).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(r, pr);
        let inv = BigRational::one() / &mat[r][col];
        for x in mat[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..mat.len() {
            if i != r && !mat[i][col].is_zero() {
                let f = mat[i][col].clone();
                for j in 0..=k {
                    let t = &mat[r][j] * &f;
                    mat[i][j] -= t;
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    let mut coeffs = vec![BigRational::zero(); k];
    for (row, col) in pivots {
        coeffs[col] = mat[row][k].clone();
    }
    coeffs
}

/// Expresses `U` through unary theta functions `h(t·u²·z, ψ)` with
/// `4t·m_ψ²·u² | 4·N_L·a²`, for the square classes `t` seen in its support.
pub fn fit_unary(u: &QSeries, level_l: u64, a: u64) -> UnaryFit {
    let big_m = 4 * level_l * a * a;
    let mut ts: Vec<u64> = u
        .iter()
        .filter(|(n, _)| *n > 0)
        .map(|(n, _)| squarefree_decomposition(n).0)
        .collect();
    ts.sort();
    ts.dedup();
    let attempt = |indicators: bool| {
        let basis: Vec<UnaryTheta> = ts
            .iter()
            .flat_map(|&t| unary_basis(t, big_m, indicators))
            .collect();
        let cols: Vec<QSeries> = basis.iter().map(|h| h.series(u.precision())).collect();
        let coeffs = solve(&cols, u);
        let mut fitted = QSeries::zero(u.precision());
        let mut terms = Vec::new();
        for ((h, col), c) in basis.into_iter().zip(&cols).zip(coeffs) {
            if !c.is_zero() {
                fitted = fitted.add(&col.scale(&c));
                terms.push((h, c));
            }
        }
        (terms, u.sub(&fitted))
    };
    let (mut terms, mut residual) = attempt(false);
    if !residual.is_zero() {
        let (t2, r2) = attempt(true);
        terms = t2;
        residual = r2;
    }
    UnaryFit {
        terms,
        residual,
        candidate_t: ts,
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub precision: u64,
    pub theta: QSeries,
    pub e: QSeries,
    pub u: QSeries,
    pub f: QSeries,
    pub genus_classes: ClassList,
    pub spinor_classes: ClassList,
    pub support: SupportReport,
    pub unary_fit: Option<UnaryFit>,
}

impl DecompositionReport {
    /// `E + U + f = θ` coefficientwise.
    pub fn sums_to_theta(&self) -> bool {
        self.e.add(&self.u).add(&self.f) == self.theta
    }

    pub fn passed(&self) -> bool {
        self.sums_to_theta()
            && self.support.passed()
            && self.unary_fit.as_ref().map_or(true, |f| f.residual.is_zero())
    }
}

/// `U_s = θ_spn⁺(aL+sν) − θ_gen⁺(aL+sν)` for every unit `s` mod `a`.
pub fn unary_parts(
    genus: &ClassList,
    spinor: &ClassList,
    precision: u64,
) -> Result<BTreeMap<u64, QSeries>> {
    let a = to_u64(genus.seed.modulus())?;
    let mut out = BTreeMap::new();
    for s in 1..=a.max(1) {
        if s.gcd(&a) != 1 || (s == a && a != 1) {
            continue;
        }
        let sb = BigInt::from(s);
        let us = theta_average_scaled(spinor, &sb, precision)?
            .sub(&theta_average_scaled(genus, &sb, precision)?);
        out.insert(s % a.max(2), us);
    }
    if a == 1 {
        let v = out.remove(&1).unwrap_or_else(|| QSeries::zero(precision));
        out.insert(1, v);
    }
    Ok(out)
}

/// `θ(c) = E + U + f` with `E = θ_gen⁺`, `U = θ_spn⁺ − θ_gen⁺`, `f = θ(c) − θ_spn⁺`.
pub fn decompose(
    c: &Coset,
    genus: &ClassList,
    spinor: &ClassList,
    precision: u64,
    fit: bool,
) -> Result<DecompositionReport> {
    if genus.is_empty() || spinor.is_empty() {
        return Err(Error::EmptyClassList);
    }
    for r in &spinor.representatives {
        if genus.find_class(&r.coset)?.is_none() {
            return Err(Error::Inconsistent(format!(
                "spinor representative {} is missing from the genus list",
                r.coset
            )));
        }
    }
    if spinor.find_class(c)?.is_none() {
        return Err(Error::Inconsistent(format!(
            "{c} is not in the spinor class list"
        )));
    }
    let theta = theta_series(c, precision)?;
    let twists = unary_parts(genus, spinor, precision)?;
    let e = theta_average(genus, precision)?;
    let u = twists[&1].clone();
    let f = theta.sub(&theta_average(spinor, precision)?);
    let level = to_u64(&c.level())?;
    let a = to_u64(c.modulus())?;
    let d = to_u64(&c.discriminant())?;
    let support = support_check(&u, level, a, d, &twists);
    let unary_fit = fit.then(|| fit_unary(&u, level, a));
    Ok(DecompositionReport {
        precision,
        theta,
        e,
        u,
        f,
        genus_classes: genus.clone(),
        spinor_classes: spinor.clone(),
        support,
        unary_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{enumerate_classes, enumerate_genus};
    use crate::linalg::IntMat3;

    fn coset(g: [[i64; 3]; 3], a: i64, nu: [i64; 3]) -> Coset {
        Coset::from_gram(IntMat3::from_i64(g), a, nu).unwrap()
    }

    const I3: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hecke_examples() {
        let i3 = coset(I3, 1, [0, 0, 0]);
        let t = hecke_t_p2(&i3, 3, 5).unwrap();
        assert_eq!(t.coeff(1), int(24));
        assert_eq!(t.coeff(0), int(4));
        // bad prime: plain r(p²n)
        let c = coset(I3, 2, [1, 1, 1]);
        let t = hecke_t_p2(&c, 2, 10).unwrap();
        let direct = theta_counts(&c, 40).unwrap();
        for n in 0..=10 {
            assert_eq!(t.coeff(n), int(direct[4 * n as usize] as i64));
        }
    }

    #[test]
    fn eichler_examples() {
        let i3 = coset(I3, 1, [0, 0, 0]);
        assert!(verify_eichler(&i3, 3, 50).unwrap().passed());
        let c = coset(I3, 2, [1, 1, 1]);
        assert!(verify_eichler(&c, 5, 50).unwrap().passed());
        // corrupt one neighbour's shift
        let mut ns = neighbors(&c, 5).unwrap();
        let m = &ns.members[1];
        let bad = Coset::new(m.lattice().clone(), m.modulus().clone(), {
            let mut s = m.shift().clone();
            s[0] += 1;
            s
        });
        if let Ok(bad) = bad {
            ns.members[1] = bad;
            let lhs = hecke_t_p2(&c, 5, 50).unwrap();
            let rhs = theta_sum(&ns.members, 50).unwrap();
            let rep = IdentityReport::new("eichler", 5, &lhs, &rhs);
            assert!(!rep.passed());
            assert!(!rep.violations.is_empty());
        }
    }

    #[test]
    fn mass_and_averages() {
        let i3 = coset(I3, 1, [0, 0, 0]);
        let cl = enumerate_classes(&i3, 3).unwrap();
        assert_eq!(mass(&cl), q(1, 24));
        let avg = theta_average(&cl, 20).unwrap();
        assert_eq!(avg, theta_series(&i3, 20).unwrap());
        assert_eq!(avg.coeff(0), int(1));
        let c = coset(I3, 4, [1, 1, 1]);
        let g = enumerate_genus(&c, &[5, 3]).unwrap();
        assert_eq!(theta_average(&g, 20).unwrap().coeff(0), int(0));
        let mut two = cl.clone();
        two.representatives[0].o_plus = 8;
        two.representatives.push(crate::classes::ClassRep {
            coset: i3.clone(),
            o_plus: 24,
        });
        assert_eq!(mass(&two), q(1, 6));
    }

    #[test]
    fn genus_eigen_single_class() {
        let i3 = coset(I3, 1, [0, 0, 0]);
        let g = enumerate_genus(&i3, &[3]).unwrap();
        for p in [3, 5, 7] {
            assert!(verify_genus_eigen(&g, p, 30).unwrap().passed());
        }
        let d = decompose(&i3, &g, &g, 30, true).unwrap();
        assert!(d.u.is_zero() && d.f.is_zero());
        assert!(d.passed());
    }

    #[test]
    fn unary_fit_roundtrip() {
        let h = UnaryTheta {
            t: 3,
            u: 1,
            psi: UnaryCharacter::kronecker(-4),
        };
        let u = h.series(300).scale(&int(2));
        let fit = fit_unary(&u, 1, 12);
        assert!(fit.residual.is_zero());
        assert_eq!(fit.terms.len(), 1);
        assert_eq!(fit.terms[0].1, int(2));
        assert_eq!(fit.terms[0].0, h);
        let empty = fit_unary(&QSeries::zero(50), 1, 12);
        assert!(empty.terms.is_empty() && empty.residual.is_zero());
    }

    #[test]
    fn support_check_on_synthetic_series() {
        let h = UnaryTheta {
            t: 3,
            u: 1,
            psi: UnaryCharacter::kronecker(-4),
        };
        let u = h.series(300).scale(&q(-1, 8));
        let rep = support_check(&u, 1, 12, 1, &BTreeMap::new());
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.square_classes.len(), 1);
        assert_eq!(rep.square_classes[0].t, 3);
        assert_eq!(rep.square_classes[0].t_prime, 3);
        assert_eq!(rep.square_classes[0].b, 4);
        assert!(support_check(&QSeries::zero(10), 1, 1, 1, &BTreeMap::new()).passed());
        let mut bad = QSeries::zero(10);
        bad.set(5, int(1));
        assert!(!support_check(&bad, 1, 12, 1, &BTreeMap::new()).passed());
    }

    #[test]
    fn unary_thetas_are_hecke_eigenforms() {
        // χ trivial mod a, nebentypus χ_{4d_L}, ψ = χ_{4d_L}·(−4t/·) on units
        for (d_l, t, psi_d) in [(1i64, 3u64, -4i64), (1, 1, -4), (3, 1, -3), (1, 2, -8)] {
            let h = UnaryTheta {
                t,
                u: 1,
                psi: UnaryCharacter::kronecker(psi_d),
            };
            for p in [5u64, 7, 11, 13] {
                if (4 * d_l as u64 * t * psi_d.unsigned_abs()) % p == 0 {
                    continue;
                }
                let pi = p as i128;
                let chi_p = kronecker(4 * d_l as i128, pi);
                let nebentypus_p = kronecker(psi_d as i128, pi) * kronecker(-4 * t as i128, pi);
                let f = h.series(300 * p * p);
                let tf = hecke_weight_three_halves(&f, p, nebentypus_p);
                let eig = nebentypus_p * kronecker(-(t as i128), pi) * (p as i32 + 1);
                assert_eq!(tf, f.truncate(300).scale(&int(eig as i64)), "t={t} p={p}");
                // with the matching nebentypus this is (−t·d_L/p)(p+1)
                if nebentypus_p == chi_p {
                    assert_eq!(eig, kronecker(-(t as i128) * d_l as i128, pi) * (p as i32 + 1));
                }
            }
        }
    }

    #[test]
    fn twelve_i3_unary_part_and_reseeding() {
        let c = coset(I3, 12, [5, 5, 5]);
        let spn = crate::classes::spinor_classes(&c, 13, &[37]).unwrap();
        let gen = enumerate_genus(&c, &[13, 37, 5, 7]).unwrap();
        let d = decompose(&c, &gen, &spn, 300, true).unwrap();
        assert!(d.passed(), "{:?}", d.support.failures);
        let mut expected = QSeries::zero(300);
        for (n, v) in [(3, -1), (27, 3), (75, -5), (147, 7), (243, -9)] {
            expected.set(n, q(v, 8));
        }
        assert_eq!(d.u, expected);
        let fit = d.unary_fit.as_ref().unwrap();
        assert_eq!(fit.terms.len(), 1);
        assert_eq!((fit.terms[0].0.t, fit.terms[0].1.clone()), (3, q(-1, 8)));
        assert!(d.support.twists_checked > 0);
        for r in &spn.representatives {
            let s2 = enumerate_classes(&r.coset, 13).unwrap();
            let d2 = decompose(&r.coset, &gen, &s2, 300, false).unwrap();
            assert_eq!(d2.u, d.u);
            assert!(d2.sums_to_theta());
        }
        for p in [5, 13] {
            assert!(verify_genus_eigen(&gen, p, 150).unwrap().passed());
        }
    }
}
