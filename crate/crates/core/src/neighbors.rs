//! Kneser p-neighbours of cosets and the sets `Z_p(aL + ν)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{is_prime, kronecker_big, mod_inverse, mod_inverse_u64};
use crate::coset::{lattice_contains, rat_vec, Coset, Lattice};
use crate::error::{Error, Result};
use crate::linalg::{index, intersect, module_basis, rat, RatVec3, Vec3};

/// The `p + 1` cosets of `R_p(source)`.
#[derive(Clone, Debug)]
pub struct NeighborSet {
    pub p: u64,
    pub source: Coset,
    pub members: Vec<Coset>,
}

/// Rejects `p` unless it is a prime not dividing `4·N_L·a²`.
pub fn check_prime(c: &Coset, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidPrime {
            p,
            reason: "not a prime".into(),
        });
    }
    if c.theta_level().mod_floor(&BigInt::from(p)).is_zero() {
        return Err(Error::InvalidPrime {
            p,
            reason: format!("divides 4·N_L·a² = {}", c.theta_level()),
        });
    }
    Ok(())
}

/// Projective points of the Gram form mod `p` with `Q(x) ≡ 0`.
fn isotropic_lines(g: &[[i128; 3]; 3], p: i128) -> Vec<[i128; 3]> {
    let q = |x: &[i128; 3]| {
        let mut s = 0;
        for i in 0..3 {
            for j in 0..3 {
                s += x[i] * g[i][j] * x[j];
            }
        }
        s.rem_euclid(p)
    };
    let mut out = Vec::new();
    let mut push = |x: [i128; 3]| {
        if q(&x) == 0 {
            out.push(x);
        }
    };
    for y in 0..p {
        for z in 0..p {
            push([1, y, z]);
        }
    }
    for z in 0..p {
        push([0, 1, z]);
    }
    push([0, 0, 1]);
    out
}

fn gram_times(g: &[[i128; 3]; 3], x: &[i128; 3]) -> [i128; 3] {
    std::array::from_fn(|i| (0..3).map(|j| g[i][j] * x[j]).sum())
}

/// Lifts an isotropic vector mod `p` to one with `Q(x) ≡ 0 (mod p²)`.
fn hensel_lift(g: &[[i128; 3]; 3], x: [i128; 3], p: i128) -> [i128; 3] {
    let w = gram_times(g, &x);
    let q: i128 = (0..3).map(|i| x[i] * w[i]).sum();
    debug_assert_eq!(q.rem_euclid(p), 0);
    let j = (0..3)
        .find(|&j| w[j].rem_euclid(p) != 0)
        .expect("form is nondegenerate mod p");
    let inv = mod_inverse_u64((2 * w[j]).rem_euclid(p) as u64, p as u64).unwrap() as i128;
    let c = ((-(q / p)).rem_euclid(p) * inv).rem_euclid(p);
    let mut y = x;
    y[j] += p * c;
    y
}

/// Coordinates (in the basis of `L`) of a basis of the neighbour lattice
/// `{z ∈ L : B(z, x) ≡ 0 mod p} + ℤ·x/p`.
fn neighbor_coords(g: &[[i128; 3]; 3], x: [i128; 3], p: i128) -> Result<crate::linalg::RatMat3> {
    let w = gram_times(g, &x);
    let j = (0..3).find(|&j| w[j].rem_euclid(p) != 0).unwrap();
    let wj_inv = mod_inverse_u64(w[j].rem_euclid(p) as u64, p as u64).unwrap() as i128;
    let r = |v: i128| BigRational::from_integer(BigInt::from(v));
    let mut gens: Vec<RatVec3> = Vec::with_capacity(4);
    let mut pej = [r(0), r(0), r(0)];
    pej[j] = r(p);
    gens.push(pej);
    for i in (0..3).filter(|&i| i != j) {
        let mut v = [r(0), r(0), r(0)];
        v[i] = r(1);
        v[j] = r(-(w[i] * wj_inv).rem_euclid(p));
        gens.push(v);
    }
    let pq = r(p);
    gens.push(x.map(|t| r(t) / &pq));
    module_basis(&gens)
}

/// `R_p(aL + ν)`, each member with a reduced basis.
pub fn neighbors(c: &Coset, p: u64) -> Result<NeighborSet> {
    check_prime(c, p)?;
    let g = c.gram().to_i128()?;
    let pi = p as i128;
    let a = c.modulus();
    let pb = BigInt::from(p);
    let pbar = mod_inverse(&pb, a)?;
    // μ = p·p̄²·ν lies in pL ⊆ K ∩ L and is ≡ p̄ν mod aL
    let mu_l: Vec3 = c.shift().clone().map(|t| t * &pb * &pbar * &pbar);
    let mut members = Vec::with_capacity(p as usize + 1);
    for line in isotropic_lines(&g, pi) {
        let x = hensel_lift(&g, line, pi);
        let kc = neighbor_coords(&g, x, pi)?;
        let k = c.lattice().from_coords(&kc)?;
        let mu_k = kc.inverse()?.mul_vec(&rat_vec(&mu_l));
        let mu_k: Vec3 = std::array::from_fn(|i| {
            debug_assert!(mu_k[i].is_integer());
            mu_k[i].to_integer()
        });
        let member = match Coset::new(k, a.clone(), mu_k) {
            Ok(m) => m,
            Err(e) => return Err(Error::Inconsistent(format!("neighbor construction: {e}"))),
        };
        members.push(member.reduced()?);
    }
    if members.len() != p as usize + 1 {
        return Err(Error::Inconsistent(format!(
            "found {} isotropic lines mod {p}",
            members.len()
        )));
    }
    Ok(NeighborSet {
        p,
        source: c.clone(),
        members,
    })
}

/// Number of members `aK+μ` of `R_p(c)` with `x ∈ pK_p`, by direct membership
/// (`x/p ∈ K_p` iff `x/p ∈ K`, since `x/p` is integral away from `p`).
pub fn pi_count(x: &Vec3, c: &Coset, p: u64, set: &NeighborSet) -> Result<u64> {
    pi_preconditions(x, c, p)?;
    let v: RatVec3 = c
        .ambient_vector(x)
        .map(|t| t / BigRational::from_integer(BigInt::from(p)));
    Ok(set
        .members
        .iter()
        .filter(|m| lattice_contains(m.lattice(), &v))
        .count() as u64)
}

fn pi_preconditions(x: &Vec3, c: &Coset, p: u64) -> Result<()> {
    check_prime(c, p)?;
    if !c.contains(x) {
        return Err(Error::Precondition("vector is not in the coset".into()));
    }
    let p2 = BigInt::from(p * p);
    if !c.norm_of(x).mod_floor(&p2).is_zero() {
        return Err(Error::Precondition("p² does not divide Q(x)".into()));
    }
    Ok(())
}

/// The three-case closed form: 1 off `pL`, `1 + (−d_L·n / p)` on `pL ∖ p²L`,
/// `p + 1` on `p²L`, where `Q(x) = p²n`.
pub fn pi_closed_form(x: &Vec3, c: &Coset, p: u64) -> Result<u64> {
    pi_preconditions(x, c, p)?;
    let pb = BigInt::from(p);
    let divisible = |m: &BigInt| x.iter().all(|t| t.mod_floor(m).is_zero());
    if !divisible(&pb) {
        return Ok(1);
    }
    if divisible(&(&pb * &pb)) {
        return Ok(p + 1);
    }
    let n = c.norm_of(x) / (&pb * &pb);
    let k = kronecker_big(&(-c.discriminant() * n), &pb)?;
    Ok((1 + k) as u64)
}

/// Whether `other` lies in `Z_p(c)`: both agree at every prime `q ≠ p`
/// (same `ℤ[1/p]`-lattice and shifts congruent mod `a·ℤ[1/p]L`) and have
/// isometric completions at `p`.
pub fn in_zp(c: &Coset, other: &Coset, p: u64) -> Result<bool> {
    check_prime(c, p)?;
    if !c.lattice().same_space(other.lattice()) || c.modulus() != other.modulus() {
        return Ok(false);
    }
    if c.discriminant() != other.discriminant() {
        return Ok(false);
    }
    let bl = c.lattice().basis();
    let bk = other.lattice().basis();
    let meet = intersect(bl, bk)?;
    let is_p_power = |r: BigRational| -> bool {
        if !r.is_integer() {
            return false;
        }
        let mut n = r.to_integer();
        let pb = BigInt::from(p);
        while n.mod_floor(&pb).is_zero() {
            n /= &pb;
        }
        n.is_one()
    };
    if !is_p_power(index(&meet, bl)?) || !is_p_power(index(&meet, bk)?) {
        return Ok(false);
    }
    // μ − ν in L-coordinates must lie in a·ℤ[1/p]³
    let diff: RatVec3 = {
        let vm = other.ambient_vector(other.shift());
        let vn = c.ambient_vector(c.shift());
        std::array::from_fn(|i| &vm[i] - &vn[i])
    };
    let coords = c.lattice().coords_of(&diff);
    let pb = BigInt::from(p);
    let a = c.modulus();
    Ok(coords.iter().all(|t| {
        let mut d = t.denom().clone();
        while d.mod_floor(&pb).is_zero() {
            d /= &pb;
        }
        d.is_one() && t.numer().mod_floor(a).is_zero()
    }))
}

/// `log_p [J : J ∩ K]` for lattices related by a `p`-power index.
fn p_distance(j: &Lattice, k: &Lattice, p: u64) -> Result<u32> {
    let meet = intersect(j.basis(), k.basis())?;
    let idx = index(&meet, j.basis())?;
    let mut n = idx.to_integer();
    let mut e = 0;
    let pb = BigInt::from(p);
    while n > BigInt::one() {
        n /= &pb;
        e += 1;
    }
    Ok(e)
}

/// A shortest chain `c1 = K₀, …, K_n = c2` with `K_i ∈ R_p(K_{i−1})`.
pub fn zp_chain(c1: &Coset, c2: &Coset, p: u64) -> Result<Vec<Coset>> {
    check_prime(c1, p)?;
    if !(BigInt::from(p) - 1u32).mod_floor(c1.modulus()).is_zero() {
        return Err(Error::InvalidPrime {
            p,
            reason: format!("chains need p ≡ 1 mod {}", c1.modulus()),
        });
    }
    if !in_zp(c1, c2, p)? {
        return Err(Error::NotInZp { p });
    }
    let target = c2.canonical_key();
    let mut chain = vec![c1.clone()];
    let mut dist = p_distance(c2.lattice(), c1.lattice(), p)?;
    loop {
        let cur = chain.last().unwrap();
        if cur.canonical_key() == target {
            return Ok(chain);
        }
        let ns = neighbors(cur, p)?;
        let mut best = None;
        for m in ns.members {
            let d = p_distance(c2.lattice(), m.lattice(), p)?;
            if d < dist {
                best = Some((d, m));
                break;
            }
        }
        match best {
            Some((d, m)) => {
                dist = d;
                chain.push(m);
            }
            None => {
                return Err(Error::Inconsistent(
                    "no neighbour moves closer to the target".into(),
                ))
            }
        }
    }
}

/// Checks the defining properties of a neighbour set; returns a description
/// of the first violation.
pub fn check_neighbor_set(ns: &NeighborSet) -> std::result::Result<(), String> {
    let c = &ns.source;
    let p = ns.p;
    let pb = BigInt::from(p);
    if ns.members.len() as u64 != p + 1 {
        return Err(format!("{} members, expected {}", ns.members.len(), p + 1));
    }
    let bl = c.lattice().basis();
    let pbar = mod_inverse(&pb, c.modulus()).map_err(|e| e.to_string())?;
    let target = c.scale_shift(&pbar).map_err(|e| e.to_string())?;
    let mut keys = std::collections::BTreeSet::new();
    for m in &ns.members {
        let bk = m.lattice().basis();
        let meet = intersect(bl, bk).map_err(|e| e.to_string())?;
        let f1 = crate::linalg::invariant_factors(&meet, bl).map_err(|e| e.to_string())?;
        if f1 != [BigInt::one(), BigInt::one(), pb.clone()] {
            return Err(format!("K ∩ L has invariant factors {f1:?} in L"));
        }
        let pk = bk.scale(&rat(&pb));
        let f2 = crate::linalg::invariant_factors(&pk, bl).map_err(|e| e.to_string())?;
        if f2 != [BigInt::one(), pb.clone(), &pb * &pb] {
            return Err(format!("pK has invariant factors {f2:?} in L"));
        }
        if m.discriminant() != c.discriminant() {
            return Err("discriminant changed".into());
        }
        // away from p the member equals aL + p̄ν
        match in_zp(&target, m, p) {
            Ok(true) => {}
            _ => return Err(format!("{m} does not agree with aL + p̄ν away from p")),
        }
        if !keys.insert(m.canonical_key()) {
            return Err(format!("duplicate member {m}"));
        }
    }
    Ok(())
}
