//! Proper isometries between cosets and proper automorphism groups.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::coset::Coset;
use crate::enumerate::Kernel;
use crate::error::Result;
use crate::linalg::{IntMat3, RatMat3};

/// A proper isometry `σ` with `σ(c1) = c2`, recorded as the matrix taking
/// coordinates in the basis of the source lattice to coordinates in the basis
/// of the target lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    pub matrix: IntMat3,
}

impl Isometry {
    pub fn to_rat(&self) -> RatMat3 {
        self.matrix.to_rat()
    }
}

type G = [[i128; 3]; 3];

fn bil(g: &G, u: &[i128; 3], v: &[i128; 3]) -> i128 {
    let mut s = 0;
    for i in 0..3 {
        for j in 0..3 {
            s += u[i] * g[i][j] * v[j];
        }
    }
    s
}

/// All `T` with `Tᵀ·g2·T = g1`, columns drawn from vectors of the right norm.
fn lattice_isometries<F: FnMut(&[[i128; 3]; 3]) -> bool>(g1: &G, g2: &G, mut accept: F) -> Result<()> {
    let zero = BigInt::zero();
    let k2 = Kernel::from_parts(
        &IntMat3::from_i128(*g2),
        &BigInt::from(1),
        &[zero.clone(), zero.clone(), zero],
    )?;
    let mut cands: Vec<Vec<[i128; 3]>> = Vec::with_capacity(3);
    for i in 0..3 {
        cands.push(k2.vectors_of_norm(g1[i][i])?);
    }
    let mut cols = [[0i128; 3]; 3];
    for v0 in &cands[0] {
        cols[0] = *v0;
        for v1 in &cands[1] {
            if bil(g2, v0, v1) != g1[0][1] {
                continue;
            }
            cols[1] = *v1;
            for v2 in &cands[2] {
                if bil(g2, v0, v2) != g1[0][2] || bil(g2, v1, v2) != g1[1][2] {
                    continue;
                }
                cols[2] = *v2;
                let t: [[i128; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r]));
                if !accept(&t) {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Searches proper isometries `c1 → c2`; stops after the first if `all` is false.
fn search(c1: &Coset, c2: &Coset, all: bool) -> Result<Vec<Isometry>> {
    if c1.modulus() != c2.modulus() || c1.discriminant() != c2.discriminant() {
        return Ok(Vec::new());
    }
    let (r1, u1) = c1.reduced_with_basis()?;
    let (r2, u2) = c2.reduced_with_basis()?;
    let g1 = r1.gram().to_i128()?;
    let g2 = r2.gram().to_i128()?;
    // both reduced bases are positively oriented, so proper means det T = +1
    let a = r1.modulus().clone();
    let nu1 = r1.shift().clone();
    let nu2 = r2.shift().clone();
    let u1_inv = u1
        .to_rat()
        .inverse()?
        .to_int()
        .expect("unimodular inverse is integral");
    let mut found = Vec::new();
    lattice_isometries(&g1, &g2, |t| {
        let tm = IntMat3::from_i128(*t);
        if !tm.det().is_positive() {
            return true;
        }
        let image = tm.mul_vec(&nu1);
        let ok = image
            .iter()
            .zip(&nu2)
            .all(|(x, y)| (x - y).mod_floor(&a).is_zero());
        if ok {
            found.push(Isometry {
                matrix: u2.mul(&tm).mul(&u1_inv),
            });
        }
        all || found.is_empty()
    })?;
    Ok(found)
}

/// Some proper isometry taking `c1` onto `c2`, if one exists.
pub fn proper_isometry(c1: &Coset, c2: &Coset) -> Result<Option<Isometry>> {
    Ok(search(c1, c2, false)?.into_iter().next())
}

pub fn proper_automorphisms(c: &Coset) -> Result<Vec<Isometry>> {
    search(c, c, true)
}

/// `o⁺(aL+ν)`, the number of proper automorphisms.
pub fn o_plus(c: &Coset) -> Result<u64> {
    Ok(proper_automorphisms(c)?.len() as u64)
}

/// Checks that `iso` is a proper isometry from `c1` onto `c2`.
pub fn is_witness(iso: &Isometry, c1: &Coset, c2: &Coset) -> bool {
    let t = &iso.matrix;
    if t.transpose().mul(c2.gram()).mul(t) != *c1.gram() {
        return false;
    }
    let ambient_det =
        c2.lattice().basis().det() * iso.to_rat().det() / c1.lattice().basis().det();
    if !ambient_det.is_positive() {
        return false;
    }
    let a = c1.modulus();
    t.mul_vec(c1.shift())
        .iter()
        .zip(c2.shift())
        .all(|(x, y)| (x - y).mod_floor(a).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coset(g: [[i64; 3]; 3], a: i64, nu: [i64; 3]) -> Coset {
        Coset::from_gram(IntMat3::from_i64(g), a, nu).unwrap()
    }

    const I3: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

    #[test]
    fn automorphism_counts() {
        assert_eq!(o_plus(&coset(I3, 1, [0, 0, 0])).unwrap(), 24);
        assert_eq!(o_plus(&coset(I3, 2, [1, 1, 1])).unwrap(), 24);
        assert_eq!(o_plus(&coset(I3, 2, [1, 0, 0])).unwrap(), 8);
        assert_eq!(o_plus(&coset(I3, 12, [5, 5, 5])).unwrap(), 3);
    }

    #[test]
    fn automorphisms_form_a_group() {
        for c in [
            coset(I3, 2, [1, 0, 0]),
            coset([[2, 1, 1], [1, 2, 1], [1, 1, 2]], 1, [0, 0, 0]),
            coset([[2, 1, 0], [1, 3, 1], [0, 1, 5]], 3, [1, 0, 2]),
        ] {
            let auts: Vec<IntMat3> = proper_automorphisms(&c)
                .unwrap()
                .into_iter()
                .map(|s| s.matrix)
                .collect();
            assert!(auts.contains(&IntMat3::identity()));
            for s in &auts {
                for t in &auts {
                    assert!(auts.contains(&s.mul(t)));
                }
            }
        }
    }

    #[test]
    fn isometry_examples() {
        let c = coset(I3, 2, [1, 0, 0]);
        assert_eq!(
            proper_isometry(&c, &c).unwrap().map(|s| s.matrix.det()),
            Some(BigInt::from(1))
        );
        let c2 = coset(I3, 2, [0, 1, 0]);
        let s = proper_isometry(&c, &c2).unwrap().unwrap();
        assert!(is_witness(&s, &c, &c2));
        assert!(proper_isometry(&c, &coset(I3, 2, [1, 1, 1])).unwrap().is_none());
    }

    #[test]
    fn witnesses_map_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c1 = coset([[2, 1, 0], [1, 3, 1], [0, 1, 5]], 4, [1, 2, 3]);
        let u = IntMat3::from_i64([[1, 2, 0], [0, 1, 0], [1, 3, 1]]);
        let c2 = c1.change_basis(&u).unwrap();
        let s = proper_isometry(&c1, &c2).unwrap().unwrap();
        assert!(is_witness(&s, &c1, &c2));
        for _ in 0..20 {
            let y = int_vec(std::array::from_fn(|_| rng.gen_range(-5..=5)));
            let x = c1.element(&y);
            let image = s.matrix.mul_vec(&x);
            assert!(c2.contains(&image));
            assert_eq!(c2.norm_of(&image), c1.norm_of(&x));
        }
    }

    #[test]
    fn improper_only_is_rejected() {
        // reflections preserve the set but are improper; orientation flip of
        // the basis must not change properness of the identity
        let c = coset(I3, 2, [1, 0, 0]);
        let flipped = c.change_basis(&IntMat3::diag([1, 1, -1])).unwrap();
        let s = proper_isometry(&c, &flipped).unwrap().unwrap();
        assert!(is_witness(&s, &c, &flipped));
    }

    #[test]
    fn o_plus_invariant_under_shift_scaling() {
        for (g, a, nu) in [
            (I3, 12, [5, 5, 5]),
            ([[2, 1, 0], [1, 3, 1], [0, 1, 5]], 6, [1, 0, 2]),
            ([[2, 1, 1], [1, 2, 1], [1, 1, 2]], 4, [1, 1, 0]),
        ] {
            let c = coset(g, a, nu);
            let n = o_plus(&c).unwrap();
            for s in 1..a {
                if s.gcd(&a) == 1 {
                    let cs = c.scale_shift(&BigInt::from(s)).unwrap();
                    assert_eq!(o_plus(&cs).unwrap(), n);
                }
            }
        }
    }
}
