//! Ternary lattices and lattice cosets `aL + ν`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{hnf_int, rat, reduce_gram, IntMat3, RatMat3, RatVec3, Vec3};

/// The fixed rational quadratic space every lattice lives in, given by the
/// Gram matrix of a seed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmbientSpace {
    gram0: IntMat3,
}

impl AmbientSpace {
    pub fn new(gram0: IntMat3) -> Result<Arc<Self>> {
        if !gram0.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !gram0.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Arc::new(AmbientSpace { gram0 }))
    }

    pub fn gram(&self) -> &IntMat3 {
        &self.gram0
    }
}

/// A full-rank lattice, stored as a rational basis (columns) in ambient
/// coordinates. The form restricted to it is integral.
#[derive(Clone, Debug)]
pub struct Lattice {
    ambient: Arc<AmbientSpace>,
    basis: RatMat3,
    gram: IntMat3,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis == other.basis
    }
}

impl Lattice {
    pub fn new(ambient: Arc<AmbientSpace>, basis: RatMat3) -> Result<Self> {
        if basis.det().is_zero() {
            return Err(Error::Singular);
        }
        let g = basis
            .transpose()
            .mul(&ambient.gram().to_rat())
            .mul(&basis);
        let gram = g.to_int().ok_or(Error::NotIntegral)?;
        Ok(Lattice {
            ambient,
            basis,
            gram,
        })
    }

    /// Lattice whose own basis spans the ambient space.
    pub fn from_gram(gram: IntMat3) -> Result<Self> {
        let ambient = AmbientSpace::new(gram)?;
        Lattice::new(ambient, RatMat3::identity())
    }

    pub fn ambient(&self) -> &Arc<AmbientSpace> {
        &self.ambient
    }

    pub fn basis(&self) -> &RatMat3 {
        &self.basis
    }

    pub fn gram(&self) -> &IntMat3 {
        &self.gram
    }

    pub fn discriminant(&self) -> BigInt {
        self.gram.det()
    }

    /// Smallest `N` with `N · gram⁻¹` integral.
    pub fn level(&self) -> BigInt {
        self.gram
            .to_rat()
            .inverse()
            .expect("gram of a lattice is nonsingular")
            .denominator()
    }

    /// Same lattice, basis changed by the unimodular matrix `u`.
    pub fn change_basis(&self, u: &IntMat3) -> Result<Self> {
        if !u.det().abs().is_one() {
            return Err(Error::Precondition("basis change is not unimodular".into()));
        }
        Ok(Lattice {
            ambient: self.ambient.clone(),
            basis: self.basis.mul_int(u),
            gram: u.transpose().mul(&self.gram).mul(u),
        })
    }

    /// Sublattice or superlattice with basis `basis · coords` (coords rational).
    pub fn from_coords(&self, coords: &RatMat3) -> Result<Self> {
        Lattice::new(self.ambient.clone(), self.basis.mul(coords))
    }

    pub fn scaled(&self, s: &BigInt) -> Result<Self> {
        Lattice::new(self.ambient.clone(), self.basis.scale(&rat(s)))
    }

    pub fn orientation_positive(&self) -> bool {
        self.basis.det().is_positive()
    }

    /// Coordinates of an ambient vector in this lattice's basis.
    pub fn coords_of(&self, v: &RatVec3) -> RatVec3 {
        self.basis
            .inverse()
            .expect("lattice basis is nonsingular")
            .mul_vec(v)
    }

    pub fn same_space(&self, other: &Lattice) -> bool {
        self.ambient == other.ambient
    }
}

/// The coset `aL + ν` with conductor exactly `a`; `ν` is given in the
/// basis of `L` and kept reduced to `[0, a)³`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coset {
    lattice: Lattice,
    modulus: BigInt,
    shift: Vec3,
}

/// Byte string identifying a coset as a point set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub String);

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn reduce_shift(shift: &Vec3, a: &BigInt) -> Vec3 {
    shift.clone().map(|x| x.mod_floor(a))
}

impl Coset {
    /// Builds `aL + ν`, rejecting shifts whose conductor is smaller than `a`.
    pub fn new(lattice: Lattice, a: BigInt, nu: Vec3) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::BadModulus(a));
        }
        let shift = reduce_shift(&nu, &a);
        let g = shift.iter().fold(a.clone(), |g, x| g.gcd(x));
        if !g.is_one() {
            let conductor = &a / &g;
            let refactored = Coset {
                lattice: lattice.scaled(&g)?,
                modulus: conductor.clone(),
                shift: reduce_shift(&shift.clone().map(|x| x / &g), &conductor),
            };
            return Err(Error::ConductorMismatch {
                requested: a,
                conductor,
                refactored: Box::new(refactored),
            });
        }
        Ok(Coset {
            lattice,
            modulus: a,
            shift,
        })
    }

    pub fn from_gram(gram: IntMat3, a: i64, nu: [i64; 3]) -> Result<Self> {
        Coset::new(
            Lattice::from_gram(gram)?,
            BigInt::from(a),
            nu.map(BigInt::from),
        )
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn shift(&self) -> &Vec3 {
        &self.shift
    }

    pub fn gram(&self) -> &IntMat3 {
        self.lattice.gram()
    }

    pub fn discriminant(&self) -> BigInt {
        self.lattice.discriminant()
    }

    pub fn level(&self) -> BigInt {
        self.lattice.level()
    }

    /// `4 · N_L · a²`, the level of the theta series.
    pub fn theta_level(&self) -> BigInt {
        BigInt::from(4) * self.level() * &self.modulus * &self.modulus
    }

    pub fn is_lattice(&self) -> bool {
        self.modulus.is_one()
    }

    /// `Q` at the element with lattice coordinates `x`.
    pub fn norm_of(&self, x: &Vec3) -> BigInt {
        self.gram().quad(x)
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        x.iter()
            .zip(&self.shift)
            .all(|(xi, ni)| (xi - ni).mod_floor(&self.modulus).is_zero())
    }

    /// The element `a·y + ν` in lattice coordinates.
    pub fn element(&self, y: &Vec3) -> Vec3 {
        std::array::from_fn(|i| &self.modulus * &y[i] + &self.shift[i])
    }

    pub fn ambient_vector(&self, x: &Vec3) -> RatVec3 {
        self.lattice.basis().mul_int_vec(x)
    }

    /// `aL + sν` for `s` prime to `a`.
    pub fn scale_shift(&self, s: &BigInt) -> Result<Self> {
        if !s.gcd(&self.modulus).is_one() {
            return Err(Error::NotInvertible {
                x: s.clone(),
                m: self.modulus.clone(),
            });
        }
        Ok(Coset {
            lattice: self.lattice.clone(),
            modulus: self.modulus.clone(),
            shift: reduce_shift(&self.shift.clone().map(|x| x * s), &self.modulus),
        })
    }

    /// The same point set described in the basis `B·u` of `L`.
    pub fn change_basis(&self, u: &IntMat3) -> Result<Self> {
        let lattice = self.lattice.change_basis(u)?;
        let uinv = u
            .to_rat()
            .inverse()?
            .to_int()
            .expect("inverse of a unimodular matrix is integral");
        let shift = reduce_shift(&uinv.mul_vec(&self.shift), &self.modulus);
        Ok(Coset {
            lattice,
            modulus: self.modulus.clone(),
            shift,
        })
    }

    /// Same point set with a positively oriented lattice basis.
    pub fn oriented(&self) -> Self {
        if self.lattice.orientation_positive() {
            return self.clone();
        }
        self.change_basis(&IntMat3::diag([1, 1, -1]))
            .expect("diagonal sign change is unimodular")
    }

    /// Same point set with a reduced, positively oriented lattice basis.
    pub fn reduced(&self) -> Result<Self> {
        Ok(self.reduced_with_basis()?.0)
    }

    /// Reduced form together with `u`, where the new basis is `B·u`.
    pub fn reduced_with_basis(&self) -> Result<(Self, IntMat3)> {
        let g = self.gram().to_i128()?;
        let (_, u) = reduce_gram(&g);
        let mut u = IntMat3::from_i128(u);
        let r = self.change_basis(&u)?;
        if !r.lattice.orientation_positive() {
            let flip = IntMat3::diag([1, 1, -1]);
            u = u.mul(&flip);
            return Ok((r.change_basis(&flip)?, u));
        }
        Ok((r, u))
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let scaled = self.lattice.basis().scale(&rat(&self.modulus));
        let d = scaled.denominator();
        let dq = rat(&d);
        let int_basis = scaled.scale(&dq).to_int().expect("cleared denominators");
        let h = hnf_int(&int_basis).expect("lattice basis is nonsingular");
        let v = self.ambient_vector(&self.shift);
        let mut s: Vec3 = v.map(|x| (x * &dq).to_integer());
        for i in (0..3).rev() {
            let q = s[i].div_floor(&h.0[i][i]);
            if !q.is_zero() {
                for (r, sr) in s.iter_mut().enumerate() {
                    *sr -= &q * &h.0[r][i];
                }
            }
        }
        let g0 = self.lattice.ambient().gram();
        let join = |xs: Vec<String>| xs.join(",");
        CanonicalKey(format!(
            "{}|{}|{}|{}",
            join(g0.0.iter().flatten().map(|x| x.to_string()).collect()),
            d,
            join(h.0.iter().flatten().map(|x| x.to_string()).collect()),
            join(s.iter().map(|x| x.to_string()).collect())
        ))
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.gram();
        let rows: Vec<String> = g
            .0
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(
            f,
            "{}·L[{}] + ({},{},{})",
            self.modulus,
            rows.join(";"),
            self.shift[0],
            self.shift[1],
            self.shift[2]
        )
    }
}

/// A rational ambient vector lies in the lattice spanned by `lat`.
pub(crate) fn lattice_contains(lat: &Lattice, v: &RatVec3) -> bool {
    lat.coords_of(v).iter().all(|x| x.is_integer())
}

pub(crate) fn rat_vec(v: &Vec3) -> RatVec3 {
    v.clone().map(BigRational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mod_inverse;
    use crate::linalg::int_vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn i3() -> Lattice {
        Lattice::from_gram(IntMat3::identity()).unwrap()
    }

    fn random_unimodular(rng: &mut ChaCha8Rng) -> IntMat3 {
        let mut m = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
        for _ in 0..5 {
            let i = rng.gen_range(0..3);
            let j = (i + rng.gen_range(1..3)) % 3;
            let c = rng.gen_range(-2..=2);
            for row in m.iter_mut() {
                row[i] += c * row[j];
            }
        }
        IntMat3::from_i64(m)
    }

    #[test]
    fn discriminant_and_level() {
        assert_eq!(i3().discriminant(), BigInt::from(1));
        assert_eq!(i3().level(), BigInt::from(1));
        let l = Lattice::from_gram(IntMat3::diag([1, 1, 3])).unwrap();
        assert_eq!(l.discriminant(), BigInt::from(3));
        assert_eq!(l.level(), BigInt::from(3));
        let l = Lattice::from_gram(IntMat3::diag([1, 2, 2])).unwrap();
        assert_eq!(l.level(), BigInt::from(2));
        let a3 = Lattice::from_gram(IntMat3::from_i64([[2, 1, 1], [1, 2, 1], [1, 1, 2]])).unwrap();
        assert_eq!(a3.discriminant(), BigInt::from(4));
        assert_eq!(a3.level(), BigInt::from(4));
    }

    #[test]
    fn invariants_under_basis_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = Lattice::from_gram(IntMat3::from_i64([[2, 1, 0], [1, 3, 1], [0, 1, 7]])).unwrap();
        for _ in 0..50 {
            let u = random_unimodular(&mut rng);
            let l2 = l.change_basis(&u).unwrap();
            assert_eq!(l2.discriminant(), l.discriminant());
            assert_eq!(l2.level(), l.level());
        }
    }

    #[test]
    fn make_coset_examples() {
        let c = Coset::new(i3(), 12.into(), int_vec([5, 5, 5])).unwrap();
        assert_eq!(c.modulus(), &BigInt::from(12));
        let c2 = Coset::new(i3(), 12.into(), int_vec([17, 5, 5])).unwrap();
        assert_eq!(c, c2);
        assert_eq!(c.canonical_key(), c2.canonical_key());
        match Coset::new(i3(), 12.into(), int_vec([4, 4, 4])) {
            Err(Error::ConductorMismatch {
                conductor,
                refactored,
                ..
            }) => {
                assert_eq!(conductor, BigInt::from(3));
                assert_eq!(refactored.modulus(), &BigInt::from(3));
                assert_eq!(refactored.shift(), &int_vec([1, 1, 1]));
                assert_eq!(refactored.gram(), &IntMat3::diag([16, 16, 16]));
                // both describe {x ≡ (4,4,4) mod 12}
                let mut rng = ChaCha8Rng::seed_from_u64(4);
                for _ in 0..100 {
                    let y = int_vec(std::array::from_fn(|_| rng.gen_range(-5..5)));
                    let x = refactored.element(&y);
                    let amb = refactored.ambient_vector(&x);
                    let ints: Vec3 = amb.map(|t| t.to_integer());
                    assert!(ints
                        .iter()
                        .all(|t| (t - BigInt::from(4)).mod_floor(&BigInt::from(12)).is_zero()));
                }
            }
            other => panic!("expected conductor mismatch, got {other:?}"),
        }
        assert!(matches!(
            Coset::new(i3(), 0.into(), int_vec([1, 0, 0])),
            Err(Error::BadModulus(_))
        ));
    }

    #[test]
    fn canonical_key_examples() {
        let c = Coset::new(i3(), 12.into(), int_vec([5, 5, 5])).unwrap();
        let c2 = Coset::new(i3(), 12.into(), int_vec([5, 5, -7])).unwrap();
        assert_eq!(c.canonical_key(), c2.canonical_key());
        let perm = IntMat3::from_i64([[0, 1, 0], [0, 0, 1], [1, 0, 0]]);
        assert_eq!(c.change_basis(&perm).unwrap().canonical_key(), c.canonical_key());
        let d1 = Coset::new(i3(), 2.into(), int_vec([1, 0, 0])).unwrap();
        let d2 = Coset::new(i3(), 2.into(), int_vec([1, 1, 1])).unwrap();
        assert_ne!(d1.canonical_key(), d2.canonical_key());
    }

    #[test]
    fn canonical_key_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = Lattice::from_gram(IntMat3::from_i64([[2, 1, 0], [1, 3, 1], [0, 1, 7]])).unwrap();
        let c = Coset::new(l, 6.into(), int_vec([1, 2, 3])).unwrap();
        for _ in 0..50 {
            let u = random_unimodular(&mut rng);
            let c2 = c.change_basis(&u).unwrap();
            assert_eq!(c2.canonical_key(), c.canonical_key());
            assert_eq!(c2.reduced().unwrap().canonical_key(), c.canonical_key());
        }
    }

    #[test]
    fn scale_shift_examples() {
        let c = Coset::new(i3(), 12.into(), int_vec([5, 5, 5])).unwrap();
        let s = c.scale_shift(&5.into()).unwrap();
        assert_eq!(s.shift(), &int_vec([1, 1, 1]));
        assert_eq!(c.scale_shift(&1.into()).unwrap(), c);
        for s in [5i64, 7, 11, 13, -1] {
            let sb = BigInt::from(s);
            let inv = mod_inverse(&sb, c.modulus()).unwrap();
            let back = c.scale_shift(&sb).unwrap().scale_shift(&inv).unwrap();
            assert_eq!(back.canonical_key(), c.canonical_key());
        }
        assert!(c.scale_shift(&4.into()).is_err());
    }

    #[test]
    fn sampled_norms_are_positive_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grams = [
            IntMat3::identity(),
            IntMat3::from_i64([[2, 1, 0], [1, 3, 1], [0, 1, 7]]),
            IntMat3::from_i64([[2, 1, 1], [1, 2, 1], [1, 1, 2]]),
        ];
        for g in grams {
            for (a, nu) in [(1, [0, 0, 0]), (4, [1, 2, 3]), (6, [5, 0, 1])] {
                let c = Coset::from_gram(g.clone(), a, nu).unwrap();
                for _ in 0..100 {
                    let y = int_vec(std::array::from_fn(|_| rng.gen_range(-4..=4)));
                    let x = c.element(&y);
                    let q = c.norm_of(&x);
                    assert!(!q.is_negative());
                    if q.is_zero() {
                        assert!(x.iter().all(|t| t.is_zero()));
                        assert!(c.is_lattice());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_grams() {
        assert!(matches!(
            Lattice::from_gram(IntMat3::from_i64([[1, 2, 0], [2, 1, 0], [0, 0, 1]])),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(matches!(
            Lattice::from_gram(IntMat3::from_i64([[1, 1, 0], [0, 1, 0], [0, 0, 1]])),
            Err(Error::NotSymmetric)
        ));
        let amb = AmbientSpace::new(IntMat3::identity()).unwrap();
        let half = RatMat3::identity().scale(&BigRational::new(1.into(), 2.into()));
        assert!(matches!(Lattice::new(amb, half), Err(Error::NotIntegral)));
    }
}
