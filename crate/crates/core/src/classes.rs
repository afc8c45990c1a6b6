//! Enumeration of proper classes in a genus or spinor genus by neighbour
//! graph search.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::coset::{CanonicalKey, Coset};
use crate::enumerate::{default_precision, theta_counts};
use crate::error::{Error, Result};
use crate::isometry::{o_plus, proper_isometry};
use crate::neighbors::{check_prime, neighbors};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    Genus,
    SpinorCandidate,
}

impl ClassKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassKind::Genus => "genus",
            ClassKind::SpinorCandidate => "spinor-candidate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassRep {
    pub coset: Coset,
    pub o_plus: u64,
}

/// Representatives of pairwise distinct proper classes.
#[derive(Clone, Debug)]
pub struct ClassList {
    pub kind: ClassKind,
    pub seed: Coset,
    pub representatives: Vec<ClassRep>,
    pub mass: BigRational,
    pub primes_used: Vec<u64>,
    pub validated_with: Vec<u64>,
}

impl ClassList {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Index of the representative properly isometric to `c`, if any.
    pub fn find_class(&self, c: &Coset) -> Result<Option<usize>> {
        let t = invariant_bound(&self.seed)?;
        let prefix = theta_counts(c, t)?;
        for (i, r) in self.representatives.iter().enumerate() {
            if theta_counts(&r.coset, t)? == prefix && proper_isometry(&r.coset, c)?.is_some() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

pub fn mass_of(reps: &[ClassRep]) -> BigRational {
    reps.iter().fold(BigRational::zero(), |m, r| {
        m + BigRational::new(1.into(), BigInt::from(r.o_plus))
    })
}

/// Length of the theta prefix used to bucket candidates before isometry
/// testing.
fn invariant_bound(seed: &Coset) -> Result<u64> {
    Ok(default_precision(seed)?.max(40))
}

/// Classes found so far, with the bookkeeping to reject repeats cheaply.
struct ClassSet {
    reps: Vec<ClassRep>,
    buckets: HashMap<Vec<u64>, Vec<usize>>,
    visited: HashSet<CanonicalKey>,
    bound: u64,
}

impl ClassSet {
    fn new(seed: &Coset) -> Result<Self> {
        Ok(ClassSet {
            reps: Vec::new(),
            buckets: HashMap::new(),
            visited: HashSet::new(),
            bound: invariant_bound(seed)?,
        })
    }

    /// Adds `c` if it is not properly isometric to a known class; returns the
    /// index of the new class.
    fn insert(&mut self, c: Coset, prefix: Vec<u64>) -> Result<Option<usize>> {
        if let Some(bucket) = self.buckets.get(&prefix) {
            for &i in bucket {
                if proper_isometry(&self.reps[i].coset, &c)?.is_some() {
                    return Ok(None);
                }
            }
        }
        let o = o_plus(&c)?;
        self.reps.push(ClassRep { coset: c, o_plus: o });
        let idx = self.reps.len() - 1;
        self.buckets.entry(prefix).or_default().push(idx);
        Ok(Some(idx))
    }

    /// Deduplicates candidates by point set, computes their theta prefixes in
    /// parallel and inserts them in order.
    fn absorb(&mut self, candidates: Vec<Coset>) -> Result<Vec<usize>> {
        let fresh: Vec<Coset> = candidates
            .into_iter()
            .filter(|c| self.visited.insert(c.canonical_key()))
            .collect();
        let bound = self.bound;
        let prefixes: Vec<Vec<u64>> = fresh
            .par_iter()
            .map(|c| theta_counts(c, bound))
            .collect::<Result<_>>()?;
        let mut added = Vec::new();
        for (c, pre) in fresh.into_iter().zip(prefixes) {
            if let Some(i) = self.insert(c, pre)? {
                added.push(i);
            }
        }
        Ok(added)
    }
}

fn neighbor_candidates(reps: &[&Coset], p: u64, pull_back: bool) -> Result<Vec<Coset>> {
    let pb = BigInt::from(p);
    let sets: Vec<Vec<Coset>> = reps
        .par_iter()
        .map(|c| {
            let ns = neighbors(c, p)?;
            ns.members
                .into_iter()
                .map(|m| if pull_back { m.scale_shift(&pb) } else { Ok(m) })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(sets.into_iter().flatten().collect())
}

fn require_one_mod_a(c: &Coset, p: u64) -> Result<()> {
    if !(BigInt::from(p) - 1u32).mod_floor(c.modulus()).is_zero() {
        return Err(Error::InvalidPrime {
            p,
            reason: format!("spinor search needs p ≡ 1 mod {}", c.modulus()),
        });
    }
    Ok(())
}

/// Proper classes reachable from `c` in the `p`-neighbour graph, by layers:
/// each layer is the set of neighbours of the previous layer's new classes
/// that are not properly isometric to anything found before.
pub fn enumerate_classes(c: &Coset, p: u64) -> Result<ClassList> {
    check_prime(c, p)?;
    require_one_mod_a(c, p)?;
    let seed = c.reduced()?;
    let mut set = ClassSet::new(&seed)?;
    let mut layer = set.absorb(vec![seed.clone()])?;
    while !layer.is_empty() {
        let frontier: Vec<&Coset> = layer.iter().map(|&i| &set.reps[i].coset).collect();
        let cands = neighbor_candidates(&frontier, p, false)?;
        layer = set.absorb(cands)?;
    }
    Ok(ClassList {
        kind: ClassKind::SpinorCandidate,
        seed: c.clone(),
        mass: mass_of(&set.reps),
        representatives: set.reps,
        primes_used: vec![p],
        validated_with: Vec::new(),
    })
}

/// Proper classes of `gen⁺(c)` reachable by neighbour steps at the given
/// primes. Neighbours at `p ≢ 1 mod a` lie in `gen⁺(aL + p̄ν)` and are moved
/// back by scaling the shift by `p`. The result is closed under one
/// neighbour step at every prime.
pub fn enumerate_genus(c: &Coset, primes: &[u64]) -> Result<ClassList> {
    if primes.is_empty() {
        return Err(Error::Precondition("no primes given".into()));
    }
    for &p in primes {
        check_prime(c, p)?;
    }
    let seed = c.reduced()?;
    let mut set = ClassSet::new(&seed)?;
    let mut queue = set.absorb(vec![seed])?;
    while !queue.is_empty() {
        let frontier: Vec<&Coset> = queue.iter().map(|&i| &set.reps[i].coset).collect();
        let mut cands = Vec::new();
        for &p in primes {
            cands.extend(neighbor_candidates(&frontier, p, true)?);
        }
        queue = set.absorb(cands)?;
    }
    Ok(ClassList {
        kind: ClassKind::Genus,
        seed: c.clone(),
        mass: mass_of(&set.reps),
        representatives: set.reps,
        primes_used: primes.to_vec(),
        validated_with: Vec::new(),
    })
}

/// Whether two class lists describe the same proper classes.
pub fn same_classes(a: &ClassList, b: &ClassList) -> Result<bool> {
    if a.len() != b.len() || a.mass != b.mass {
        return Ok(false);
    }
    let mut used = vec![false; a.len()];
    for r in &b.representatives {
        match a.find_class(&r.coset)? {
            Some(i) if !used[i] => used[i] = true,
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Spinor genus candidate at `p`, cross-checked by rerunning the search at
/// each validation prime.
pub fn spinor_classes(c: &Coset, p: u64, validate: &[u64]) -> Result<ClassList> {
    let mut cl = enumerate_classes(c, p)?;
    for &q in validate {
        let other = enumerate_classes(c, q)?;
        if !same_classes(&cl, &other)? {
            return Err(Error::ValidationDisagreement {
                prime: q,
                candidate: Box::new(cl),
                other: Box::new(other),
            });
        }
        cl.validated_with.push(q);
    }
    Ok(cl)
}

/// Checks the class-list invariants: pairwise non-isometric representatives
/// with the seed's discriminant, level and conductor, correct automorphism
/// counts and mass.
pub fn check_class_list(cl: &ClassList) -> Result<()> {
    if cl.is_empty() {
        return Err(Error::EmptyClassList);
    }
    let s = &cl.seed;
    for r in &cl.representatives {
        let c = &r.coset;
        if c.discriminant() != s.discriminant()
            || c.level() != s.level()
            || c.modulus() != s.modulus()
        {
            return Err(Error::Inconsistent(format!("{c} has different invariants than {s}")));
        }
        if o_plus(c)? != r.o_plus {
            return Err(Error::Inconsistent(format!("wrong automorphism count for {c}")));
        }
    }
    for (i, x) in cl.representatives.iter().enumerate() {
        for y in &cl.representatives[i + 1..] {
            if proper_isometry(&x.coset, &y.coset)?.is_some() {
                return Err(Error::Inconsistent(format!(
                    "{} and {} are properly isometric",
                    x.coset, y.coset
                )));
            }
        }
    }
    if mass_of(&cl.representatives) != cl.mass {
        return Err(Error::Inconsistent("mass does not match automorphism counts".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMat3;

    fn coset(g: [[i64; 3]; 3], a: i64, nu: [i64; 3]) -> Coset {
        Coset::from_gram(IntMat3::from_i64(g), a, nu).unwrap()
    }

    const I3: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_class_genus() {
        let i3 = coset(I3, 1, [0, 0, 0]);
        let cl = enumerate_classes(&i3, 3).unwrap();
        assert_eq!(cl.len(), 1);
        assert_eq!(cl.mass, q(1, 24));
        let g = enumerate_genus(&i3, &[3, 5]).unwrap();
        assert_eq!(g.len(), 1);
        check_class_list(&g).unwrap();
    }

    #[test]
    fn rejects_bad_primes() {
        let c = coset(I3, 12, [5, 5, 5]);
        assert!(matches!(enumerate_classes(&c, 5), Err(Error::InvalidPrime { .. })));
        assert!(matches!(enumerate_classes(&c, 3), Err(Error::InvalidPrime { .. })));
        assert!(matches!(enumerate_genus(&c, &[13, 2]), Err(Error::InvalidPrime { .. })));
    }

    #[test]
    fn genus_contains_spinor_candidate() {
        let c = coset(I3, 4, [1, 1, 1]);
        let s = enumerate_classes(&c, 5).unwrap();
        let g = enumerate_genus(&c, &[5]).unwrap();
        check_class_list(&s).unwrap();
        check_class_list(&g).unwrap();
        for r in &s.representatives {
            assert!(g.find_class(&r.coset).unwrap().is_some());
        }
        let g2 = enumerate_genus(&c, &[5, 3, 7]).unwrap();
        for r in &g.representatives {
            assert!(g2.find_class(&r.coset).unwrap().is_some());
        }
    }

    #[test]
    fn cross_prime_stability() {
        let c = coset([[2, 1, 0], [1, 3, 1], [0, 1, 5]], 3, [1, 0, 2]);
        let a = enumerate_classes(&c, 7).unwrap();
        let b = enumerate_classes(&c, 13).unwrap();
        assert!(same_classes(&a, &b).unwrap());
        let v = spinor_classes(&c, 7, &[13]).unwrap();
        assert_eq!(v.validated_with, vec![13]);
    }
}
