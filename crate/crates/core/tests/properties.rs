use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;

use coset_theta::arith::{is_prime, mod_inverse};
use coset_theta::decomposition::verify_eichler;
use coset_theta::enumerate::{short_vectors, theta_counts};
use coset_theta::isometry::{is_witness, proper_isometry};
use coset_theta::json::{coset_from_json, coset_to_json};
use coset_theta::linalg::IntMat3;
use coset_theta::{Coset, QSeries};

const GRAMS: [[[i64; 3]; 3]; 6] = [
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    [[2, 1, 1], [1, 2, 1], [1, 1, 2]],
    [[2, 1, 0], [1, 3, 1], [0, 1, 5]],
    [[1, 0, 0], [0, 2, 1], [0, 1, 3]],
    [[3, 1, -1], [1, 3, 1], [-1, 1, 4]],
    [[2, 0, 1], [0, 2, 0], [1, 0, 7]],
];

fn coset_strategy() -> impl Strategy<Value = Coset> {
    (0..GRAMS.len(), prop::sample::select(vec![1i64, 2, 3, 4, 6, 12]), any::<[u8; 3]>())
        .prop_filter_map("shift must have full conductor", |(g, a, nu)| {
            let nu = nu.map(|x| x as i64 % a);
            if nu.iter().fold(a, |x, y| x.gcd(y)) != 1 {
                return None;
            }
            Some(Coset::from_gram(IntMat3::from_i64(GRAMS[g]), a, nu).unwrap())
        })
}

/// Products of elementary matrices, hence unimodular.
fn unimodular_strategy() -> impl Strategy<Value = IntMat3> {
    prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6).prop_map(|ops| {
        let mut m = IntMat3::identity();
        for (i, j, k) in ops {
            if i != j {
                let mut e = IntMat3::identity();
                e.0[i][j] = BigInt::from(k);
                m = m.mul(&e);
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_is_basis_independent(c in coset_strategy(), u in unimodular_strategy()) {
        let d = c.change_basis(&u).unwrap();
        prop_assert_eq!(theta_counts(&c, 40).unwrap(), theta_counts(&d, 40).unwrap());
        prop_assert_eq!(c.canonical_key(), d.canonical_key());
        let s = proper_isometry(&c, &d).unwrap().unwrap();
        prop_assert!(is_witness(&s, &c, &d));
    }

    #[test]
    fn short_vectors_are_sorted_members(c in coset_strategy(), bound in 0i64..80) {
        let v = short_vectors(&c, &BigInt::from(bound)).unwrap();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        for x in &v {
            prop_assert!(c.contains(x));
            prop_assert!(c.norm_of(x) <= BigInt::from(bound));
        }
        let counts = theta_counts(&c, bound as u64).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>(), v.len() as u64);
    }

    #[test]
    fn scale_shift_inverts(c in coset_strategy(), s in 1i64..50) {
        let a = c.modulus().clone();
        let s = BigInt::from(s);
        prop_assume!(s.gcd(&a) == BigInt::from(1));
        let inv = mod_inverse(&s, &a).unwrap();
        let back = c.scale_shift(&s).unwrap().scale_shift(&inv).unwrap();
        prop_assert_eq!(back.canonical_key(), c.canonical_key());
    }

    #[test]
    fn coset_json_round_trips(c in coset_strategy(), u in unimodular_strategy()) {
        let d = c.change_basis(&u).unwrap();
        let back = coset_from_json(&coset_to_json(&d, true)).unwrap();
        prop_assert_eq!(back.canonical_key(), d.canonical_key());
        prop_assert_eq!(back.gram(), d.gram());
    }

    #[test]
    fn qseries_arithmetic(xs in prop::collection::vec((0u64..30, -20i64..20, 1i64..9), 0..12)) {
        let mut f = QSeries::zero(30);
        for (n, p, q) in xs {
            f.add_at(n, &BigRational::new(p.into(), q.into()));
        }
        let g = f.scale(&BigRational::new(3.into(), 7.into()));
        prop_assert_eq!(f.add(&g).sub(&g), f.clone());
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<QSeries>(&text).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eichler_on_random_cosets(c in coset_strategy(), k in 0usize..3) {
        let level = c.theta_level();
        let p = (3u64..)
            .filter(|&p| is_prime(p) && (&level % p) != BigInt::from(0))
            .nth(k)
            .unwrap();
        prop_assert!(verify_eichler(&c, p, 60).unwrap().passed());
    }
}
