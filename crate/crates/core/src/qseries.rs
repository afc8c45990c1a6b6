//! Truncated q-expansions with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `Σ_{n ≤ precision} c(n) qⁿ`; indices missing from `coeffs` are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    precision: u64,
    coeffs: BTreeMap<u64, BigRational>,
}

impl QSeries {
    pub fn zero(precision: u64) -> Self {
        QSeries {
            precision,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        assert!(!counts.is_empty());
        let mut s = QSeries::zero(counts.len() as u64 - 1);
        for (n, &c) in counts.iter().enumerate() {
            if c != 0 {
                s.coeffs
                    .insert(n as u64, BigRational::from_integer(BigInt::from(c)));
            }
        }
        s
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn coeff(&self, n: u64) -> BigRational {
        assert!(n <= self.precision, "index {n} beyond precision {}", self.precision);
        self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, n: u64, value: BigRational) {
        assert!(n <= self.precision);
        if value.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, value);
        }
    }

    pub fn add_at(&mut self, n: u64, value: &BigRational) {
        let v = self.coeff(n) + value;
        self.set(n, v);
    }

    /// Nonzero coefficients in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coeffs.iter().map(|(&n, c)| (n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncate(&self, precision: u64) -> Self {
        assert!(precision <= self.precision);
        QSeries {
            precision,
            coeffs: self.coeffs.range(..=precision).map(|(&n, c)| (n, c.clone())).collect(),
        }
    }

    fn combine(&self, other: &Self, sign: i32) -> Self {
        let precision = self.precision.min(other.precision);
        let mut out = self.truncate(precision);
        for (n, c) in other.coeffs.range(..=precision) {
            if sign > 0 {
                out.add_at(*n, c);
            } else {
                out.add_at(*n, &-c);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = QSeries::zero(self.precision);
        if !s.is_zero() {
            for (n, c) in &self.coeffs {
                out.coeffs.insert(*n, c * s);
            }
        }
        out
    }

    /// Indices `≤ min precision` where the two series differ.
    pub fn differences(&self, other: &Self) -> Vec<u64> {
        let d = self.sub(other);
        d.coeffs.keys().copied().collect()
    }

    pub fn has_nonnegative_integer_coeffs(&self) -> bool {
        self.coeffs
            .values()
            .all(|c| c.is_integer() && !c.is_negative())
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.coeffs {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})q^{n}")?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", self.precision + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct QSeriesJson {
    precision: u64,
    coeffs: BTreeMap<String, String>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        use serde::ser::SerializeStruct;
        // keys must come out in numeric order, so a plain map of strings won't do
        struct Coeffs<'a>(&'a BTreeMap<u64, BigRational>);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (n, c) in self.0 {
                    m.serialize_entry(&n.to_string(), &c.to_string())?;
                }
                m.end()
            }
        }
        let mut st = s.serialize_struct("QSeries", 2)?;
        st.serialize_field("precision", &self.precision)?;
        st.serialize_field("coeffs", &Coeffs(&self.coeffs))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = QSeriesJson::deserialize(d)?;
        let mut out = QSeries::zero(raw.precision);
        for (k, v) in raw.coeffs {
            let n: u64 = k.parse().map_err(D::Error::custom)?;
            if n > raw.precision {
                return Err(D::Error::custom(format!(
                    "coefficient index {n} exceeds precision {}",
                    raw.precision
                )));
            }
            let c: BigRational = v.parse().map_err(D::Error::custom)?;
            out.set(n, c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic() {
        let a = QSeries::from_counts(&[1, 6, 12, 8]);
        let b = QSeries::from_counts(&[1, 6, 12]);
        let d = a.sub(&b);
        assert_eq!(d.precision(), 2);
        assert!(d.is_zero());
        let h = a.scale(&q(1, 2));
        assert_eq!(h.coeff(1), q(3, 1));
        assert_eq!(h.add(&h), a);
        assert_eq!(a.differences(&a.scale(&q(2, 1))), vec![0, 1, 2, 3]);
    }

    #[test]
    fn json_roundtrip() {
        let mut s = QSeries::zero(30);
        s.set(3, q(-1, 8));
        s.set(27, q(3, 8));
        s.set(10, q(5, 1));
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"precision":30,"coeffs":{"3":"-1/8","10":"5","27":"3/8"}}"#
        );
        let back: QSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<QSeries>(r#"{"precision":2,"coeffs":{"5":"1"}}"#).is_err());
    }
}
