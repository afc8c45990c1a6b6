//! JSON encodings of cosets, class lists and reports.
//!
//! Integers are JSON numbers when they fit in 64 bits and decimal strings
//! otherwise; rationals are `"p/q"` strings. A coset is
//! `{"gram": G, "a": a, "nu": ν}`, optionally with `"ambient"` and `"basis"`
//! when its lattice is one of several inside a shared space.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::classes::{ClassKind, ClassList, ClassRep};
use crate::coset::{AmbientSpace, Coset, Lattice};
use crate::decomposition::{DecompositionReport, IdentityReport, SupportReport, UnaryFit};
use crate::error::{Error, Result};
use crate::linalg::{IntMat3, RatMat3};
use crate::qseries::QSeries;

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

pub fn int_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn parse_int(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(schema(format!("{what}: {n} is not an integer")))
            }
        }
        Value::String(s) => s
            .parse()
            .map_err(|_| schema(format!("{what}: {s:?} is not a decimal integer"))),
        other => Err(schema(format!("{what}: expected an integer, got {other}"))),
    }
}

fn rat_value(x: &BigRational) -> Value {
    json!(x.to_string())
}

fn parse_rat(v: &Value, what: &str) -> Result<BigRational> {
    match v {
        Value::String(s) => s
            .parse()
            .map_err(|_| schema(format!("{what}: {s:?} is not a rational"))),
        other => Ok(BigRational::from_integer(parse_int(other, what)?)),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("missing field {key:?}")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema(format!("{what} must be an object")))
}

fn as_array<'a>(v: &'a Value, len: Option<usize>, what: &str) -> Result<&'a Vec<Value>> {
    let a = v
        .as_array()
        .ok_or_else(|| schema(format!("{what} must be an array")))?;
    if let Some(n) = len {
        if a.len() != n {
            return Err(schema(format!("{what} must have {n} entries, found {}", a.len())));
        }
    }
    Ok(a)
}

fn int_matrix_value(m: &IntMat3) -> Value {
    Value::Array(
        m.0.iter()
            .map(|r| Value::Array(r.iter().map(int_value).collect()))
            .collect(),
    )
}

fn parse_int_matrix(v: &Value, what: &str) -> Result<IntMat3> {
    let rows = as_array(v, Some(3), what)?;
    let mut out = IntMat3::zero();
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in as_array(r, Some(3), what)?.iter().enumerate() {
            out.0[i][j] = parse_int(x, what)?;
        }
    }
    Ok(out)
}

fn rat_matrix_value(m: &RatMat3) -> Value {
    Value::Array(
        m.0.iter()
            .map(|r| Value::Array(r.iter().map(rat_value).collect()))
            .collect(),
    )
}

fn parse_rat_matrix(v: &Value, what: &str) -> Result<RatMat3> {
    let rows = as_array(v, Some(3), what)?;
    let mut out = RatMat3::identity();
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in as_array(r, Some(3), what)?.iter().enumerate() {
            out.0[i][j] = parse_rat(x, what)?;
        }
    }
    Ok(out)
}

/// Coset JSON. With `embedded`, the ambient Gram matrix and the lattice basis
/// are included so that several cosets can share one space.
pub fn coset_to_json(c: &Coset, embedded: bool) -> Value {
    let mut m = Map::new();
    m.insert("gram".into(), int_matrix_value(c.gram()));
    m.insert("a".into(), int_value(c.modulus()));
    m.insert(
        "nu".into(),
        Value::Array(c.shift().iter().map(int_value).collect()),
    );
    if embedded {
        m.insert(
            "ambient".into(),
            int_matrix_value(c.lattice().ambient().gram()),
        );
        m.insert("basis".into(), rat_matrix_value(c.lattice().basis()));
    }
    Value::Object(m)
}

/// Parses a coset. Gram and shape errors are `Error::Schema`; a shift whose
/// conductor is smaller than `a` yields `Error::ConductorMismatch`.
pub fn coset_from_json(v: &Value) -> Result<Coset> {
    coset_in_space(v, None)
}

fn coset_in_space(v: &Value, space: Option<&Arc<AmbientSpace>>) -> Result<Coset> {
    let obj = as_object(v, "coset")?;
    let gram = parse_int_matrix(field(obj, "gram")?, "gram")?;
    let a = parse_int(field(obj, "a")?, "a")?;
    let nu_raw = as_array(field(obj, "nu")?, Some(3), "nu")?;
    let nu = [
        parse_int(&nu_raw[0], "nu")?,
        parse_int(&nu_raw[1], "nu")?,
        parse_int(&nu_raw[2], "nu")?,
    ];
    let embedding = match (obj.get("ambient"), obj.get("basis")) {
        (Some(g0), Some(b)) => Some((
            parse_int_matrix(g0, "ambient")?,
            parse_rat_matrix(b, "basis")?,
        )),
        (None, None) => None,
        _ => return Err(schema("\"ambient\" and \"basis\" must appear together")),
    };
    let gram_err = |e: Error| match e {
        Error::NotSymmetric | Error::NotPositiveDefinite | Error::Singular | Error::NotIntegral => {
            schema(format!("invalid gram matrix: {e}"))
        }
        other => other,
    };
    let lattice = match embedding {
        None => Lattice::from_gram(gram).map_err(gram_err)?,
        Some((g0, basis)) => {
            let ambient = match space {
                Some(s) if *s.gram() == g0 => s.clone(),
                _ => AmbientSpace::new(g0).map_err(gram_err)?,
            };
            let lat = Lattice::new(ambient, basis).map_err(gram_err)?;
            if *lat.gram() != gram {
                return Err(schema("gram does not match ambient and basis"));
            }
            lat
        }
    };
    if !a.is_positive() {
        return Err(schema(format!("a must be positive, got {a}")));
    }
    Coset::new(lattice, a, nu)
}

pub fn class_list_to_json(cl: &ClassList) -> Value {
    json!({
        "kind": cl.kind.as_str(),
        "seed": coset_to_json(&cl.seed, true),
        "representatives": cl.representatives.iter().map(|r| json!({
            "coset": coset_to_json(&r.coset, true),
            "o_plus": r.o_plus,
        })).collect::<Vec<_>>(),
        "mass": rat_value(&cl.mass),
        "primes_used": cl.primes_used,
        "validated_with": cl.validated_with,
    })
}

fn parse_u64_list(v: &Value, what: &str) -> Result<Vec<u64>> {
    as_array(v, None, what)?
        .iter()
        .map(|x| {
            x.as_u64()
                .ok_or_else(|| schema(format!("{what}: {x} is not a nonnegative integer")))
        })
        .collect()
}

/// Parses a class list; all cosets share the seed's ambient space. Only the
/// shape is checked here, see `classes::check_class_list` for the invariants.
pub fn class_list_from_json(v: &Value) -> Result<ClassList> {
    let obj = as_object(v, "class list")?;
    let kind = match field(obj, "kind")?.as_str() {
        Some("genus") => ClassKind::Genus,
        Some("spinor-candidate") => ClassKind::SpinorCandidate,
        _ => return Err(schema("kind must be \"genus\" or \"spinor-candidate\"")),
    };
    let seed = coset_from_json(field(obj, "seed")?)?;
    let space = seed.lattice().ambient().clone();
    let mut representatives = Vec::new();
    for r in as_array(field(obj, "representatives")?, None, "representatives")? {
        let ro = as_object(r, "representative")?;
        let coset = coset_in_space(field(ro, "coset")?, Some(&space))?;
        if !coset.lattice().same_space(seed.lattice()) {
            return Err(schema("representative lives in a different space than the seed"));
        }
        let o_plus = field(ro, "o_plus")?
            .as_u64()
            .filter(|&o| o > 0)
            .ok_or_else(|| schema("o_plus must be a positive integer"))?;
        representatives.push(ClassRep { coset, o_plus });
    }
    Ok(ClassList {
        kind,
        seed,
        representatives,
        mass: parse_rat(field(obj, "mass")?, "mass")?,
        primes_used: parse_u64_list(field(obj, "primes_used")?, "primes_used")?,
        validated_with: parse_u64_list(field(obj, "validated_with")?, "validated_with")?,
    })
}

pub fn qseries_to_json(s: &QSeries) -> Value {
    serde_json::to_value(s).expect("q-series always serializes")
}

pub fn qseries_from_json(v: &Value) -> Result<QSeries> {
    serde_json::from_value(v.clone()).map_err(|e| schema(e.to_string()))
}

pub fn identity_report_to_json(r: &IdentityReport) -> Value {
    json!({
        "check": r.check,
        "prime": r.prime,
        "precision": r.precision,
        "passed": r.passed(),
        "violations": r.violations,
    })
}

fn support_to_json(s: &SupportReport) -> Value {
    json!({
        "passed": s.passed(),
        "square_classes": s.square_classes.iter().map(|c| json!({
            "t": c.t,
            "t_prime": c.t_prime,
            "b": c.b,
            "sequence": c.sequence.iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(m, v)| json!([m, rat_value(v)]))
                .collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "twist_relations_checked": s.twists_checked,
        "failures": s.failures,
    })
}

fn fit_to_json(f: &UnaryFit) -> Value {
    json!({
        "inferred_t": f.candidate_t,
        "terms": f.terms.iter().map(|(h, c)| json!({
            "t": h.t,
            "u": h.u,
            "character": h.psi.label,
            "modulus": h.psi.modulus,
            "coefficient": rat_value(c),
        })).collect::<Vec<_>>(),
        "residual": qseries_to_json(&f.residual),
        "residual_zero": f.residual.is_zero(),
    })
}

pub fn decomposition_to_json(r: &DecompositionReport) -> Value {
    json!({
        "precision": r.precision,
        "theta": qseries_to_json(&r.theta),
        "eisenstein": qseries_to_json(&r.e),
        "unary": qseries_to_json(&r.u),
        "cusp": qseries_to_json(&r.f),
        "sums_to_theta": r.sums_to_theta(),
        "genus_mass": rat_value(&r.genus_classes.mass),
        "genus_classes": r.genus_classes.len(),
        "spinor_mass": rat_value(&r.spinor_classes.mass),
        "spinor_classes": r.spinor_classes.len(),
        "support_check": support_to_json(&r.support),
        "unary_fit": r.unary_fit.as_ref().map(fit_to_json),
        "passed": r.passed(),
    })
}

/// Pretty-printed with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}
