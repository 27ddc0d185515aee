//! JSON inputs for the precycle commands.
//!
//! Precycles on P¹ or on lines of P²:
//! `{"terms":[{"f":"<poly>/<poly>","support":"P1"|{"line":[a,b,c]}}]}`.
//!
//! K₁-precycles:
//! `{"terms":[{"g":<product>,"line":[c0,c1,c2]}]}`, where a product is
//! `{"constant":"a+b*i","factors":[{"form":[c0,c1,c2],"exp":k}]}` and form
//! coefficients are Gaussian rationals given as strings or integers.

use heightlab::arch_pairing::{CyclePoint, Line, P2Point, Precycle0, Support, ZeroCycle};
use heightlab::funcfield::{Divisor, RationalFunction};
use heightlab::klm::{Form, FormProduct, Gauss, K1Precycle};
use num_bigint::BigInt;
use serde_json::Value;

use crate::CliError;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::usage(msg)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| bad(format!("missing field '{}'", key)))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| bad(format!("'{}' must be an array", what)))
}

fn big(v: &Value) -> Result<BigInt, CliError> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().expect("i64"))),
        Value::String(s) => s.trim().parse().map_err(|_| bad(format!("'{}' is not an integer", s))),
        _ => Err(bad(format!("{} is not an integer", v))),
    }
}

fn triple<T>(v: &Value, what: &str, f: impl Fn(&Value) -> Result<T, CliError>) -> Result<[T; 3], CliError> {
    let a = array(v, what)?;
    if a.len() != 3 {
        return Err(bad(format!("'{}' needs three entries", what)));
    }
    Ok([f(&a[0])?, f(&a[1])?, f(&a[2])?])
}

pub fn line(v: &Value) -> Result<Line, CliError> {
    let [a, b, c] = triple(v, "line", big)?;
    Ok(Line::new(a, b, c)?)
}

pub fn precycle0(v: &Value) -> Result<Precycle0, CliError> {
    let mut terms = Vec::new();
    for t in array(field(v, "terms")?, "terms")? {
        let f = field(t, "f")?.as_str().ok_or_else(|| bad("'f' must be a string"))?;
        let f = RationalFunction::parse(f)?;
        let support = match field(t, "support")? {
            Value::String(s) if s == "P1" => Support::P1,
            s => Support::Line(line(field(s, "line")?)?),
        };
        terms.push((f, support));
    }
    Ok(Precycle0::new(terms))
}

/// A 0-cycle given as a P¹ divisor string, a list of P² points, or the
/// boundary of a precycle.
pub fn zero_cycle(v: &Value) -> Result<ZeroCycle, CliError> {
    if let Some(s) = v.get("divisor") {
        let s = s.as_str().ok_or_else(|| bad("'divisor' must be a string"))?;
        return Ok(ZeroCycle::from_divisor(&Divisor::parse(s)?));
    }
    if let Some(pts) = v.get("points") {
        let mut z = ZeroCycle::new();
        for p in array(pts, "points")? {
            let c = triple(field(p, "point")?, "point", big)?;
            let m = field(p, "mult")?.as_i64().ok_or_else(|| bad("'mult' must be an integer"))?;
            z.add_point(CyclePoint::P2(P2Point::from_integers(&c)), m);
        }
        return Ok(z);
    }
    if let Some(p) = v.get("precycle") {
        return Ok(heightlab::arch_pairing::boundary(&precycle0(p)?)?);
    }
    Err(bad("0-cycle needs one of 'divisor', 'points', 'precycle'"))
}

fn gauss(v: &Value) -> Result<Gauss, CliError> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(Gauss::from_i64(n.as_i64().expect("i64"), 0)),
        Value::String(s) => Ok(s.parse()?),
        _ => Err(bad(format!("{} is not a Gaussian rational", v))),
    }
}

pub fn form(v: &Value) -> Result<Form, CliError> {
    Form::new(triple(v, "form", gauss)?).ok_or_else(|| bad("zero linear form"))
}

pub fn form_product(v: &Value) -> Result<FormProduct, CliError> {
    let c = match v.get("constant") {
        Some(c) => gauss(c)?,
        None => Gauss::one(),
    };
    if c.is_zero() {
        return Err(bad("constant must be nonzero"));
    }
    let mut out = FormProduct::constant(c);
    if let Some(fs) = v.get("factors") {
        for f in array(fs, "factors")? {
            let k = field(f, "exp")?.as_i64().ok_or_else(|| bad("'exp' must be an integer"))?;
            out = out.times(triple(field(f, "form")?, "form", gauss)?, k)?;
        }
    }
    Ok(out)
}

pub fn k1_precycle(v: &Value) -> Result<K1Precycle, CliError> {
    let mut terms = Vec::new();
    for t in array(field(v, "terms")?, "terms")? {
        terms.push((form_product(field(t, "g")?)?, form(field(t, "line")?)?));
    }
    Ok(K1Precycle::new(terms)?)
}
