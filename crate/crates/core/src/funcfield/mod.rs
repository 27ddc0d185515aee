//! Exact arithmetic in Q(t): places of P¹, divisors, residue-field
//! evaluation, tame symbols and Weil reciprocity.
//!
//! Over a non-closed base the reciprocity law reads
//! `Π_p N_{k(p)/Q}(T_p{f,g}) = 1`, so [`weil_product`] multiplies the
//! residue-field norms of the local symbols.

pub mod place;
pub mod poly;
pub mod ratfunc;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use thiserror::Error;

pub use place::{Place, ResidueElement};
pub use poly::Poly;
pub use ratfunc::RationalFunction;

use crate::arith::Rational;
use place::{eval_at_root, factor_into_places};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncFieldError {
    #[error("irreducible factor of degree {degree} exceeds the supported degree 2")]
    FactorDegreeExceeded { degree: usize },
    #[error("function is not a unit at the place (order {order})")]
    NotAUnit { order: i64 },
    #[error("the zero function has no divisor")]
    ZeroFunction,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid place: {0}")]
    InvalidPlace(String),
    #[error("syntax error at {position}: {message}")]
    Parse { position: usize, message: String },
}

/// A divisor on P¹_Q: finitely many places with nonzero multiplicities,
/// kept in canonical place order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Divisor {
    support: BTreeMap<Place, i64>,
}

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_point(&mut self, place: Place, mult: i64) {
        if mult == 0 {
            return;
        }
        let e = self.support.entry(place.clone()).or_insert(0);
        *e += mult;
        if *e == 0 {
            self.support.remove(&place);
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Place, i64)>) -> Self {
        let mut d = Self::new();
        for (p, m) in terms {
            d.add_point(p, m);
        }
        d
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, m) in &other.support {
            d.add_point(p.clone(), *m);
        }
        d
    }

    pub fn scaled(&self, k: i64) -> Divisor {
        Divisor::from_terms(self.support.iter().map(|(p, m)| (p.clone(), m * k)))
    }

    pub fn multiplicity(&self, p: &Place) -> i64 {
        self.support.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Place, &i64)> {
        self.support.iter()
    }

    pub fn places(&self) -> impl Iterator<Item = &Place> {
        self.support.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    /// Σ ord · deg(place).
    pub fn degree(&self) -> i64 {
        self.support.iter().map(|(p, m)| m * p.degree() as i64).sum()
    }

    pub fn contains(&self, p: &Place) -> bool {
        self.support.contains_key(p)
    }

    /// Parse text such as `"(2) - (3)"` or `"(t^2 - 2) - 2(5) + (inf)"`.
    /// Each term is an optional integer multiplicity followed by a place in
    /// parentheses; the empty string and `"0"` give the zero divisor.
    pub fn parse(text: &str) -> Result<Divisor, FuncFieldError> {
        let src = text.trim();
        let mut d = Divisor::new();
        if src.is_empty() || src == "0" {
            return Ok(d);
        }
        let bytes = src.as_bytes();
        let err = |pos: usize, msg: &str| FuncFieldError::Parse { position: pos, message: msg.to_string() };
        let mut pos = 0;
        let mut first = true;
        while pos < bytes.len() {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let mut sign = 1i64;
            if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                sign = if bytes[pos] == b'-' { -1 } else { 1 };
                pos += 1;
            } else if !first {
                return Err(err(pos, "expected '+' or '-'"));
            }
            first = false;
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let mult: i64 = if start == pos {
                1
            } else {
                src[start..pos].parse().map_err(|_| err(start, "multiplicity too large"))?
            };
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'*') {
                pos += 1;
            }
            if pos >= bytes.len() || bytes[pos] != b'(' {
                return Err(err(pos, "expected '('"));
            }
            let open = pos;
            let mut depth = 0;
            while pos < bytes.len() {
                match bytes[pos] {
                    b'(' => depth += 1,
                    b')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(err(open, "unbalanced '('"));
            }
            let place = Place::parse(&src[open + 1..pos]).map_err(|e| match e {
                FuncFieldError::Parse { position, message } => err(open + 1 + position, &message),
                other => other,
            })?;
            pos += 1;
            d.add_point(place, sign * mult);
        }
        Ok(d)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, m)) in self.support.iter().enumerate() {
            let sign = if *m < 0 { "-" } else { "+" };
            if i == 0 {
                if *m < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if m.abs() != 1 {
                write!(f, "{}", m.abs())?;
            }
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

pub fn divisor_of(f: &RationalFunction) -> Result<Divisor, FuncFieldError> {
    if f.is_zero() {
        return Err(FuncFieldError::ZeroFunction);
    }
    let mut d = Divisor::new();
    let (_, zeros) = factor_into_places(f.num())?;
    let (_, poles) = factor_into_places(f.den())?;
    for (m, k) in zeros {
        d.add_point(Place::Finite(m), k as i64);
    }
    for (m, k) in poles {
        d.add_point(Place::Finite(m), -(k as i64));
    }
    d.add_point(Place::Infinity, f.den().deg() as i64 - f.num().deg() as i64);
    Ok(d)
}

pub fn order_at(f: &RationalFunction, p: &Place) -> Result<i64, FuncFieldError> {
    if f.is_zero() {
        return Err(FuncFieldError::ZeroFunction);
    }
    Ok(match p {
        Place::Infinity => f.den().deg() as i64 - f.num().deg() as i64,
        Place::Finite(m) => f.num().strip_factor(m).0 as i64 - f.den().strip_factor(m).0 as i64,
    })
}

/// Order of `f` at `p` together with the value of its unit part
/// `f · π^{-ν}` in the residue field (π = minimal polynomial, or 1/t at ∞).
pub fn unit_part(f: &RationalFunction, p: &Place) -> Result<(i64, ResidueElement), FuncFieldError> {
    if f.is_zero() {
        return Err(FuncFieldError::ZeroFunction);
    }
    match p {
        Place::Infinity => {
            let nu = f.den().deg() as i64 - f.num().deg() as i64;
            let v = f.num().leading() / f.den().leading();
            Ok((nu, ResidueElement::scalar(p, v)))
        }
        Place::Finite(m) => {
            let (kn, num) = f.num().strip_factor(m);
            let (kd, den) = f.den().strip_factor(m);
            let n = eval_at_root(&num, p);
            let d = eval_at_root(&den, p);
            let v = n.mul(&d.inv().expect("cofactor is a unit at the place"));
            Ok((kn as i64 - kd as i64, v))
        }
    }
}

pub fn evaluate_at(f: &RationalFunction, p: &Place) -> Result<ResidueElement, FuncFieldError> {
    let (nu, v) = unit_part(f, p)?;
    if nu != 0 {
        return Err(FuncFieldError::NotAUnit { order: nu });
    }
    Ok(v)
}

/// `T_p{f,g} = (-1)^{ν(f)ν(g)} (f^{ν(g)} / g^{ν(f)})(p)`.
pub fn tame_symbol(f: &RationalFunction, g: &RationalFunction, p: &Place) -> Result<ResidueElement, FuncFieldError> {
    let (a, u) = unit_part(f, p)?;
    let (b, v) = unit_part(g, p)?;
    let num = u.pow(b).expect("unit");
    let den = v.pow(a).expect("unit");
    let t = num.mul(&den.inv().expect("unit"));
    Ok(if (a * b) % 2 != 0 { t.neg() } else { t })
}

pub fn residue_norm(x: &ResidueElement) -> Rational {
    x.norm()
}

/// One local factor of the reciprocity product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSymbol {
    pub place: Place,
    pub symbol: ResidueElement,
    pub norm: Rational,
}

/// Local symbols at every place in `|div f| ∪ |div g|`, in canonical order.
pub fn weil_factors(f: &RationalFunction, g: &RationalFunction) -> Result<Vec<LocalSymbol>, FuncFieldError> {
    let df = divisor_of(f)?;
    let dg = divisor_of(g)?;
    let mut places: Vec<Place> = df.places().chain(dg.places()).cloned().collect();
    places.sort();
    places.dedup();
    places
        .into_iter()
        .map(|p| {
            let symbol = tame_symbol(f, g, &p)?;
            let norm = residue_norm(&symbol);
            Ok(LocalSymbol { place: p, symbol, norm })
        })
        .collect()
}

/// `Π_p N(T_p{f,g})`; equals 1 for all admissible inputs.
pub fn weil_product(f: &RationalFunction, g: &RationalFunction) -> Result<Rational, FuncFieldError> {
    Ok(weil_factors(f, g)?.iter().fold(Rational::one(), |acc, s| acc * &s.norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn rf(s: &str) -> RationalFunction {
        RationalFunction::parse(s).unwrap()
    }

    fn place(s: &str) -> Place {
        Place::parse(s).unwrap()
    }

    #[test]
    fn divisor_examples() {
        let d = divisor_of(&rf("t")).unwrap();
        assert_eq!(d, Divisor::from_terms([(place("t"), 1), (Place::Infinity, -1)]));

        let d = divisor_of(&rf("(t-2)/(t-3)")).unwrap();
        assert_eq!(d, Divisor::from_terms([(place("t-2"), 1), (place("t-3"), -1)]));
        assert_eq!(d.multiplicity(&Place::Infinity), 0);

        let d = divisor_of(&rf("t^2+1")).unwrap();
        assert_eq!(d, Divisor::from_terms([(place("t^2+1"), 1), (Place::Infinity, -2)]));
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn divisor_of_zero_and_cubic() {
        assert_eq!(divisor_of(&RationalFunction::zero()), Err(FuncFieldError::ZeroFunction));
        assert_eq!(
            divisor_of(&rf("(t^3 - 2)/(t-1)")),
            Err(FuncFieldError::FactorDegreeExceeded { degree: 3 })
        );
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_at(&rf("t^2"), &place("t")).unwrap(), 2);
        assert_eq!(order_at(&rf("(t-2)/(t-3)"), &Place::Infinity).unwrap(), 0);
        assert_eq!(order_at(&rf("t^2+1"), &place("t^2+1")).unwrap(), 1);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(evaluate_at(&rf("t-2"), &place("t")).unwrap().a, int(-2));
        let v = evaluate_at(&rf("(t-2)/(t-3)"), &place("t^2+1")).unwrap();
        // (θ-2)/(θ-3) = (θ-2)(-θ-3)/10 = (7 - θ)/10 using θ² = -1
        assert_eq!((v.a.clone(), v.b.clone()), (rat(7, 10), rat(-1, 10)));
        assert_eq!(evaluate_at(&rf("1/t"), &Place::Infinity), Err(FuncFieldError::NotAUnit { order: 1 }));
    }

    #[test]
    fn tame_symbol_examples() {
        let t = tame_symbol(&rf("t"), &rf("1-t"), &place("t")).unwrap();
        assert!(t.is_one());
        let t = tame_symbol(&rf("t"), &rf("t-2"), &Place::Infinity).unwrap();
        assert_eq!(t.a, int(-1));
        let t = tame_symbol(&rf("t^2+1"), &rf("(t-1)/(t-2)"), &place("t-1")).unwrap();
        assert_eq!(t.a, int(2));
        // both orders zero: symbol is 1
        let t = tame_symbol(&rf("t+5"), &rf("t+7"), &place("t")).unwrap();
        assert!(t.is_one());
    }

    #[test]
    fn residue_norm_examples() {
        let p1 = place("t-4");
        assert_eq!(residue_norm(&ResidueElement::scalar(&p1, int(5))), int(5));
        let q = place("t^2+1");
        let x = evaluate_at(&rf("(t-2)/(t-1)"), &q).unwrap();
        assert_eq!(residue_norm(&x), rat(5, 2));
        assert_eq!(residue_norm(&ResidueElement::scalar(&q, int(0))), int(0));
    }

    #[test]
    fn weil_examples() {
        let factors = weil_factors(&rf("t"), &rf("t-2")).unwrap();
        let norms: Vec<_> = factors.iter().map(|s| s.norm.clone()).collect();
        assert_eq!(norms, vec![rat(-1, 2), int(2), int(-1)]);
        assert_eq!(weil_product(&rf("t"), &rf("t-2")).unwrap(), int(1));

        let factors = weil_factors(&rf("t^2+1"), &rf("(t-1)/(t-2)")).unwrap();
        let norms: Vec<_> = factors.iter().map(|s| s.norm.clone()).collect();
        assert_eq!(norms, vec![int(2), rat(1, 5), int(1), rat(5, 2)]);
        assert_eq!(weil_product(&rf("t^2+1"), &rf("(t-1)/(t-2)")).unwrap(), int(1));

        assert_eq!(weil_product(&rf("7/3"), &rf("(t^2+t+1)/(t-5)^2")).unwrap(), int(1));
    }

    #[test]
    fn divisor_display() {
        let d = divisor_of(&rf("t^2/(t^2+2)")).unwrap();
        assert_eq!(d.to_string(), "2(t) - (t^2 + 2)");
    }

    #[test]
    fn divisor_parse_round_trip() {
        let d = Divisor::parse("(t^2 - 2) - 2(5) + (inf)").unwrap();
        assert_eq!(d.multiplicity(&place("t^2-2")), 1);
        assert_eq!(d.multiplicity(&place("t-5")), -2);
        assert_eq!(d.multiplicity(&Place::Infinity), 1);
        assert_eq!(Divisor::parse(&d.to_string()).unwrap(), d);
        assert_eq!(Divisor::parse("(2) - (3)").unwrap().degree(), 0);
        assert!(Divisor::parse("(2) (3)").is_err());
        assert!(Divisor::parse("(t^3 - 2)").is_err());
    }
}
