//! Closed points of P¹ over Q of degree ≤ 2, their residue fields, and the
//! restricted factorization that produces them.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::FuncFieldError;
use crate::arith::{divisors, format_rational, Rational};

/// A closed point of P¹_Q: a monic irreducible polynomial of degree 1 or 2,
/// or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

impl Place {
    /// The rational point `t = r`.
    pub fn rational(r: Rational) -> Self {
        Place::Finite(Poly::linear_root(&r))
    }

    /// Place cut out by `p`, which must be irreducible of degree 1 or 2.
    pub fn from_poly(p: &Poly) -> Result<Self, FuncFieldError> {
        match p.degree() {
            Some(1) => Ok(Place::Finite(p.monic())),
            Some(2) => {
                let m = p.monic();
                if has_rational_root(&m) {
                    Err(FuncFieldError::InvalidPlace(format!("{} is reducible over Q", m)))
                } else {
                    Ok(Place::Finite(m))
                }
            }
            Some(d) if d >= 3 => Err(FuncFieldError::FactorDegreeExceeded { degree: d }),
            _ => Err(FuncFieldError::InvalidPlace("constant polynomial".into())),
        }
    }

    /// Parse `"inf"`/`"infinity"`, a rational number `r` (the point `t = r`),
    /// or a polynomial in `t` of degree 1 or 2.
    pub fn parse(text: &str) -> Result<Self, FuncFieldError> {
        let s = text.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Place::Infinity);
        }
        let f = super::RationalFunction::parse(s)?;
        if !f.den().is_constant() {
            return Err(FuncFieldError::InvalidPlace(format!("'{}' is not a polynomial", s)));
        }
        if f.num().is_constant() {
            return Ok(Place::rational(f.num().coeff(0)));
        }
        Place::from_poly(f.num())
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.deg(),
            Place::Infinity => 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn minimal_polynomial(&self) -> Option<&Poly> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        }
    }

    /// The rational coordinate of a degree-1 finite place.
    pub fn rational_value(&self) -> Option<Rational> {
        match self {
            Place::Finite(p) if p.deg() == 1 => Some(-p.coeff(0)),
            _ => None,
        }
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |p: &Place| (p.degree(), p.is_infinity());
        key(self).cmp(&key(other)).then_with(|| match (self, other) {
            (Place::Finite(a), Place::Finite(b)) if a.deg() == 1 => (-a.coeff(0)).cmp(&-b.coeff(0)),
            (Place::Finite(a), Place::Finite(b)) => a.coeffs().cmp(b.coeffs()),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "({})", p),
            Place::Infinity => f.write_str("(inf)"),
        }
    }
}

/// An element `a + b·θ` of the residue field at `place`, θ a root of the
/// place's minimal polynomial (b = 0 at degree-1 places).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    pub place: Place,
    pub a: Rational,
    pub b: Rational,
}

impl ResidueElement {
    pub fn new(place: &Place, a: Rational, b: Rational) -> Self {
        let b = if place.degree() == 1 { Rational::zero() } else { b };
        ResidueElement { place: place.clone(), a, b }
    }

    pub fn scalar(place: &Place, a: Rational) -> Self {
        Self::new(place, a, Rational::zero())
    }

    pub fn one(place: &Place) -> Self {
        Self::scalar(place, Rational::one())
    }

    /// θ² = −c1·θ − c0 for the minimal polynomial θ² + c1·θ + c0.
    fn quadratic_coeffs(&self) -> Option<(Rational, Rational)> {
        match &self.place {
            Place::Finite(p) if p.deg() == 2 => Some((p.coeff(1), p.coeff(0))),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.place, other.place);
        match self.quadratic_coeffs() {
            None => Self::scalar(&self.place, &self.a * &other.a),
            Some((c1, c0)) => {
                let bd = &self.b * &other.b;
                let a = &self.a * &other.a - &bd * &c0;
                let b = &self.a * &other.b + &self.b * &other.a - &bd * &c1;
                Self::new(&self.place, a, b)
            }
        }
    }

    pub fn norm(&self) -> Rational {
        match self.quadratic_coeffs() {
            None => self.a.clone(),
            Some((c1, c0)) => &self.a * &self.a - &self.a * &self.b * &c1 + &self.b * &self.b * &c0,
        }
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(match self.quadratic_coeffs() {
            None => Self::scalar(&self.place, self.a.recip()),
            Some((c1, _)) => {
                let a = (&self.a - &self.b * &c1) / &n;
                let b = -&self.b / &n;
                Self::new(&self.place, a, b)
            }
        })
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Self::one(&self.place);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Some(acc)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.place, -&self.a, -&self.b)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        let b = if self.b.is_one() {
            "theta".to_string()
        } else if (-&self.b).is_one() {
            "-theta".to_string()
        } else {
            format!("{}*theta", format_rational(&self.b))
        };
        if self.a.is_zero() {
            f.write_str(&b)
        } else if self.b.is_negative() {
            write!(f, "{} - {}", format_rational(&self.a), b.trim_start_matches('-'))
        } else {
            write!(f, "{} + {}", format_rational(&self.a), b)
        }
    }
}

/// Evaluate a polynomial at θ, the root attached to `place` (finite only).
pub fn eval_at_root(p: &Poly, place: &Place) -> ResidueElement {
    let theta = match place {
        Place::Finite(m) if m.deg() == 2 => ResidueElement::new(place, Rational::zero(), Rational::one()),
        Place::Finite(m) => ResidueElement::scalar(place, -m.coeff(0)),
        Place::Infinity => panic!("eval_at_root at infinity"),
    };
    p.coeffs().iter().rev().fold(ResidueElement::scalar(place, Rational::zero()), |acc, c| {
        let prod = acc.mul(&theta);
        ResidueElement::new(place, prod.a + c, prod.b)
    })
}

fn has_rational_root(p: &Poly) -> bool {
    !rational_roots(p).is_empty()
}

/// Distinct rational roots by the rational-root theorem.
pub fn rational_roots(p: &Poly) -> Vec<Rational> {
    if p.is_constant() {
        return Vec::new();
    }
    let ints = p.primitive_integer();
    let mut roots = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if low > 0 {
        roots.push(Rational::zero());
    }
    let trimmed = &ints[low..];
    if trimmed.len() <= 1 {
        return roots;
    }
    let a0 = &trimmed[0];
    let an = trimmed.last().expect("nonempty");
    let at = |x: i64| -> BigInt {
        trimmed.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    };
    let (v1, vm1) = (at(1), at(-1));
    // homogeneous evaluation Σ a_i p^i q^{n-i}
    let vanishes = |p: &BigInt, q: &BigInt| -> bool {
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in trimmed.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        acc.is_zero()
    };
    let qs = divisors(an);
    let ps = divisors(a0);
    for q in &qs {
        for pabs in &ps {
            if !pabs.gcd(q).is_one() {
                continue;
            }
            for pnum in [pabs.clone(), -pabs.clone()] {
                // a root p/q in lowest terms has (q - p) | P(1) and (q + p) | P(-1)
                let dm = q - &pnum;
                let dp = q + &pnum;
                if !v1.is_zero() && (dm.is_zero() || !(&v1 % &dm).is_zero()) {
                    continue;
                }
                if !vm1.is_zero() && (dp.is_zero() || !(&vm1 % &dp).is_zero()) {
                    continue;
                }
                let cand = Rational::new(pnum.clone(), q.clone());
                if !roots.contains(&cand) && vanishes(&pnum, q) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Yun's squarefree decomposition of a monic polynomial: pairs `(s_k, k)`
/// with `p = Π s_k^k`, each `s_k` monic squarefree and non-constant.
pub fn squarefree_decomposition(p: &Poly) -> Vec<(Poly, u32)> {
    let p = p.monic();
    if p.is_constant() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let dp = p.derivative();
    let a0 = p.gcd(&dp);
    let mut b = p.div_rem(&a0).0;
    let mut c = dp.div_rem(&a0).0;
    let mut d = &c - &b.derivative();
    let mut k = 1;
    loop {
        let a = b.gcd(&d);
        if !a.is_constant() {
            out.push((a.clone(), k));
        }
        b = b.div_rem(&a).0;
        if b.is_constant() {
            break;
        }
        c = d.div_rem(&a).0;
        d = &c - &b.derivative();
        k += 1;
    }
    out
}

/// Split a monic squarefree polynomial into monic irreducible factors of
/// degree ≤ 2. Degree-≥3 irreducible content raises `FactorDegreeExceeded`.
pub fn split_squarefree(p: &Poly) -> Result<Vec<Poly>, FuncFieldError> {
    let mut factors = Vec::new();
    let mut rest = p.monic();
    for r in rational_roots(&rest) {
        let lin = Poly::linear_root(&r);
        rest = rest.div_rem(&lin).0;
        factors.push(lin);
    }
    while rest.deg() >= 3 {
        match find_quadratic_factor(&rest) {
            Some(q) => {
                rest = rest.div_rem(&q).0.monic();
                factors.push(q);
            }
            None => return Err(FuncFieldError::FactorDegreeExceeded { degree: rest.deg() }),
        }
    }
    if rest.deg() == 2 {
        factors.push(rest.monic());
    }
    factors.sort_by(|a, b| (a.deg(), a.coeffs()).cmp(&(b.deg(), b.coeffs())));
    Ok(factors)
}

/// Kronecker search for a quadratic factor `αt² + βt + γ` of a polynomial
/// with no rational roots: α | lc, γ | constant term, and the values at ±1
/// divide the polynomial's values there.
fn find_quadratic_factor(p: &Poly) -> Option<Poly> {
    let ints = p.primitive_integer();
    let poly = Poly::from_coeffs(ints.iter().cloned().map(Rational::from_integer).collect());
    let an = ints.last()?.clone();
    let a0 = ints[0].clone();
    let at_one = poly.eval(&Rational::one()).to_integer();
    let at_minus_one = poly.eval(&-Rational::one()).to_integer();
    let at_two = poly.eval(&Rational::from_integer(2.into())).to_integer();
    let alphas = divisors(&an);
    let gammas = divisors(&a0);
    let d1s = divisors(&at_one);
    for alpha in &alphas {
        for g in &gammas {
            for gamma in [g.clone(), -g.clone()] {
                for d in &d1s {
                    for v1 in [d.clone(), -d.clone()] {
                        let beta = &v1 - alpha - &gamma;
                        let vm1 = alpha - &beta + &gamma;
                        if vm1.is_zero() || !(&at_minus_one % &vm1).is_zero() {
                            continue;
                        }
                        let v2: BigInt = alpha * 4 + &beta * 2 + &gamma;
                        if v2.is_zero() || !(&at_two % &v2).is_zero() {
                            continue;
                        }
                        let q = Poly::from_coeffs(vec![
                            Rational::from_integer(gamma.clone()),
                            Rational::from_integer(beta),
                            Rational::from_integer(alpha.clone()),
                        ]);
                        if q.divides(&poly) {
                            return Some(q.monic());
                        }
                    }
                }
            }
        }
    }
    None
}

/// Factor a nonzero polynomial as `unit · Π m_i^{e_i}` over places.
pub fn factor_into_places(p: &Poly) -> Result<(Rational, Vec<(Poly, u32)>), FuncFieldError> {
    if p.is_zero() {
        return Err(FuncFieldError::ZeroFunction);
    }
    let unit = p.leading();
    let mut out = Vec::new();
    for (s, k) in squarefree_decomposition(p) {
        for f in split_squarefree(&s)? {
            out.push((f, k));
        }
    }
    out.sort_by(|(a, _), (b, _)| (a.deg(), a.coeffs()).cmp(&(b.deg(), b.coeffs())));
    Ok((unit, out))
}
