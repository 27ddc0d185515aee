//! Arakelov divisors on the ring of integers of Q or a quadratic field:
//! valuations at finite primes, absolute values at infinite places, the
//! degree map and the product formula.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{factor_integer, format_rational, is_squarefree, ln_big, mod_inverse, ord_p, parse_rational, sqrt_mod_prime, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArakelovError {
    #[error("element is zero")]
    ZeroElement,
    #[error("d = {0} is not a squarefree integer other than 0 and 1")]
    InvalidField(String),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("prime {prime} does not belong to {field}")]
    ForeignPrime { prime: String, field: String },
    #[error("invalid element: {0}")]
    InvalidElement(String),
}

/// `Q(√d)` with integral basis `1, ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadraticField {
    d: BigInt,
}

impl QuadraticField {
    pub fn new(d: BigInt) -> Result<Self, ArakelovError> {
        if d.is_zero() || d.is_one() || !is_squarefree(&d) {
            return Err(ArakelovError::InvalidField(d.to_string()));
        }
        Ok(QuadraticField { d })
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// `ω = (1 + √d)/2` when `d ≡ 1 (mod 4)`, otherwise `ω = √d`.
    pub fn omega_is_half(&self) -> bool {
        self.d.mod_floor(&BigInt::from(4)).is_one()
    }

    pub fn discriminant(&self) -> BigInt {
        if self.omega_is_half() {
            self.d.clone()
        } else {
            &self.d * 4
        }
    }

    /// `(real embeddings, complex pairs)`.
    pub fn signature(&self) -> (u32, u32) {
        if self.d.is_positive() {
            (2, 0)
        } else {
            (0, 1)
        }
    }

    /// Coefficients `(c0, c1)` of the minimal polynomial `x² + c1·x + c0` of ω.
    fn omega_minpoly(&self) -> (BigInt, BigInt) {
        if self.omega_is_half() {
            ((BigInt::one() - &self.d) / 4, BigInt::from(-1))
        } else {
            (-self.d.clone(), BigInt::zero())
        }
    }
}

/// Q itself or a quadratic field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Q,
    Quadratic(QuadraticField),
}

impl Field {
    /// `d = 1` gives Q.
    pub fn from_d(d: i64) -> Result<Self, ArakelovError> {
        Self::from_big_d(BigInt::from(d))
    }

    pub fn from_big_d(d: BigInt) -> Result<Self, ArakelovError> {
        if d.is_one() {
            Ok(Field::Q)
        } else {
            Ok(Field::Quadratic(QuadraticField::new(d)?))
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            Field::Q => 1,
            Field::Quadratic(_) => 2,
        }
    }

    pub fn infinite_places(&self) -> Vec<InfinitePlace> {
        match self {
            Field::Q => vec![InfinitePlace::Real { sign: 1 }],
            Field::Quadratic(k) if k.d.is_positive() => {
                vec![InfinitePlace::Real { sign: 1 }, InfinitePlace::Real { sign: -1 }]
            }
            Field::Quadratic(_) => vec![InfinitePlace::Complex],
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => f.write_str("Q"),
            Field::Quadratic(k) => write!(f, "Q(sqrt({}))", k.d),
        }
    }
}

/// `a + b·ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    a: Rational,
    b: Rational,
}

impl FieldElement {
    pub fn new(field: &Field, a: Rational, b: Rational) -> Result<Self, ArakelovError> {
        if *field == Field::Q && !b.is_zero() {
            return Err(ArakelovError::InvalidElement("b must be 0 over Q".into()));
        }
        Ok(FieldElement { field: field.clone(), a, b })
    }

    pub fn from_i64(field: &Field, a: i64, b: i64) -> Result<Self, ArakelovError> {
        Self::new(field, Rational::from_integer(a.into()), Rational::from_integer(b.into()))
    }

    /// `"a,b"` or just `"a"`, with rational entries.
    pub fn parse(field: &Field, text: &str) -> Result<Self, ArakelovError> {
        let bad = || ArakelovError::InvalidElement(format!("expected 'a,b', got '{}'", text));
        let mut parts = text.split(',');
        let a = parse_rational(parts.next().ok_or_else(bad)?).ok_or_else(bad)?;
        let b = match parts.next() {
            Some(s) => parse_rational(s).ok_or_else(bad)?,
            None => Rational::zero(),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::new(field, a, b)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coefficients(&self) -> (&Rational, &Rational) {
        (&self.a, &self.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// `α = x + y·√d` (with `y = 0` over Q).
    fn sqrt_d_coordinates(&self) -> (Rational, Rational) {
        match &self.field {
            Field::Quadratic(k) if k.omega_is_half() => {
                let half = Rational::new(1.into(), 2.into());
                (&self.a + &self.b * &half, &self.b * half)
            }
            _ => (self.a.clone(), self.b.clone()),
        }
    }

    pub fn norm(&self) -> Rational {
        match &self.field {
            Field::Q => self.a.clone(),
            Field::Quadratic(k) => {
                let (x, y) = self.sqrt_d_coordinates();
                &x * &x - Rational::from_integer(k.d.clone()) * &y * &y
            }
        }
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, ArakelovError> {
        if self.field != other.field {
            return Err(ArakelovError::InvalidElement("elements of different fields".into()));
        }
        let (a, b) = match &self.field {
            Field::Q => (&self.a * &other.a, Rational::zero()),
            Field::Quadratic(k) => {
                // ω² = −c1·ω − c0
                let (c0, c1) = k.omega_minpoly();
                let (c0, c1) = (Rational::from_integer(c0), Rational::from_integer(c1));
                let bb = &self.b * &other.b;
                (&self.a * &other.a - &bb * c0, &self.a * &other.b + &self.b * &other.a - bb * c1)
            }
        };
        Ok(FieldElement { field: self.field.clone(), a, b })
    }

    /// `(a, b, c)` with `α = (a + bω)/c`, `a, b` integers and `c > 0`.
    fn integral_scaling(&self) -> (BigInt, BigInt, BigInt) {
        let c = self.a.denom().lcm(self.b.denom());
        let cr = Rational::from_integer(c.clone());
        ((&self.a * &cr).to_integer(), (&self.b * &cr).to_integer(), c)
    }

    /// `log |τα|` at a real embedding; the conjugate that would cancel is
    /// obtained as `N(α)` divided by the other one.
    fn log_abs_real(&self, sign: i32) -> f64 {
        let (x, y) = self.sqrt_d_coordinates();
        let d = match &self.field {
            Field::Q => return ln_abs(&x),
            Field::Quadratic(k) => k.d.to_f64().expect("small d"),
        };
        let (xf, yf) = (rat_f64(&x), rat_f64(&y));
        let same_sign = (xf >= 0.0) == (yf * sign as f64 >= 0.0);
        let big_sign = if same_sign { sign } else { -sign };
        let big = (xf + big_sign as f64 * yf * d.sqrt()).abs().ln();
        if same_sign {
            big
        } else {
            ln_abs(&self.norm()) - big
        }
    }
}

fn rat_f64(r: &Rational) -> f64 {
    r.to_f64().expect("finite")
}

fn ln_abs(r: &Rational) -> f64 {
    ln_big(&r.numer().abs()) - ln_big(r.denom())
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            Field::Q => f.write_str(&format_rational(&self.a)),
            Field::Quadratic(_) => {
                let b = self.b.abs();
                let bw = if b.is_one() { "w".to_string() } else { format!("{}*w", format_rational(&b)) };
                match (self.a.is_zero(), self.b.is_zero(), self.b.is_negative()) {
                    (_, true, _) => f.write_str(&format_rational(&self.a)),
                    (true, false, neg) => write!(f, "{}{}", if neg { "-" } else { "" }, bw),
                    (false, false, neg) => write!(f, "{} {} {}", format_rational(&self.a), if neg { "-" } else { "+" }, bw),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Splitting {
    /// A prime of Q.
    Rational,
    Split,
    Inert,
    Ramified,
}

/// A prime ideal over `p`. For split and ramified primes, `root` is the
/// residue of ω, so the ideal is `(p, ω − root)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePrime {
    pub p: BigInt,
    pub splitting: Splitting,
    pub root: Option<BigInt>,
}

impl FinitePrime {
    pub fn residue_degree(&self) -> u32 {
        if self.splitting == Splitting::Inert {
            2
        } else {
            1
        }
    }

    pub fn ramification_index(&self) -> u32 {
        if self.splitting == Splitting::Ramified {
            2
        } else {
            1
        }
    }

    /// `log N℘ = f·log p`.
    pub fn log_norm(&self) -> f64 {
        self.residue_degree() as f64 * ln_big(&self.p)
    }
}

impl fmt::Display for FinitePrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.root {
            Some(r) => write!(f, "({}, w - {})", self.p, r),
            None => write!(f, "({})", self.p),
        }
    }
}

/// The primes of `k` above `p`, with `Σ e·f = [k : Q]`.
pub fn factor_prime(k: &Field, p: &BigInt) -> Result<Vec<FinitePrime>, ArakelovError> {
    if !crate::arith::is_probable_prime(p) || p.is_negative() {
        return Err(ArakelovError::NotPrime(p.to_string()));
    }
    let k = match k {
        Field::Q => return Ok(vec![FinitePrime { p: p.clone(), splitting: Splitting::Rational, root: None }]),
        Field::Quadratic(k) => k,
    };
    let (c0, c1) = k.omega_minpoly();
    let two = BigInt::from(2);
    let roots: Vec<BigInt> = if *p == two {
        (0..2).map(BigInt::from).filter(|x| (x * x + &c1 * x + &c0).is_even()).collect()
    } else {
        // x = (−c1 ± √disc)/2 with disc = c1² − 4c0 = discriminant of k
        let disc = &c1 * &c1 - &c0 * 4;
        match sqrt_mod_prime(&disc, p) {
            None => vec![],
            Some(s) => {
                let inv2 = mod_inverse(&two, p).expect("odd p");
                let mut rs: Vec<BigInt> = [&s, &(-&s)]
                    .iter()
                    .map(|s| ((-&c1 + *s) * &inv2).mod_floor(p))
                    .collect();
                rs.sort();
                rs.dedup();
                rs
            }
        }
    };
    let ramified = k.discriminant().is_multiple_of(p);
    Ok(match (ramified, roots.len()) {
        (true, _) => vec![FinitePrime { p: p.clone(), splitting: Splitting::Ramified, root: roots.first().cloned() }],
        (false, 0) => vec![FinitePrime { p: p.clone(), splitting: Splitting::Inert, root: None }],
        (false, _) => roots
            .into_iter()
            .map(|r| FinitePrime { p: p.clone(), splitting: Splitting::Split, root: Some(r) })
            .collect(),
    })
}

/// The root of ω's minimal polynomial congruent to `r` mod p, lifted mod `p^j`.
fn hensel_root(k: &QuadraticField, p: &BigInt, r: &BigInt, j: u32) -> BigInt {
    let (c0, c1) = k.omega_minpoly();
    let mut root = r.clone();
    let mut modulus = p.clone();
    for _ in 1..j {
        modulus *= p;
        let value = &root * &root + &c1 * &root + &c0;
        let slope = &root * 2 + &c1;
        let inv = mod_inverse(&slope, &modulus).expect("unramified prime has a simple root");
        root = (&root - value * inv).mod_floor(&modulus);
    }
    root
}

fn check_prime(alpha: &FieldElement, prime: &FinitePrime) -> Result<(), ArakelovError> {
    let ok = match (&alpha.field, prime.splitting) {
        (Field::Q, Splitting::Rational) => true,
        (Field::Quadratic(_), s) => s != Splitting::Rational,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ArakelovError::ForeignPrime { prime: prime.to_string(), field: alpha.field.to_string() })
    }
}

/// `v℘(β)` for integral nonzero `β = a + bω`.
fn valuation_integral(field: &Field, a: &BigInt, b: &BigInt, prime: &FinitePrime) -> i64 {
    let norm_of = |k: &QuadraticField| {
        let (c0, c1) = k.omega_minpoly();
        // N(a + bω) = a² − c1·ab + c0·b²
        a * a - &c1 * a * b + &c0 * b * b
    };
    match field {
        Field::Q => ord_p(a, &prime.p) as i64,
        Field::Quadratic(k) => {
            let n = ord_p(&norm_of(k), &prime.p) as i64;
            match prime.splitting {
                Splitting::Inert => n / 2,
                Splitting::Ramified | Splitting::Rational => n,
                Splitting::Split => {
                    let r = prime.root.as_ref().expect("split primes carry a root");
                    let mut v = 0;
                    let mut pj = BigInt::one();
                    for j in 1..=n as u32 {
                        pj *= &prime.p;
                        let rj = hensel_root(k, &prime.p, r, j);
                        if (a + b * rj).is_multiple_of(&pj) {
                            v = j as i64;
                        } else {
                            break;
                        }
                    }
                    v
                }
            }
        }
    }
}

/// The normalized valuation `v℘(α)`, with `v℘(k^×) = Z`.
pub fn valuation(alpha: &FieldElement, prime: &FinitePrime) -> Result<i64, ArakelovError> {
    if alpha.is_zero() {
        return Err(ArakelovError::ZeroElement);
    }
    check_prime(alpha, prime)?;
    let (a, b, c) = alpha.integral_scaling();
    let vc = prime.ramification_index() as i64 * ord_p(&c, &prime.p) as i64;
    Ok(valuation_integral(&alpha.field, &a, &b, prime) - vc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfinitePlace {
    /// The real embedding sending `√d` to `sign·√d`.
    Real { sign: i32 },
    Complex,
}

impl fmt::Display for InfinitePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfinitePlace::Real { sign: 1 } => f.write_str("real(+)"),
            InfinitePlace::Real { .. } => f.write_str("real(-)"),
            InfinitePlace::Complex => f.write_str("complex"),
        }
    }
}

/// `Σ m℘·℘ + Σ λ∞·℘∞`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArakelovDivisor {
    pub finite: BTreeMap<FinitePrime, i64>,
    pub infinite: BTreeMap<InfinitePlace, f64>,
}

impl ArakelovDivisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, other: &ArakelovDivisor) -> ArakelovDivisor {
        let mut out = self.clone();
        for (p, m) in &other.finite {
            let e = out.finite.entry(p.clone()).or_insert(0);
            *e += m;
            if *e == 0 {
                out.finite.remove(p);
            }
        }
        for (v, l) in &other.infinite {
            *out.infinite.entry(*v).or_insert(0.0) += l;
        }
        out
    }
}

/// `deg D = Σ m℘·log N℘ + Σ λ∞`.
pub fn degree(d: &ArakelovDivisor) -> f64 {
    let finite: f64 = d.finite.iter().map(|(p, m)| *m as f64 * p.log_norm()).sum();
    let infinite: f64 = d.infinite.values().sum();
    finite + infinite
}

/// `Σ v℘(α)·℘ + Σ −log|α|℘∞`, with `|α|℘∞ = |τα|²` at complex places.
pub fn principal_divisor(alpha: &FieldElement) -> Result<ArakelovDivisor, ArakelovError> {
    if alpha.is_zero() {
        return Err(ArakelovError::ZeroElement);
    }
    let (a, b, c) = alpha.integral_scaling();
    let beta = FieldElement::new(&alpha.field, Rational::from_integer(a), Rational::from_integer(b))?;
    let mut primes: Vec<BigInt> = factor_integer(&beta.norm().to_integer()).into_iter().map(|(p, _)| p).collect();
    if !c.is_one() {
        primes.extend(factor_integer(&c).into_iter().map(|(p, _)| p));
    }
    primes.sort();
    primes.dedup();
    let mut out = ArakelovDivisor::new();
    for p in primes {
        for prime in factor_prime(&alpha.field, &p)? {
            let v = valuation(alpha, &prime)?;
            if v != 0 {
                out.finite.insert(prime, v);
            }
        }
    }
    for place in alpha.field.infinite_places() {
        let lambda = match place {
            InfinitePlace::Real { sign } => -alpha.log_abs_real(sign),
            InfinitePlace::Complex => -ln_abs(&alpha.norm()),
        };
        out.infinite.insert(place, lambda);
    }
    Ok(out)
}

/// `deg(div α)`, zero up to roundoff by the product formula.
pub fn product_formula_check(alpha: &FieldElement) -> Result<f64, ArakelovError> {
    Ok(degree(&principal_divisor(alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> Field {
        Field::from_d(-1).unwrap()
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn field_validation() {
        assert_eq!(Field::from_d(1).unwrap(), Field::Q);
        assert!(Field::from_d(0).is_err());
        assert!(Field::from_d(8).is_err());
        assert!(Field::from_d(-4).is_err());
        let k = QuadraticField::new(big(5)).unwrap();
        assert!(k.omega_is_half());
        assert_eq!(k.discriminant(), big(5));
        assert_eq!(QuadraticField::new(big(-5)).unwrap().discriminant(), big(-20));
    }

    #[test]
    fn splitting_examples() {
        let two = factor_prime(&gauss(), &big(2)).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].splitting, Splitting::Ramified);
        assert_eq!(two[0].residue_degree(), 1);

        let five = factor_prime(&gauss(), &big(5)).unwrap();
        assert_eq!(five.len(), 2);
        assert!(five.iter().all(|p| p.splitting == Splitting::Split));
        let roots: Vec<BigInt> = five.iter().map(|p| p.root.clone().unwrap()).collect();
        assert_eq!(roots, vec![big(2), big(3)]);

        let three = factor_prime(&Field::from_d(2).unwrap(), &big(3)).unwrap();
        assert_eq!(three.len(), 1);
        assert_eq!(three[0].splitting, Splitting::Inert);
        assert_eq!(three[0].residue_degree(), 2);

        // d ≡ 1 mod 8 splits at 2, d ≡ 5 mod 8 is inert there
        assert_eq!(factor_prime(&Field::from_d(17).unwrap(), &big(2)).unwrap().len(), 2);
        assert_eq!(factor_prime(&Field::from_d(5).unwrap(), &big(2)).unwrap()[0].splitting, Splitting::Inert);
        assert!(factor_prime(&gauss(), &big(9)).is_err());
    }

    #[test]
    fn valuation_examples() {
        let k = gauss();
        let over2 = &factor_prime(&k, &big(2)).unwrap()[0];
        assert_eq!(valuation(&FieldElement::from_i64(&k, 1, 1).unwrap(), over2), Ok(1));

        // 2 + i lies in (5, ω + 2) = (5, ω − 3), not in (5, ω − 2)
        let five = factor_prime(&k, &big(5)).unwrap();
        let alpha = FieldElement::from_i64(&k, 2, 1).unwrap();
        assert_eq!(valuation(&alpha, &five[0]), Ok(0));
        assert_eq!(valuation(&alpha, &five[1]), Ok(1));

        let q2 = Field::from_d(2).unwrap();
        let three = &factor_prime(&q2, &big(3)).unwrap()[0];
        assert_eq!(valuation(&FieldElement::from_i64(&q2, 3, 0).unwrap(), three), Ok(1));
        assert_eq!(valuation(&FieldElement::from_i64(&q2, 0, 0).unwrap(), three), Err(ArakelovError::ZeroElement));
    }

    #[test]
    fn split_valuations_need_lifting() {
        // (2 + i)^3 = 2 + 11i has valuation 3 on one branch over 5
        let k = gauss();
        let five = factor_prime(&k, &big(5)).unwrap();
        let alpha = FieldElement::from_i64(&k, 2, 11).unwrap();
        let vs: Vec<i64> = five.iter().map(|p| valuation(&alpha, p).unwrap()).collect();
        assert_eq!(vs, vec![0, 3]);
        // 1/(2 + i) = (2 − i)/5
        let inv = FieldElement::new(&k, Rational::new(2.into(), 5.into()), Rational::new((-1).into(), 5.into())).unwrap();
        let vs: Vec<i64> = five.iter().map(|p| valuation(&inv, p).unwrap()).collect();
        assert_eq!(vs, vec![0, -1]);
    }

    #[test]
    fn principal_divisor_examples() {
        let d = principal_divisor(&FieldElement::from_i64(&Field::Q, 2, 0).unwrap()).unwrap();
        assert_eq!(d.finite.values().copied().collect::<Vec<_>>(), vec![1]);
        assert!((d.infinite[&InfinitePlace::Real { sign: 1 }] + 2f64.ln()).abs() < 1e-15);

        let k = gauss();
        let d = principal_divisor(&FieldElement::from_i64(&k, 1, 1).unwrap()).unwrap();
        assert_eq!(d.finite.len(), 1);
        assert!((d.infinite[&InfinitePlace::Complex] + 2f64.ln()).abs() < 1e-15);

        let d = principal_divisor(&FieldElement::from_i64(&k, 0, 1).unwrap()).unwrap();
        assert!(d.finite.is_empty());
        assert_eq!(d.infinite[&InfinitePlace::Complex], 0.0);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(&ArakelovDivisor::new()), 0.0);
        let q2 = Field::from_d(2).unwrap();
        let three = factor_prime(&q2, &big(3)).unwrap().remove(0);
        let mut d = ArakelovDivisor::new();
        d.finite.insert(three, 1);
        assert!((degree(&d) - 9f64.ln()).abs() < 1e-15);
        let mut inf = ArakelovDivisor::new();
        inf.infinite.insert(InfinitePlace::Real { sign: 1 }, 2.5);
        assert_eq!(degree(&inf), 2.5);
    }

    #[test]
    fn product_formula_examples() {
        for (field, a, b) in [(Field::Q, 2, 0), (gauss(), 1, 1), (Field::from_d(2).unwrap(), 3, 0)] {
            let alpha = FieldElement::from_i64(&field, a, b).unwrap();
            assert!(product_formula_check(&alpha).unwrap().abs() < 1e-12);
        }
        // 99 − 70√2 nearly vanishes at one real place
        let q2 = Field::from_d(2).unwrap();
        let alpha = FieldElement::from_i64(&q2, 99, -70).unwrap();
        assert!(product_formula_check(&alpha).unwrap().abs() < 1e-12);
        let unit = principal_divisor(&alpha).unwrap();
        assert!(unit.finite.is_empty());
    }
}
