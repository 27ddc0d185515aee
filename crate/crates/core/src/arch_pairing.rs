//! The m = 0 Archimedean pairing between a precycle `Σ (f_α, Z_α)` and a
//! 0-cycle, `⟨ξ₁, ξ₂⟩ = Σ_α Σ_{q ∈ Z_α} m_q log|N f_α(q)|`, carried exactly as
//! the rational under the logarithm.
//!
//! Supports are either P¹ itself or rational lines in P². A line `V(n)` is
//! parameterized by `t ↦ A + t·B`, where `A` and `B` are cross products of
//! `n` with coordinate vectors (see [`Line::point_at`]).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{format_rational, ln_abs_rational, Rational};
use crate::funcfield::place::factor_into_places;
use crate::funcfield::poly::{interpolate, sylvester_resultant};
use crate::funcfield::{divisor_of, unit_part, Divisor, FuncFieldError, Place, Poly, RationalFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairingError {
    #[error("supports are not disjoint at {0}")]
    SupportsNotDisjoint(String),
    #[error("function is not a unit at {0}")]
    NotAUnit(String),
    #[error("map is constant or its numerator and denominator share a root")]
    DegenerateMap,
    #[error("mixed ambient spaces: {0}")]
    AmbientMismatch(String),
    #[error("invalid line: {0}")]
    InvalidLine(String),
    #[error(transparent)]
    FuncField(#[from] FuncFieldError),
}

fn cross(u: &[BigInt; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn unit_vector(i: usize) -> [BigInt; 3] {
    let mut e = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    e[i] = BigInt::one();
    e
}

/// The line `a·z₀ + b·z₁ + c·z₂ = 0`, stored primitive with its first nonzero
/// coefficient positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    n: [BigInt; 3],
}

impl Line {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Result<Self, PairingError> {
        let g = a.gcd(&b).gcd(&c);
        if g.is_zero() {
            return Err(PairingError::InvalidLine("all coefficients are zero".into()));
        }
        let mut n = [a / &g, b / &g, c / &g];
        if n.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            for x in n.iter_mut() {
                *x = -x.clone();
            }
        }
        Ok(Line { n })
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Result<Self, PairingError> {
        Self::new(a.into(), b.into(), c.into())
    }

    /// The coordinate line `V(z_j)`.
    pub fn coordinate(j: usize) -> Self {
        Line { n: unit_vector(j) }
    }

    pub fn coefficients(&self) -> &[BigInt; 3] {
        &self.n
    }

    fn pivot(&self) -> usize {
        self.n.iter().position(|x| !x.is_zero()).expect("nonzero line")
    }

    /// `A = n × e_{j+1}`, the point at parameter 0 (j = pivot index).
    fn base_point(&self) -> [BigInt; 3] {
        cross(&self.n, &unit_vector((self.pivot() + 1) % 3))
    }

    /// `B = e_{j+2} × n`, the point at parameter ∞.
    fn direction(&self) -> [BigInt; 3] {
        cross(&unit_vector((self.pivot() + 2) % 3), &self.n)
    }

    /// The point `A + t·B` (or `B` at infinity). For `V(z₀)` this gives
    /// `t = z₁/z₂`.
    pub fn point_at(&self, t: Option<&Rational>) -> P2Point {
        let a = self.base_point();
        let b = self.direction();
        match t {
            None => P2Point::from_integers(&b),
            Some(t) => {
                let coords: Vec<Rational> = (0..3)
                    .map(|i| Rational::from_integer(a[i].clone()) + t * Rational::from_integer(b[i].clone()))
                    .collect();
                P2Point::new([coords[0].clone(), coords[1].clone(), coords[2].clone()])
                    .expect("parameterization is injective")
            }
        }
    }

    pub fn contains(&self, p: &P2Point) -> bool {
        let s: Rational = (0..3).map(|i| Rational::from_integer(self.n[i].clone()) * &p.coords[i]).sum();
        s.is_zero()
    }

    /// Parameter of a point on the line; `None` stands for t = ∞.
    pub fn parameter_of(&self, p: &P2Point) -> Option<Option<Rational>> {
        if !self.contains(p) {
            return None;
        }
        let a = self.base_point();
        let b = self.direction();
        // p ~ A + tB: solve with the 2×2 minor that is invertible for (A, B).
        let r = |x: &BigInt| Rational::from_integer(x.clone());
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let det = &a[i] * &b[j] - &a[j] * &b[i];
            if det.is_zero() {
                continue;
            }
            // p_i·(A_j + tB_j) = p_j·(A_i + tB_i)
            let num = &p.coords[j] * r(&a[i]) - &p.coords[i] * r(&a[j]);
            let den = &p.coords[i] * r(&b[j]) - &p.coords[j] * r(&b[i]);
            return Some(if den.is_zero() { None } else { Some(num / den) });
        }
        unreachable!("base point and direction are independent")
    }

    /// Intersection point with another line, `None` when they coincide.
    pub fn meet(&self, other: &Line) -> Option<P2Point> {
        let c = cross(&self.n, &other.n);
        if c.iter().all(|x| x.is_zero()) {
            None
        } else {
            Some(P2Point::from_integers(&c))
        }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V({}*z0 + {}*z1 + {}*z2)", self.n[0], self.n[1], self.n[2])
    }
}

/// A rational point of P², normalized so the first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct P2Point {
    coords: [Rational; 3],
}

impl P2Point {
    pub fn new(c: [Rational; 3]) -> Option<Self> {
        let lead = c.iter().find(|x| !x.is_zero())?.clone();
        Some(P2Point { coords: [&c[0] / &lead, &c[1] / &lead, &c[2] / &lead] })
    }

    pub fn from_integers(c: &[BigInt; 3]) -> Self {
        Self::new([
            Rational::from_integer(c[0].clone()),
            Rational::from_integer(c[1].clone()),
            Rational::from_integer(c[2].clone()),
        ])
        .expect("nonzero vector")
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Option<Self> {
        Self::new([Rational::from_integer(a.into()), Rational::from_integer(b.into()), Rational::from_integer(c.into())])
    }

    pub fn coords(&self) -> &[Rational; 3] {
        &self.coords
    }
}

impl fmt::Display for P2Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}]",
            format_rational(&self.coords[0]),
            format_rational(&self.coords[1]),
            format_rational(&self.coords[2])
        )
    }
}

/// Where a component of a precycle lives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Support {
    P1,
    Line(Line),
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::P1 => f.write_str("P1"),
            Support::Line(l) => write!(f, "{}", l),
        }
    }
}

/// A closed point appearing in a 0-cycle. A conjugate pair of quadratic
/// points on a rational line lies on no other rational line, so it is keyed
/// by its host line and its place in that line's parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CyclePoint {
    P1(Place),
    P2(P2Point),
    P2Quadratic { line: Line, place: Place },
}

impl CyclePoint {
    pub fn degree(&self) -> usize {
        match self {
            CyclePoint::P1(p) => p.degree(),
            CyclePoint::P2(_) => 1,
            CyclePoint::P2Quadratic { .. } => 2,
        }
    }
}

impl fmt::Display for CyclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CyclePoint::P1(p) => write!(f, "{}", p),
            CyclePoint::P2(p) => write!(f, "{}", p),
            CyclePoint::P2Quadratic { line, place } => write!(f, "{}@{}", place, line),
        }
    }
}

/// A formal integer combination of closed points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ZeroCycle {
    points: BTreeMap<CyclePoint, i64>,
}

impl ZeroCycle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_point(&mut self, p: CyclePoint, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.points.entry(p.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.points.remove(&p);
        }
    }

    pub fn from_divisor(d: &Divisor) -> Self {
        let mut z = Self::new();
        for (p, m) in d.iter() {
            z.add_point(CyclePoint::P1(p.clone()), *m);
        }
        z
    }

    pub fn add(&self, other: &ZeroCycle) -> ZeroCycle {
        let mut z = self.clone();
        for (p, m) in &other.points {
            z.add_point(p.clone(), *m);
        }
        z
    }

    pub fn neg(&self) -> ZeroCycle {
        ZeroCycle { points: self.points.iter().map(|(p, m)| (p.clone(), -m)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CyclePoint, &i64)> {
        self.points.iter()
    }

    pub fn multiplicity(&self, p: &CyclePoint) -> i64 {
        self.points.get(p).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn degree(&self) -> i64 {
        self.points.iter().map(|(p, m)| m * p.degree() as i64).sum()
    }

    /// The P¹ divisor with the same points, if every point lives on P¹.
    pub fn to_divisor(&self) -> Option<Divisor> {
        let mut d = Divisor::new();
        for (p, m) in &self.points {
            match p {
                CyclePoint::P1(pl) => d.add_point(pl.clone(), *m),
                _ => return None,
            }
        }
        Some(d)
    }
}

impl fmt::Display for ZeroCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.points.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, m)) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(if *m < 0 { " - " } else { " + " })?;
            } else if *m < 0 {
                f.write_str("-")?;
            }
            if m.abs() != 1 {
                write!(f, "{}", m.abs())?;
            }
            match p {
                CyclePoint::P1(_) => write!(f, "{}", p)?,
                _ => write!(f, "({})", p)?,
            }
        }
        Ok(())
    }
}

/// `Σ_α (f_α, Z_α)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Precycle0 {
    pub terms: Vec<(RationalFunction, Support)>,
}

impl Precycle0 {
    pub fn new(terms: Vec<(RationalFunction, Support)>) -> Self {
        Precycle0 { terms }
    }

    pub fn on_p1(f: RationalFunction) -> Self {
        Precycle0 { terms: vec![(f, Support::P1)] }
    }

    pub fn with_term(mut self, f: RationalFunction, z: Support) -> Self {
        self.terms.push((f, z));
        self
    }

    fn ambient_is_p1(&self) -> Result<Option<bool>, PairingError> {
        let mut kind = None;
        for (_, z) in &self.terms {
            let p1 = matches!(z, Support::P1);
            match kind {
                None => kind = Some(p1),
                Some(k) if k != p1 => {
                    return Err(PairingError::AmbientMismatch("precycle mixes P1 and P2 supports".into()))
                }
                _ => {}
            }
        }
        Ok(kind)
    }
}

/// A pairing value `log(ratio)` with the positive rational kept exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactLog {
    pub ratio: Rational,
}

impl ExactLog {
    pub fn one() -> Self {
        ExactLog { ratio: Rational::one() }
    }

    pub fn value(&self) -> f64 {
        ln_abs_rational(&self.ratio)
    }

    pub fn mul(&self, other: &ExactLog) -> ExactLog {
        ExactLog { ratio: &self.ratio * &other.ratio }
    }
}

impl fmt::Display for ExactLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log({})", format_rational(&self.ratio))
    }
}

fn place_on_support(place: &Place, z: &Support) -> CyclePoint {
    match z {
        Support::P1 => CyclePoint::P1(place.clone()),
        Support::Line(l) => match place {
            Place::Infinity => CyclePoint::P2(l.point_at(None)),
            Place::Finite(_) if place.degree() == 1 => {
                CyclePoint::P2(l.point_at(Some(&place.rational_value().expect("degree 1"))))
            }
            Place::Finite(_) => CyclePoint::P2Quadratic { line: l.clone(), place: place.clone() },
        },
    }
}

/// The place in the support's parameter that a cycle point corresponds to,
/// or `None` when the point does not lie on the support.
fn locate(q: &CyclePoint, z: &Support) -> Result<Option<Place>, PairingError> {
    match (q, z) {
        (CyclePoint::P1(p), Support::P1) => Ok(Some(p.clone())),
        (CyclePoint::P1(_), Support::Line(_)) | (_, Support::P1) => {
            Err(PairingError::AmbientMismatch(format!("point {} against support {}", q, z)))
        }
        (CyclePoint::P2(p), Support::Line(l)) => Ok(l.parameter_of(p).map(|t| match t {
            None => Place::Infinity,
            Some(r) => Place::rational(r),
        })),
        (CyclePoint::P2Quadratic { line, place }, Support::Line(l)) => {
            Ok(if line == l { Some(place.clone()) } else { None })
        }
    }
}

/// `∂ξ₁′ = Σ_α div_{Z_α}(f_α)`.
pub fn boundary(xi1p: &Precycle0) -> Result<ZeroCycle, PairingError> {
    xi1p.ambient_is_p1()?;
    let mut z = ZeroCycle::new();
    for (f, support) in &xi1p.terms {
        for (place, m) in divisor_of(f)?.iter() {
            z.add_point(place_on_support(place, support), *m);
        }
    }
    Ok(z)
}

fn check_disjoint(a: &ZeroCycle, b: &ZeroCycle) -> Result<(), PairingError> {
    match a.iter().find(|(p, _)| b.multiplicity(p) != 0) {
        Some((p, _)) => Err(PairingError::SupportsNotDisjoint(p.to_string())),
        None => Ok(()),
    }
}

/// `Π_α Π_{q ∈ ξ₂ ∩ Z_α} |N f_α(q)|^{m_q}`.
pub fn pair_m0(xi1p: &Precycle0, xi2: &ZeroCycle) -> Result<ExactLog, PairingError> {
    check_disjoint(&boundary(xi1p)?, xi2)?;
    let mut ratio = Rational::one();
    for (f, support) in &xi1p.terms {
        for (q, m) in xi2.iter() {
            let Some(place) = locate(q, support)? else { continue };
            let (order, value) = unit_part(f, &place)?;
            if order != 0 {
                return Err(PairingError::NotAUnit(format!("{} on {}", q, support)));
            }
            let norm = value.norm().abs();
            ratio *= norm.pow(i32::try_from(*m).expect("multiplicity fits i32"));
        }
    }
    Ok(ExactLog { ratio })
}

/// Both sides of `⟨∂ξ₁′, ∂ξ₂′⟩ = ⟨∂ξ₂′, ∂ξ₁′⟩` for precycles on P¹.
pub fn reciprocity_check(xi1p: &Precycle0, xi2p: &Precycle0) -> Result<(ExactLog, ExactLog), PairingError> {
    for x in [xi1p, xi2p] {
        if x.ambient_is_p1()? == Some(false) {
            return Err(PairingError::AmbientMismatch("reciprocity is checked on P1 only".into()));
        }
    }
    let b1 = boundary(xi1p)?;
    let b2 = boundary(xi2p)?;
    check_disjoint(&b1, &b2)?;
    Ok((pair_m0(xi1p, &b2)?, pair_m0(xi2p, &b1)?))
}

/// A finite map `t ↦ a(t)/b(t)` of P¹ to itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSelfMap {
    num: Poly,
    den: Poly,
}

impl FiniteSelfMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PairingError> {
        if den.is_zero() {
            return Err(PairingError::DegenerateMap);
        }
        let g = num.gcd(&den);
        if !g.is_constant() {
            return Err(PairingError::DegenerateMap);
        }
        if num.deg().max(den.deg()) == 0 {
            return Err(PairingError::DegenerateMap);
        }
        Ok(FiniteSelfMap { num, den })
    }

    pub fn from_function(f: &RationalFunction) -> Result<Self, PairingError> {
        Self::new(f.num().clone(), f.den().clone())
    }

    pub fn identity() -> Self {
        FiniteSelfMap { num: Poly::x(), den: Poly::one() }
    }

    pub fn degree(&self) -> usize {
        self.num.deg().max(self.den.deg())
    }

    pub fn as_function(&self) -> RationalFunction {
        RationalFunction::new(self.num.clone(), self.den.clone()).expect("nonzero denominator")
    }

    /// Coefficients of `num − s·den` at formal degree n, for a fixed `s`.
    fn fiber_coeffs(&self, s: &Rational) -> Vec<Rational> {
        (0..=self.degree()).map(|i| self.num.coeff(i) - s * self.den.coeff(i)).collect()
    }

    /// The norm `N_φ(f)(s) = Π_{φ(t)=s} f(t)`, with preimages counted with
    /// ramification. For `f = p/q` and `P_s = num − s·den` at formal degree
    /// n with leading coefficient `L(s)`,
    /// `N_φ(f) = Res_t(P_s, p) / Res_t(P_s, q) · L(s)^{deg q − deg p}`.
    pub fn norm(&self, f: &RationalFunction) -> Result<RationalFunction, PairingError> {
        if f.is_zero() {
            return Err(FuncFieldError::ZeroFunction.into());
        }
        let res_poly = |p: &Poly| -> Poly {
            let samples: Vec<(Rational, Rational)> = (0..=p.deg() as i64)
                .map(|k| {
                    let s = Rational::from_integer(k.into());
                    let r = sylvester_resultant(&self.fiber_coeffs(&s), p.coeffs());
                    (s, r)
                })
                .collect();
            interpolate(&samples)
        };
        let a = res_poly(f.num());
        let b = res_poly(f.den());
        let n = self.degree();
        let lead = Poly::from_coeffs(vec![self.num.coeff(n), -self.den.coeff(n)]);
        let shift = f.den().deg() as i64 - f.num().deg() as i64;
        let base = RationalFunction::new(a, b)?;
        Ok(base.mul(&RationalFunction::from_poly(lead).pow(shift)?))
    }

    /// `φ*ξ₂` with ramification multiplicities.
    pub fn pullback(&self, xi2: &Divisor) -> Result<Divisor, PairingError> {
        let n = self.degree();
        let mut out = Divisor::new();
        for (q, m) in xi2.iter() {
            let (fiber, formal) = match q {
                Place::Infinity => (self.den.clone(), n),
                Place::Finite(mp) if mp.deg() == 1 => {
                    let r = q.rational_value().expect("degree 1");
                    (Poly::from_coeffs(self.fiber_coeffs(&r)), n)
                }
                Place::Finite(mp) => {
                    // Π over conjugates of (num − θ·den) = num² + c₁·num·den + c₀·den²
                    let c1 = mp.coeff(1);
                    let c0 = mp.coeff(0);
                    let p = &(&self.num * &self.num)
                        + &(&(&self.num * &self.den).scale(&c1) + &(&self.den * &self.den).scale(&c0));
                    (p, 2 * n)
                }
            };
            let (_, factors) = factor_into_places(&fiber)?;
            for (f, e) in factors {
                out.add_point(Place::Finite(f), m * e as i64);
            }
            out.add_point(Place::Infinity, m * (formal as i64 - fiber.deg() as i64));
        }
        Ok(out)
    }

    /// `φ_*ξ₁′` for a precycle on P¹.
    pub fn pushforward_precycle(&self, xi1p: &Precycle0) -> Result<Precycle0, PairingError> {
        if xi1p.ambient_is_p1()? == Some(false) {
            return Err(PairingError::AmbientMismatch("pushforward is defined on P1 precycles".into()));
        }
        let terms = xi1p
            .terms
            .iter()
            .map(|(f, _)| Ok((self.norm(f)?, Support::P1)))
            .collect::<Result<Vec<_>, PairingError>>()?;
        Ok(Precycle0 { terms })
    }

    pub fn pullback_cycle(&self, xi2: &ZeroCycle) -> Result<ZeroCycle, PairingError> {
        let d = xi2
            .to_divisor()
            .ok_or_else(|| PairingError::AmbientMismatch("pullback is defined on P1 cycles".into()))?;
        Ok(ZeroCycle::from_divisor(&self.pullback(&d)?))
    }
}

/// Convenience: `pushforward_precycle` as a free function.
pub fn pushforward_precycle(phi: &FiniteSelfMap, xi1p: &Precycle0) -> Result<Precycle0, PairingError> {
    phi.pushforward_precycle(xi1p)
}

pub fn pullback_cycle(phi: &FiniteSelfMap, xi2: &ZeroCycle) -> Result<ZeroCycle, PairingError> {
    phi.pullback_cycle(xi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn rf(s: &str) -> RationalFunction {
        RationalFunction::parse(s).unwrap()
    }

    fn cyc(s: &str) -> ZeroCycle {
        ZeroCycle::from_divisor(&Divisor::parse(s).unwrap())
    }

    #[test]
    fn boundary_examples() {
        let b = boundary(&Precycle0::on_p1(rf("t"))).unwrap();
        assert_eq!(b, cyc("(0) - (inf)"));
        let xi = Precycle0::on_p1(rf("t")).with_term(rf("1/t"), Support::P1);
        assert!(boundary(&xi).unwrap().is_empty());
    }

    #[test]
    fn coordinate_line_boundary() {
        let xi = Precycle0::new(vec![(rf("-t"), Support::Line(Line::coordinate(0)))]);
        let b = boundary(&xi).unwrap();
        let mut expected = ZeroCycle::new();
        expected.add_point(CyclePoint::P2(P2Point::from_i64(0, 0, 1).unwrap()), 1);
        expected.add_point(CyclePoint::P2(P2Point::from_i64(0, 1, 0).unwrap()), -1);
        assert_eq!(b, expected);
    }

    #[test]
    fn line_parameterization_round_trips() {
        let l = Line::from_i64(3, -2, 5).unwrap();
        for t in [rat(0, 1), rat(7, 3), rat(-2, 5)] {
            let p = l.point_at(Some(&t));
            assert!(l.contains(&p));
            assert_eq!(l.parameter_of(&p), Some(Some(t)));
        }
        assert_eq!(l.parameter_of(&l.point_at(None)), Some(None));
        assert_eq!(l.parameter_of(&P2Point::from_i64(1, 1, 1).unwrap()), None);
        assert_eq!(Line::from_i64(-6, 4, -10).unwrap(), l);
    }

    #[test]
    fn pairing_examples() {
        let xi = Precycle0::on_p1(rf("t"));
        assert_eq!(pair_m0(&xi, &cyc("(2) - (3)")).unwrap().ratio, rat(2, 3));
        assert_eq!(pair_m0(&xi, &ZeroCycle::new()).unwrap(), ExactLog::one());
        assert_eq!(pair_m0(&xi, &cyc("(t^2 - 2) - 2(5)")).unwrap().ratio, rat(2, 25));
        assert!((pair_m0(&xi, &cyc("(2) - (3)")).unwrap().value() - (2f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn pairing_errors() {
        let xi = Precycle0::on_p1(rf("t"));
        assert!(matches!(pair_m0(&xi, &cyc("(0) - (3)")), Err(PairingError::SupportsNotDisjoint(_))));
        // a point of div(f_α) that cancels in the boundary
        let xi = Precycle0::on_p1(rf("t-1")).with_term(rf("1/(t-1)"), Support::P1);
        assert!(matches!(pair_m0(&xi, &cyc("(1) - (3)")), Err(PairingError::NotAUnit(_))));
    }

    #[test]
    fn reciprocity_examples() {
        let a = Precycle0::on_p1(rf("t"));
        let b = Precycle0::on_p1(rf("(t-2)/(t-3)"));
        let (l, r) = reciprocity_check(&a, &b).unwrap();
        assert_eq!(l.ratio, rat(2, 3));
        assert_eq!(r.ratio, rat(2, 3));
        let (l2, r2) = reciprocity_check(&b, &a).unwrap();
        assert_eq!((l2, r2), (r, l));

        let a = Precycle0::on_p1(rf("t^2+1"));
        let b = Precycle0::on_p1(rf("(t-1)/(t-2)"));
        let (l, r) = reciprocity_check(&a, &b).unwrap();
        assert_eq!(l, r);
        // |f(1)|/|f(2)| = 2/5
        assert_eq!(l.ratio, rat(2, 5));
    }

    #[test]
    fn norm_examples() {
        let sq = FiniteSelfMap::from_function(&rf("t^2")).unwrap();
        let n = sq.norm(&rf("t")).unwrap();
        assert_eq!(n, rf("-t"));
        assert_eq!(divisor_of(&n).unwrap(), Divisor::parse("(0) - (inf)").unwrap());
        let n = sq.norm(&rf("t-1")).unwrap();
        // (1 - t)(-1 - t) = t² - 1 → 1 - s
        assert_eq!(n, rf("1-t"));
        assert_eq!(FiniteSelfMap::identity().norm(&rf("(t^2+3)/(t-7)")).unwrap(), rf("(t^2+3)/(t-7)"));
    }

    #[test]
    fn norm_of_mobius_map() {
        let phi = FiniteSelfMap::from_function(&rf("(2*t+1)/(t-3)")).unwrap();
        let f = rf("(t^2 + 1)/(t + 4)");
        let n = phi.norm(&f).unwrap();
        // N(f)(s) = f(φ⁻¹(s)), φ⁻¹(s) = (3s + 1)/(s - 2)
        for s in [int(0), int(5), rat(1, 3)] {
            let pre = (int(3) * &s + int(1)) / (&s - int(2));
            assert_eq!(n.eval(&s), f.eval(&pre));
        }
    }

    #[test]
    fn pullback_examples() {
        let sq = FiniteSelfMap::from_function(&rf("t^2")).unwrap();
        assert_eq!(sq.pullback(&Divisor::parse("(1)").unwrap()).unwrap(), Divisor::parse("(1) + (-1)").unwrap());
        assert_eq!(sq.pullback(&Divisor::parse("(0)").unwrap()).unwrap(), Divisor::parse("2(0)").unwrap());
        assert_eq!(sq.pullback(&Divisor::parse("(inf)").unwrap()).unwrap(), Divisor::parse("2(inf)").unwrap());
        let d = Divisor::parse("(t^2+1) - 2(5)").unwrap();
        assert_eq!(FiniteSelfMap::identity().pullback(&d).unwrap(), d);
    }

    #[test]
    fn degenerate_maps() {
        assert_eq!(FiniteSelfMap::from_function(&rf("3")), Err(PairingError::DegenerateMap));
        assert_eq!(FiniteSelfMap::new(Poly::from_i64(&[-1, 1]), Poly::from_i64(&[-1, 1])), Err(PairingError::DegenerateMap));
    }

    #[test]
    fn projection_formula_on_quadratic_map() {
        // t⁴ + 4 = (t² + 2t + 2)(t² − 2t + 2), so the quadratic fiber splits
        let phi = FiniteSelfMap::from_function(&rf("t^2")).unwrap();
        let xi1 = Precycle0::on_p1(rf("(t+3)/(t^2 - 5)"));
        let xi2 = cyc("(1) - (4) + (t^2 + 4) - (7)");
        let lhs = pair_m0(&xi1, &phi.pullback_cycle(&xi2).unwrap());
        let rhs = pair_m0(&phi.pushforward_precycle(&xi1).unwrap(), &xi2);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => assert_eq!(l, r),
            (l, r) => panic!("{:?} {:?}", l, r),
        }
    }
}
