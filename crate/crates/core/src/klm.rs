//! The m = 1 real regulator pairing on P²:
//! `⟨ξ₁, ξ₂⟩ = −2π ∫_γ (log|f₁| d arg f₂ − log|f₂| d arg f₁)`
//! where `ξ₁ = Σ_j (g_j, D_j)` is a K₁-cycle on lines, `γ = Σ_j g_j⁻¹[−∞, 0]`
//! and `ξ₂` is the tame-symbol cycle of `{f₁, f₂}`.
//!
//! All cycle-level data (lines, points, functions) are exact over Q(i).
//! Functions are products of linear forms, so every restriction to a line
//! has its divisor given by intersection points. Only the integral is
//! floating point.
//!
//! Arcs: if `g` has zero `Z` and pole `P` on its line, the preimage of
//! `[−∞, 0]` is `z(u) = (1 − u)·c·Z + u·P`, `u ∈ [0, 1]`, with `c` fixed so
//! that `g(z(u)) = −u/(1 − u)`. Orientation is measured in the chart
//! `w = (z₀ + i·z₁)/(z₀ + z₁ + z₂)` by the signed area `½ Im ∮ w̄ dw`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arch_pairing::{Line, P2Point};
use crate::arith::{format_rational, parse_rational, Rational};
use crate::quadrature::{integrate, QuadError, QuadOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KlmError {
    #[error("function on the line has degree {degree}, expected a Möbius function")]
    NotMoebius { degree: i64 },
    #[error("contour is not closed: {0}")]
    OpenContour(String),
    #[error("the K1 precycle has nonzero boundary {0}")]
    NonzeroBoundary(String),
    #[error("singularity on the integration path: {0}")]
    SingularityOnPath(String),
    #[error("quadrature did not converge within {intervals} intervals")]
    NoConvergence { intervals: usize },
    #[error("winding number is ambiguous: residual {residual}")]
    RoundingAmbiguous { residual: f64 },
    #[error("cycles are not in general position: {0}")]
    GeneralPositionFailure(String),
    #[error("orientation undefined: {0}")]
    OrientationUndefined(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A Gaussian rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gauss {
    pub re: Rational,
    pub im: Rational,
}

impl Gauss {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gauss { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Gauss { re, im: Rational::zero() }
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        Gauss::new(Rational::from_integer(re.into()), Rational::from_integer(im.into()))
    }

    pub fn zero() -> Self {
        Self::from_i64(0, 0)
    }

    pub fn one() -> Self {
        Self::from_i64(1, 0)
    }

    pub fn i() -> Self {
        Self::from_i64(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gauss::new(self.re.clone(), -&self.im)
    }

    /// `|x|²`.
    pub fn abs2(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.abs2();
        Some(Gauss::new(&self.re / &n, -&self.im / &n))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Gauss::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl std::ops::Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl std::ops::Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl std::ops::Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl std::ops::Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-&self.re, -&self.im)
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&format_rational(&self.re));
        }
        let im = if self.im.abs().is_one() {
            String::new()
        } else {
            format!("{}*", format_rational(&self.im.abs()))
        };
        if self.re.is_zero() {
            let sign = if self.im.is_negative() { "-" } else { "" };
            return write!(f, "{}{}i", sign, im);
        }
        let sign = if self.im.is_negative() { "-" } else { "+" };
        write!(f, "{} {} {}i", format_rational(&self.re), sign, im)
    }
}

impl FromStr for Gauss {
    type Err = KlmError;

    /// Accepts `"a"`, `"b*i"`, `"bi"`, `"i"`, `"a+b*i"`, `"a - i"` with `a`,
    /// `b` exact decimals or fractions.
    fn from_str(text: &str) -> Result<Self, KlmError> {
        let bad = || KlmError::Invalid(format!("cannot parse Gaussian rational '{}'", text));
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(bad());
        }
        // split at the last sign that is not the leading one
        let split = s
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (first, second) = match split {
            Some(i) if s.ends_with('i') => (&s[..i], Some(&s[i..])),
            _ => (s.as_str(), None),
        };
        let imag = |t: &str| -> Option<Rational> {
            let t = t.strip_suffix('i')?;
            let t = t.strip_suffix('*').unwrap_or(t);
            match t {
                "" | "+" => Some(Rational::one()),
                "-" => Some(-Rational::one()),
                _ => parse_rational(t),
            }
        };
        match second {
            Some(im) => Ok(Gauss::new(parse_rational(first).ok_or_else(bad)?, imag(im).ok_or_else(bad)?)),
            None if first.ends_with('i') => Ok(Gauss::new(Rational::zero(), imag(first).ok_or_else(bad)?)),
            None => Ok(Gauss::real(parse_rational(first).ok_or_else(bad)?)),
        }
    }
}

type Vec3 = [Gauss; 3];

fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [
        &(&u[1] * &v[2]) - &(&u[2] * &v[1]),
        &(&u[2] * &v[0]) - &(&u[0] * &v[2]),
        &(&u[0] * &v[1]) - &(&u[1] * &v[0]),
    ]
}

fn dot(u: &Vec3, v: &Vec3) -> Gauss {
    &(&(&u[0] * &v[0]) + &(&u[1] * &v[1])) + &(&u[2] * &v[2])
}

fn scale(c: &Gauss, v: &Vec3) -> Vec3 {
    [c * &v[0], c * &v[1], c * &v[2]]
}

fn is_null(v: &Vec3) -> bool {
    v.iter().all(Gauss::is_zero)
}

/// Scale so that the first nonzero entry is 1; returns the scale removed.
fn normalize(v: &Vec3) -> Option<(Vec3, Gauss)> {
    let lead = v.iter().find(|x| !x.is_zero())?.clone();
    let inv = lead.inv().expect("nonzero");
    Some((scale(&inv, v), lead))
}

fn to_complex3(v: &Vec3) -> [Complex64; 3] {
    [v[0].to_complex(), v[1].to_complex(), v[2].to_complex()]
}

fn unit(i: usize) -> Vec3 {
    let mut e = [Gauss::zero(), Gauss::zero(), Gauss::zero()];
    e[i] = Gauss::one();
    e
}

/// A linear form on P² over Q(i), first nonzero coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    c: Vec3,
}

impl Form {
    /// The form with the given coefficients; also returns the leading
    /// coefficient divided out.
    pub fn normalized(c: Vec3) -> Option<(Self, Gauss)> {
        normalize(&c).map(|(c, lead)| (Form { c }, lead))
    }

    pub fn new(c: Vec3) -> Option<Self> {
        Self::normalized(c).map(|(f, _)| f)
    }

    pub fn coordinate(j: usize) -> Self {
        Form { c: unit(j) }
    }

    pub fn from_line(l: &Line) -> Self {
        let c = l.coefficients();
        Self::new([
            Gauss::real(Rational::from_integer(c[0].clone())),
            Gauss::real(Rational::from_integer(c[1].clone())),
            Gauss::real(Rational::from_integer(c[2].clone())),
        ])
        .expect("nonzero line")
    }

    pub fn coefficients(&self) -> &Vec3 {
        &self.c
    }

    pub fn eval(&self, z: &Vec3) -> Gauss {
        dot(&self.c, z)
    }

    fn eval_c(&self, z: &[Complex64; 3]) -> Complex64 {
        let c = to_complex3(&self.c);
        c[0] * z[0] + c[1] * z[1] + c[2] * z[2]
    }

    fn norm_c(&self) -> f64 {
        to_complex3(&self.c).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn meet(&self, other: &Form) -> Option<GPoint> {
        GPoint::new(cross(&self.c, &other.c))
    }

    pub fn contains(&self, p: &GPoint) -> bool {
        self.eval(&p.c).is_zero()
    }

    /// Two distinct points spanning the line.
    fn spanning_points(&self) -> (Vec3, Vec3) {
        let mut pts: Vec<Vec3> = (0..3).map(|i| cross(&self.c, &unit(i))).filter(|v| !is_null(v)).collect();
        let a = pts.remove(0);
        let b = pts.into_iter().find(|v| !is_null(&cross(&a, v))).expect("line has two points");
        (a, b)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c == &Gauss::one() {
                write!(f, "z{}", k)?;
            } else if c.is_real() {
                write!(f, "{}*z{}", c, k)?;
            } else {
                write!(f, "({})*z{}", c, k)?;
            }
        }
        Ok(())
    }
}

/// A point of P²(Q(i)), first nonzero coordinate 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GPoint {
    c: Vec3,
}

impl GPoint {
    pub fn new(c: Vec3) -> Option<Self> {
        normalize(&c).map(|(c, _)| GPoint { c })
    }

    pub fn from_p2(p: &P2Point) -> Self {
        let c = p.coords();
        GPoint { c: [Gauss::real(c[0].clone()), Gauss::real(c[1].clone()), Gauss::real(c[2].clone())] }
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Option<Self> {
        Self::new([Gauss::from_i64(a, 0), Gauss::from_i64(b, 0), Gauss::from_i64(c, 0)])
    }

    pub fn coords(&self) -> &Vec3 {
        &self.c
    }
}

impl fmt::Display for GPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.c[0], self.c[1], self.c[2])
    }
}

/// A 0-cycle on P² over Q(i).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointCycle {
    points: BTreeMap<GPoint, i64>,
}

impl PointCycle {
    pub fn add_point(&mut self, p: GPoint, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.points.entry(p.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.points.remove(&p);
        }
    }

    pub fn add(&mut self, other: &PointCycle) {
        for (p, m) in &other.points {
            self.add_point(p.clone(), *m);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GPoint, &i64)> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

impl fmt::Display for PointCycle {
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
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

/// A value in P¹(Q(i)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjValue {
    Zero,
    Infinity,
    Finite(Gauss),
}

/// `c · Π ℓ_k^{e_k}`, a rational function on P² when `Σ e_k = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormProduct {
    constant: Gauss,
    factors: BTreeMap<Form, i64>,
}

impl FormProduct {
    pub fn constant(c: Gauss) -> Self {
        assert!(!c.is_zero(), "zero constant");
        FormProduct { constant: c, factors: BTreeMap::new() }
    }

    /// Multiply by `ℓ^e` for the form with raw coefficients `c`.
    pub fn times(mut self, c: Vec3, e: i64) -> Result<Self, KlmError> {
        let (form, lead) = Form::normalized(c).ok_or_else(|| KlmError::Invalid("zero linear form".into()))?;
        self.constant = &self.constant * &lead.pow(e).expect("nonzero");
        self.add_factor(form, e);
        Ok(self)
    }

    pub fn times_form(mut self, form: &Form, e: i64) -> Self {
        self.add_factor(form.clone(), e);
        self
    }

    fn add_factor(&mut self, form: Form, e: i64) {
        let entry = self.factors.entry(form.clone()).or_insert(0);
        *entry += e;
        if *entry == 0 {
            self.factors.remove(&form);
        }
    }

    pub fn mul(&self, other: &FormProduct) -> FormProduct {
        let mut out = FormProduct { constant: &self.constant * &other.constant, factors: self.factors.clone() };
        for (f, e) in &other.factors {
            out.add_factor(f.clone(), *e);
        }
        out
    }

    pub fn pow(&self, k: i64) -> FormProduct {
        FormProduct {
            constant: self.constant.pow(k).expect("nonzero constant"),
            factors: self.factors.iter().filter(|_| k != 0).map(|(f, e)| (f.clone(), e * k)).collect(),
        }
    }

    pub fn constant_factor(&self) -> &Gauss {
        &self.constant
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Form, &i64)> {
        self.factors.iter()
    }

    pub fn exponent(&self, f: &Form) -> i64 {
        self.factors.get(f).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.factors.values().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    /// `log|f(z)|` and `d log f(z)·v`.
    fn log_and_dlog(&self, z: &[Complex64; 3], v: &[Complex64; 3]) -> (f64, Complex64) {
        let mut log_abs = self.constant.to_complex().norm().ln();
        let mut dlog = Complex64::new(0.0, 0.0);
        for (f, e) in &self.factors {
            let fz = f.eval_c(z);
            log_abs += *e as f64 * fz.norm().ln();
            dlog += f.eval_c(v) / fz * (*e as f64);
        }
        (log_abs, dlog)
    }

    #[cfg(test)]
    fn eval_c(&self, z: &[Complex64; 3]) -> Complex64 {
        self.factors.iter().fold(self.constant.to_complex(), |acc, (f, e)| acc * f.eval_c(z).powi(*e as i32))
    }

    /// Exact value at `z` (no form may vanish there).
    fn eval_exact(&self, z: &Vec3) -> Option<Gauss> {
        let mut acc = self.constant.clone();
        for (f, e) in &self.factors {
            acc = &acc * &f.eval(z).pow(*e)?;
        }
        Some(acc)
    }

    /// Divisor of the restriction to `line`.
    pub fn divisor_on(&self, line: &Form) -> Result<PointCycle, KlmError> {
        let mut d = PointCycle::default();
        for (f, e) in &self.factors {
            let p = f.meet(line).ok_or_else(|| {
                KlmError::Invalid(format!("function has the factor {} which vanishes on its own line", f))
            })?;
            d.add_point(p, *e);
        }
        Ok(d)
    }

    /// Value of the restriction to `line` at the point `x` of that line.
    pub fn value_on(&self, line: &Form, x: &GPoint) -> Result<ProjValue, KlmError> {
        let (a, b) = line.spanning_points();
        let v = if is_null(&cross(&a, &x.c)) { b } else { a };
        let mut order = 0;
        let mut acc = self.constant.clone();
        for (f, e) in &self.factors {
            if f == line {
                return Err(KlmError::Invalid(format!("{} vanishes on its own line", f)));
            }
            let fx = f.eval(&x.c);
            if fx.is_zero() {
                order += e;
                acc = &acc * &f.eval(&v).pow(*e).expect("form nonzero along the line");
            } else {
                acc = &acc * &fx.pow(*e).expect("nonzero");
            }
        }
        Ok(match order.signum() {
            1 => ProjValue::Zero,
            -1 => ProjValue::Infinity,
            _ => ProjValue::Finite(acc),
        })
    }
}

impl fmt::Display for FormProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constant.is_real() {
            write!(f, "{}", self.constant)?;
        } else {
            write!(f, "({})", self.constant)?;
        }
        for (form, e) in &self.factors {
            if *e == 1 {
                write!(f, " * ({})", form)?;
            } else {
                write!(f, " * ({})^{}", form, e)?;
            }
        }
        Ok(())
    }
}

/// `{f₁, f₂}` with both functions of total degree 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPair {
    pub f1: FormProduct,
    pub f2: FormProduct,
}

impl SymbolPair {
    pub fn new(f1: FormProduct, f2: FormProduct) -> Result<Self, KlmError> {
        for (name, f) in [("f1", &f1), ("f2", &f2)] {
            if f.degree() != 0 {
                return Err(KlmError::Invalid(format!("{} has degree {}, expected 0", name, f.degree())));
            }
        }
        Ok(SymbolPair { f1, f2 })
    }
}

/// `Σ_j (g_j, D_j)` with `g_j` a degree-0 form product restricted to `D_j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct K1Precycle {
    pub terms: Vec<(FormProduct, Form)>,
}

impl K1Precycle {
    pub fn new(terms: Vec<(FormProduct, Form)>) -> Result<Self, KlmError> {
        for (g, d) in &terms {
            if g.degree() != 0 {
                return Err(KlmError::Invalid(format!("function on {} has degree {}", d, g.degree())));
            }
            if g.exponent(d) != 0 {
                return Err(KlmError::Invalid(format!("function vanishes identically on {}", d)));
            }
        }
        Ok(K1Precycle { terms })
    }
}

/// One piece `g⁻¹[−∞, 0]` of the contour: `z(u) = (1 − u)·z0 + u·z1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub line: Form,
    pub start: GPoint,
    pub end: GPoint,
    z0: Vec3,
    z1: Vec3,
}

impl Arc {
    fn point_c(&self, u: f64) -> [Complex64; 3] {
        let a = to_complex3(&self.z0);
        let b = to_complex3(&self.z1);
        [a[0] * (1.0 - u) + b[0] * u, a[1] * (1.0 - u) + b[1] * u, a[2] * (1.0 - u) + b[2] * u]
    }

    fn velocity_c(&self) -> [Complex64; 3] {
        let a = to_complex3(&self.z0);
        let b = to_complex3(&self.z1);
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    /// Exact test whether `ℓ` vanishes somewhere on the closed arc.
    fn form_vanishes_on(&self, f: &Form) -> bool {
        let a0 = f.eval(&self.z0);
        let a1 = f.eval(&self.z1);
        if a0.is_zero() {
            return true;
        }
        let diff = &a0 - &a1;
        if diff.is_zero() {
            return false;
        }
        // ℓ(z(u)) = a0 − u·(a0 − a1) = 0 at u* = a0 / (a0 − a1)
        let u = &a0 * &diff.inv().expect("nonzero");
        u.is_real() && !u.re.is_negative() && u.re <= Rational::one()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Contour {
    pub arcs: Vec<Arc>,
    pub closed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Arcs as built, from `g⁻¹(0)` to `g⁻¹(∞)`.
    Native,
    /// Reversed if needed so the signed area in the chart is positive.
    #[default]
    Ccw,
    Cw,
}

impl FromStr for Orientation {
    type Err = KlmError;
    fn from_str(s: &str) -> Result<Self, KlmError> {
        match s {
            "native" => Ok(Orientation::Native),
            "ccw" => Ok(Orientation::Ccw),
            "cw" => Ok(Orientation::Cw),
            _ => Err(KlmError::Invalid(format!("unknown orientation '{}'", s))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairOptions {
    pub quad: QuadOptions,
    /// Minimum of `|ℓ(z)| / (‖ℓ‖·‖z‖)` allowed at quadrature nodes.
    pub guard: f64,
    pub orientation: Orientation,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { quad: QuadOptions::default(), guard: 1e-8, orientation: Orientation::Ccw }
    }
}

/// `Σ_j div_{D_j}(g_j)`; empty exactly when the precycle is a cycle.
pub fn k1_boundary_check(xi: &K1Precycle) -> Result<PointCycle, KlmError> {
    let mut total = PointCycle::default();
    for (g, d) in &xi.terms {
        total.add(&g.divisor_on(d)?);
    }
    Ok(total)
}

/// `T{f₁, f₂} = Σ_D (−1)^{ab} (f₁^b / f₂^a)|_D` with `a = ν_D(f₁)`,
/// `b = ν_D(f₂)`, over the lines in `|div f₁| ∪ |div f₂|`. Terms equal to
/// the constant 1 are degenerate in the cubical complex and are dropped.
pub fn tame_symbol_cycle(sp: &SymbolPair) -> Result<K1Precycle, KlmError> {
    let mut lines: Vec<&Form> = sp.f1.factors().map(|(f, _)| f).chain(sp.f2.factors().map(|(f, _)| f)).collect();
    lines.sort();
    lines.dedup();
    let terms = lines
        .into_iter()
        .map(|d| {
            let a = sp.f1.exponent(d);
            let b = sp.f2.exponent(d);
            let sign = if (a * b) % 2 == 0 { Gauss::one() } else { -&Gauss::one() };
            let t = sp.f1.pow(b).mul(&sp.f2.pow(-a)).mul(&FormProduct::constant(sign));
            (t, d.clone())
        })
        .filter(|(t, _)| !(t.is_constant() && t.constant_factor() == &Gauss::one()))
        .collect();
    K1Precycle::new(terms)
}

fn arc_for(g: &FormProduct, line: &Form) -> Result<Option<Arc>, KlmError> {
    let div = g.divisor_on(line)?;
    if div.is_empty() {
        return Ok(None);
    }
    let degree: i64 = div.iter().filter(|(_, m)| **m > 0).map(|(_, m)| m).sum();
    if degree != 1 {
        return Err(KlmError::NotMoebius { degree });
    }
    let zero = div.iter().find(|(_, m)| **m > 0).expect("one zero").0.clone();
    let pole = div.iter().find(|(_, m)| **m < 0).expect("one pole").0.clone();
    // λ_Z = det(Z, W, ·) and λ_P = det(P, W, ·) with W off the line
    let w = (0..3).map(unit).find(|e| !line.eval(e).is_zero()).expect("some coordinate point is off the line");
    let lz = cross(&zero.c, &w);
    let lp = cross(&pole.c, &w);
    // g = κ·λ_Z/λ_P on the line; read κ off at a point where everything is finite
    let mut k = 1i64;
    let kappa = loop {
        let x: Vec3 = {
            let kp = scale(&Gauss::from_i64(k, 0), &pole.c);
            [&zero.c[0] + &kp[0], &zero.c[1] + &kp[1], &zero.c[2] + &kp[2]]
        };
        if let Some(gx) = g.eval_exact(&x) {
            let num = dot(&lp, &x);
            let den = dot(&lz, &x);
            break &(&gx * &num) * &den.inv().expect("x ≠ Z");
        }
        k += 1;
    };
    let c = -&(&(&kappa * &dot(&lz, &pole.c)) * &dot(&lp, &zero.c).inv().expect("Z ≠ P"));
    Ok(Some(Arc { line: line.clone(), start: zero.clone(), end: pole.clone(), z0: scale(&c, &zero.c), z1: pole.c.clone() }))
}

/// `γ = Σ_j g_j⁻¹[−∞, 0]`. Terms whose function is constant on the line
/// contribute no arc.
pub fn build_gamma(xi: &K1Precycle) -> Result<Contour, KlmError> {
    let mut arcs = Vec::new();
    for (g, d) in &xi.terms {
        if let Some(a) = arc_for(g, d)? {
            arcs.push(a);
        }
    }
    let mut balance = PointCycle::default();
    for a in &arcs {
        balance.add_point(a.start.clone(), 1);
        balance.add_point(a.end.clone(), -1);
    }
    let closed = balance.is_empty();
    Ok(Contour { arcs, closed })
}

/// `∂T₁ = T₀∂` at m = 1: the 0-cycle `Σ (start − end)` of the arcs against
/// the K₁ boundary `Σ div(g_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentIdentityReport {
    pub gamma_side: PointCycle,
    pub boundary_side: PointCycle,
    pub equal: bool,
}

pub fn current_identity_check_m1(xi: &K1Precycle) -> Result<CurrentIdentityReport, KlmError> {
    let contour = build_gamma(xi)?;
    let mut gamma_side = PointCycle::default();
    for a in &contour.arcs {
        gamma_side.add_point(a.start.clone(), 1);
        gamma_side.add_point(a.end.clone(), -1);
    }
    let boundary_side = k1_boundary_check(xi)?;
    let equal = gamma_side == boundary_side;
    Ok(CurrentIdentityReport { gamma_side, boundary_side, equal })
}

fn quad_error(e: QuadError<KlmError>) -> KlmError {
    match e {
        QuadError::Integrand(e) => e,
        QuadError::NoConvergence { intervals, .. } => KlmError::NoConvergence { intervals },
    }
}

fn guard_check(forms: &[&Form], z: &[Complex64; 3], guard: f64) -> Result<(), KlmError> {
    let zn = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for f in forms {
        let r = f.eval_c(z).norm() / (f.norm_c() * zn);
        if r.is_nan() || r < guard {
            return Err(KlmError::SingularityOnPath(format!("{} is within {:.1e} of zero on the path", f, r)));
        }
    }
    Ok(())
}

fn exact_path_check(forms: &[&Form], arc: &Arc) -> Result<(), KlmError> {
    for f in forms {
        if arc.form_vanishes_on(f) {
            return Err(KlmError::SingularityOnPath(format!("{} vanishes on the arc along {}", f, arc.line)));
        }
    }
    Ok(())
}

/// `∫_arc d arg f`.
pub fn integrate_darg(f: &FormProduct, arc: &Arc, opts: &PairOptions) -> Result<f64, KlmError> {
    let forms: Vec<&Form> = f.factors().map(|(l, _)| l).collect();
    exact_path_check(&forms, arc)?;
    let v = arc.velocity_c();
    let r = integrate(
        |u| {
            let z = arc.point_c(u);
            guard_check(&forms, &z, opts.guard)?;
            Ok(f.log_and_dlog(&z, &v).1.im)
        },
        0.0,
        1.0,
        opts.quad,
    )
    .map_err(quad_error)?;
    Ok(r.value)
}

/// `½ Im ∮ w̄ dw` in the chart `w = (z₀ + i z₁)/(z₀ + z₁ + z₂)`.
pub fn signed_area(contour: &Contour, opts: &PairOptions) -> Result<f64, KlmError> {
    let l = Form::new([Gauss::one(), Gauss::one(), Gauss::one()]).expect("nonzero");
    let i = Complex64::new(0.0, 1.0);
    let mut total = 0.0;
    for arc in &contour.arcs {
        if arc.form_vanishes_on(&l) {
            return Err(KlmError::OrientationUndefined(format!(
                "arc along {} leaves the chart z0 + z1 + z2 ≠ 0",
                arc.line
            )));
        }
        let d = arc.velocity_c();
        let r = integrate(
            |u| {
                let z = arc.point_c(u);
                let lz = z[0] + z[1] + z[2];
                let ld = d[0] + d[1] + d[2];
                let w = (z[0] + i * z[1]) / lz;
                let dw = ((d[0] + i * d[1]) * lz - (z[0] + i * z[1]) * ld) / (lz * lz);
                Ok::<f64, KlmError>(0.5 * (w.conj() * dw).im)
            },
            0.0,
            1.0,
            opts.quad,
        )
        .map_err(quad_error)?;
        total += r.value;
    }
    Ok(total)
}

fn orientation_sign(contour: &Contour, opts: &PairOptions) -> Result<f64, KlmError> {
    if opts.orientation == Orientation::Native {
        return Ok(1.0);
    }
    let area = signed_area(contour, opts)?;
    if area.abs() < 1e-12 {
        return Err(KlmError::OrientationUndefined("contour encloses no area in the chart".into()));
    }
    let ccw = area > 0.0;
    Ok(if ccw == (opts.orientation == Orientation::Ccw) { 1.0 } else { -1.0 })
}

/// `Σ_arcs ∫ d arg f` with the requested orientation.
pub fn contour_darg(f: &FormProduct, contour: &Contour, opts: &PairOptions) -> Result<f64, KlmError> {
    let sign = orientation_sign(contour, opts)?;
    let mut total = 0.0;
    for arc in &contour.arcs {
        total += integrate_darg(f, arc, opts)?;
    }
    Ok(sign * total)
}

/// Winding number of `f` along a closed contour.
pub fn winding_number(f: &FormProduct, contour: &Contour, opts: &PairOptions) -> Result<i64, KlmError> {
    if !contour.closed {
        return Err(KlmError::OpenContour("winding number needs a closed contour".into()));
    }
    let turns = contour_darg(f, contour, opts)? / std::f64::consts::TAU;
    let n = turns.round();
    let residual = (turns - n).abs();
    if residual >= 0.01 {
        return Err(KlmError::RoundingAmbiguous { residual });
    }
    Ok(n as i64)
}

/// Exact Λ check: no point of `D_j ∩ E` carries equal values of `g_j` and
/// `T_E`, and no line is shared between the two cycles.
pub fn general_position_check(xi: &K1Precycle, sym: &K1Precycle) -> Result<(), KlmError> {
    for (g, d) in &xi.terms {
        for (t, e) in &sym.terms {
            let Some(x) = d.meet(e) else {
                return Err(KlmError::GeneralPositionFailure(format!("both cycles live on {}", d)));
            };
            let gv = g.value_on(d, &x)?;
            let tv = t.value_on(e, &x)?;
            // □ = P¹ ∖ {1}: points with value 1 are not in either support
            if gv == tv && gv != ProjValue::Finite(Gauss::one()) {
                return Err(KlmError::GeneralPositionFailure(format!("supports meet over {} on {} and {}", x, d, e)));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct M1Value {
    pub value: f64,
    /// Contribution of each arc, orientation sign included.
    pub arcs: Vec<f64>,
    /// +1 if the native arc direction is kept, −1 if reversed.
    pub orientation_sign: f64,
}

/// `−2π ∫_γ (log|f₁| d arg f₂ − log|f₂| d arg f₁)`.
pub fn pair_m1_real(xi: &K1Precycle, sp: &SymbolPair, opts: &PairOptions) -> Result<M1Value, KlmError> {
    let boundary = k1_boundary_check(xi)?;
    if !boundary.is_empty() {
        return Err(KlmError::NonzeroBoundary(boundary.to_string()));
    }
    let contour = build_gamma(xi)?;
    if !contour.closed {
        return Err(KlmError::OpenContour("arc endpoints do not chain".into()));
    }
    general_position_check(xi, &tame_symbol_cycle(sp)?)?;
    let forms: Vec<&Form> = sp.f1.factors().chain(sp.f2.factors()).map(|(f, _)| f).collect();
    for arc in &contour.arcs {
        exact_path_check(&forms, arc)?;
    }
    let sign = orientation_sign(&contour, opts)?;
    let scale = -std::f64::consts::TAU * sign;
    let mut arcs = Vec::with_capacity(contour.arcs.len());
    for arc in &contour.arcs {
        let v = arc.velocity_c();
        let r = integrate(
            |u| {
                let z = arc.point_c(u);
                guard_check(&forms, &z, opts.guard)?;
                let (l1, d1) = sp.f1.log_and_dlog(&z, &v);
                let (l2, d2) = sp.f2.log_and_dlog(&z, &v);
                Ok(l1 * d2.im - l2 * d1.im)
            },
            0.0,
            1.0,
            opts.quad,
        )
        .map_err(quad_error)?;
        arcs.push(scale * r.value);
    }
    let value = arcs.iter().sum();
    Ok(M1Value { value, arcs, orientation_sign: sign })
}

/// The coordinate-line cycle `Σ_j (g_j, V(z_j))` with `g₀ = −z₁/z₂`,
/// `g₁ = −z₂/z₀`, `g₂ = −z₀/z₁`; its contour is the boundary of the real
/// simplex.
pub fn simplex_cycle() -> K1Precycle {
    let minus = || FormProduct::constant(-&Gauss::one());
    let term = |j: usize| {
        let g = minus().times_form(&Form::coordinate((j + 1) % 3), 1).times_form(&Form::coordinate((j + 2) % 3), -1);
        (g, Form::coordinate(j))
    };
    K1Precycle::new(vec![term(0), term(1), term(2)]).expect("valid cycle")
}

/// `h = w − p` pulled back to P²: `(z₀ + i z₁ − p·L)/L` with `L = z₀ + z₁ + z₂`.
pub fn chart_function(p: &Gauss) -> FormProduct {
    let one = Gauss::one();
    let zero_form = [&one - p, &Gauss::i() - p, -p];
    FormProduct::constant(Gauss::one())
        .times(zero_form, 1)
        .expect("nonzero form")
        .times([one.clone(), one.clone(), one], -1)
        .expect("nonzero form")
}

/// The explicit configuration: the simplex cycle against `{f₁, w − p}`.
pub fn paper_configuration(f1: &Rational, p: &Gauss) -> Result<(K1Precycle, SymbolPair), KlmError> {
    if f1.is_zero() {
        return Err(KlmError::Invalid("f1 must be nonzero".into()));
    }
    let sp = SymbolPair::new(FormProduct::constant(Gauss::real(f1.clone())), chart_function(p))?;
    Ok((simplex_cycle(), sp))
}
