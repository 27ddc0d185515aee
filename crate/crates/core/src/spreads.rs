//! Spreads of defining equations: constants such as π, √π, e, i, √k are
//! replaced by fresh variables, and algebraic dependencies among them are
//! recorded as relation polynomials over Q.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{format_rational, is_squarefree, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpreadError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

/// A constant that may appear in an input polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstSymbol {
    Pi,
    E,
    I,
    /// `√k` for a squarefree `k ≥ 2`.
    Sqrt(BigInt),
    SqrtPi,
}

impl ConstSymbol {
    /// π and e are declared algebraically independent; everything else
    /// satisfies a relation.
    pub fn is_transcendental(&self) -> bool {
        matches!(self, ConstSymbol::Pi | ConstSymbol::E)
    }
}

impl fmt::Display for ConstSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstSymbol::Pi => f.write_str("pi"),
            ConstSymbol::E => f.write_str("e"),
            ConstSymbol::I => f.write_str("i"),
            ConstSymbol::Sqrt(k) => write!(f, "sqrt({})", k),
            ConstSymbol::SqrtPi => f.write_str("sqrt(pi)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyExpr {
    Num(Rational),
    Var(String),
    Const(ConstSymbol),
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

impl PolyExpr {
    /// Distinct constants in order of first occurrence.
    pub fn constants(&self) -> Vec<ConstSymbol> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let PolyExpr::Const(c) = e {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        });
        out
    }

    /// Distinct variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let PolyExpr::Var(v) = e {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&PolyExpr)) {
        f(self);
        match self {
            PolyExpr::Num(_) | PolyExpr::Var(_) | PolyExpr::Const(_) => {}
            PolyExpr::Neg(a) | PolyExpr::Pow(a, _) => a.walk(f),
            PolyExpr::Add(a, b) | PolyExpr::Sub(a, b) | PolyExpr::Mul(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    fn expand<C: Coeff>(&self, leaf: &impl Fn(&PolyExpr) -> MPoly<C>) -> MPoly<C> {
        match self {
            PolyExpr::Num(r) => MPoly::constant(C::from_rational(r)),
            PolyExpr::Var(_) | PolyExpr::Const(_) => leaf(self),
            PolyExpr::Neg(a) => a.expand(leaf).neg(),
            PolyExpr::Add(a, b) => a.expand(leaf).add(&b.expand(leaf)),
            PolyExpr::Sub(a, b) => a.expand(leaf).add(&b.expand(leaf).neg()),
            PolyExpr::Mul(a, b) => a.expand(leaf).mul(&b.expand(leaf)),
            PolyExpr::Pow(a, k) => a.expand(leaf).pow(*k),
        }
    }

    /// The expansion as a polynomial over Q; only valid without constants.
    pub fn to_mpoly(&self) -> Option<MPoly<Rational>> {
        if !self.constants().is_empty() {
            return None;
        }
        Some(self.expand(&|e| match e {
            PolyExpr::Var(v) => MPoly::var(v),
            _ => unreachable!("constant-free"),
        }))
    }
}

/// Parse a polynomial with symbolic constants.
///
/// Identifiers other than `pi`, `e`, `i`, `sqrt` are variables. `sqrt`
/// takes either `pi` or a squarefree integer ≥ 2. Division is only by
/// nonzero rational constants.
pub fn parse_poly(text: &str) -> Result<PolyExpr, SpreadError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> SpreadError {
        SpreadError::Syntax { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PolyExpr, SpreadError> {
        let mut acc = if self.eat('-') {
            PolyExpr::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = PolyExpr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat('-') {
                acc = PolyExpr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, SpreadError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = PolyExpr::Mul(Box::new(acc), Box::new(self.power()?));
            } else if self.peek() == Some('/') {
                let at = self.pos;
                self.pos += 1;
                let rhs = self.power()?;
                let value = rhs
                    .to_mpoly()
                    .and_then(|m| m.as_constant())
                    .filter(|r| !Zero::is_zero(r))
                    .ok_or(SpreadError::Syntax {
                        position: at,
                        message: "division only by nonzero rational constants".into(),
                    })?;
                acc = PolyExpr::Mul(Box::new(acc), Box::new(PolyExpr::Num(value.recip())));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<PolyExpr, SpreadError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let n = self.integer()?;
            let k = n.to_u32().ok_or_else(|| self.error("exponent too large"))?;
            return Ok(PolyExpr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, SpreadError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].chars().take_while(|c| c.is_ascii_digit()).count();
        if len == 0 {
            return Err(self.error("expected integer"));
        }
        self.pos += len;
        Ok(self.src[start..self.pos].parse().expect("digits"))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        for c in self.src[start..].chars() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn atom(&mut self) -> Result<PolyExpr, SpreadError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(PolyExpr::Num(Rational::from_integer(self.integer()?))),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "pi" => Ok(PolyExpr::Const(ConstSymbol::Pi)),
                    "e" => Ok(PolyExpr::Const(ConstSymbol::E)),
                    "i" => Ok(PolyExpr::Const(ConstSymbol::I)),
                    "sqrt" => self.sqrt_arg(start),
                    _ => Ok(PolyExpr::Var(name)),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn sqrt_arg(&mut self, start: usize) -> Result<PolyExpr, SpreadError> {
        if !self.eat('(') {
            return Err(self.error("expected '(' after sqrt"));
        }
        self.skip_ws();
        let c = if self.src[self.pos..].starts_with("pi") {
            self.pos += 2;
            ConstSymbol::SqrtPi
        } else {
            let k = self.integer()?;
            if k < BigInt::from(2) || !is_squarefree(&k) {
                return Err(SpreadError::Syntax {
                    position: start,
                    message: format!("sqrt needs a squarefree integer >= 2, got {}", k),
                });
            }
            ConstSymbol::Sqrt(k)
        };
        if !self.eat(')') {
            return Err(self.error("expected ')'"));
        }
        Ok(PolyExpr::Const(c))
    }
}

/// Coefficient rings for [`MPoly`].
pub trait Coeff: Clone + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(r: &Rational) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

/// Exponents keyed by variable name.
pub type Monomial = BTreeMap<String, u32>;

/// Sparse multivariate polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> MPoly<C> {
    pub fn zero() -> Self {
        MPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        MPoly { terms }
    }

    pub fn var(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        MPoly { terms: BTreeMap::from([(m, C::one())]) }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    fn insert_add(&mut self, m: Monomial, c: C) {
        let sum = match self.terms.get(&m) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                out.insert_add(m, c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute polynomials for some variables.
    pub fn substitute(&self, map: &BTreeMap<String, MPoly<C>>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for (v, e) in m {
                let factor = match map.get(v) {
                    Some(p) => p.pow(*e),
                    None => {
                        let mut mono = Monomial::new();
                        mono.insert(v.clone(), *e);
                        MPoly { terms: BTreeMap::from([(mono, C::one())]) }
                    }
                };
                t = t.mul(&factor);
            }
            out = out.add(&t);
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut r = Monomial::new();
            for (v, e) in m {
                *r.entry(map.get(v).unwrap_or(v).clone()).or_insert(0) += e;
            }
            out.insert_add(r, c.clone());
        }
        out
    }

    pub fn variables(&self) -> Vec<String> {
        let mut vs: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        vs.sort();
        vs.dedup();
        vs
    }
}

impl MPoly<Rational> {
    /// Scale so the leading term (last in monomial order) has coefficient 1.
    pub fn monic(&self) -> Self {
        match self.terms.values().next_back() {
            None => self.clone(),
            Some(lead) => {
                let inv = lead.recip();
                MPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * &inv)).collect() }
            }
        }
    }

    fn map_coeffs<D: Coeff>(&self) -> MPoly<D> {
        MPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), D::from_rational(c))).collect() }
    }
}

/// Variables alphabetically, higher powers first, constant term last.
fn display_order(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    for ((va, ea), (vb, eb)) in a.iter().zip(b) {
        let o = va.cmp(vb).then_with(|| eb.cmp(ea));
        if o.is_ne() {
            return o;
        }
    }
    b.len().cmp(&a.len())
}

impl fmt::Display for MPoly<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| display_order(a.0, b.0));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{}^{}", v, e) })
                .collect();
            if vars.is_empty() {
                f.write_str(&format_rational(&abs))?;
            } else if abs.is_one() {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// How π is treated when √π also occurs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PiMode {
    /// π gets its own variable `u` with the relation `u − v²`.
    #[default]
    Relation,
    /// π is written as `v²` and gets no variable.
    Eliminate,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpreadOptions {
    pub pi_mode: PiMode,
    /// Constants adjoined to the base even though the polynomial does not
    /// use them (the field of definition of a cycle, say).
    pub adjoin: Vec<ConstSymbol>,
    /// Invert the common coefficient denominator `D` with a fresh `x̃` and
    /// the relation `D·x̃ − 1`.
    pub over_z: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpreadPresentation {
    pub source: PolyExpr,
    pub main: MPoly<Rational>,
    pub relations: Vec<MPoly<Rational>>,
    /// Constant ↦ fresh variable, in order of assignment.
    pub substitution: Vec<(ConstSymbol, String)>,
    /// The variable inverting the denominator, with `D`, in over-Z mode.
    pub inverted_denominator: Option<(String, BigInt)>,
}

impl SpreadPresentation {
    pub fn fresh_variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.substitution.iter().map(|(_, n)| n.clone()).collect();
        if let Some((n, _)) = &self.inverted_denominator {
            v.push(n.clone());
        }
        v
    }

    /// Whether a renaming of the fresh variables turns this presentation
    /// into the given main polynomial and relation set (relations compared
    /// up to scalars).
    pub fn matches_up_to_renaming(&self, main: &MPoly<Rational>, relations: &[MPoly<Rational>]) -> bool {
        let fresh = self.fresh_variables();
        let mut targets: Vec<String> = main.variables();
        for r in relations {
            targets.extend(r.variables());
        }
        targets.sort();
        targets.dedup();
        let originals = self.source.variables();
        targets.retain(|t| !originals.contains(t));
        if targets.len() != fresh.len() || relations.len() != self.relations.len() {
            return false;
        }
        let normalize = |rs: &[MPoly<Rational>]| {
            let mut v: Vec<String> = rs.iter().map(|r| r.monic().to_string()).collect();
            v.sort();
            v
        };
        let wanted = normalize(relations);
        permutations(targets.len()).into_iter().any(|perm| {
            let map: BTreeMap<String, String> =
                fresh.iter().cloned().zip(perm.iter().map(|&k| targets[k].clone())).collect();
            self.main.rename(&map) == *main
                && normalize(&self.relations.iter().map(|r| r.rename(&map)).collect::<Vec<_>>()) == wanted
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

const FRESH_NAMES: [&str; 12] = ["u", "v", "w", "t", "s", "r", "q", "p", "m", "n", "k", "j"];

/// Replace the constants of `expr` by fresh variables named `u, v, w, t, s, …`
/// in order of first occurrence (names already used as variables are skipped).
pub fn spread(expr: &PolyExpr, opts: &SpreadOptions) -> SpreadPresentation {
    let used = expr.variables();
    let mut names = FRESH_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain((1..).map(|k| format!("c{}", k)))
        .filter(|n| !used.contains(n));
    let mut consts = expr.constants();
    for c in &opts.adjoin {
        if !consts.contains(c) {
            consts.push(c.clone());
        }
    }
    let eliminate_pi = opts.pi_mode == PiMode::Eliminate && consts.contains(&ConstSymbol::SqrtPi);
    let mut substitution: Vec<(ConstSymbol, String)> = Vec::new();
    for c in &consts {
        if eliminate_pi && *c == ConstSymbol::Pi {
            continue;
        }
        substitution.push((c.clone(), names.next().expect("unbounded names")));
    }
    let name_of = |c: &ConstSymbol| substitution.iter().find(|(d, _)| d == c).map(|(_, n)| n.clone());
    let sqrt_pi = name_of(&ConstSymbol::SqrtPi);
    let leaf = |e: &PolyExpr| -> MPoly<Rational> {
        match e {
            PolyExpr::Var(v) => MPoly::var(v),
            PolyExpr::Const(ConstSymbol::Pi) if eliminate_pi => {
                MPoly::var(sqrt_pi.as_ref().expect("sqrt(pi) present")).pow(2)
            }
            PolyExpr::Const(c) => MPoly::var(&name_of(c).expect("every constant has a name")),
            _ => unreachable!("leaves only"),
        }
    };
    let mut main = expr.expand(&leaf);

    let mut relations: Vec<MPoly<Rational>> = Vec::new();
    for (c, n) in &substitution {
        let x = MPoly::<Rational>::var(n);
        let rel = match c {
            ConstSymbol::Pi | ConstSymbol::E => None,
            ConstSymbol::I => Some(x.pow(2).add(&MPoly::constant(<Rational as One>::one()))),
            ConstSymbol::Sqrt(k) => Some(x.pow(2).add(&MPoly::constant(-Rational::from_integer(k.clone())))),
            ConstSymbol::SqrtPi => name_of(&ConstSymbol::Pi).map(|u| MPoly::var(&u).add(&x.pow(2).neg())),
        };
        if let Some(r) = rel {
            if !relations.contains(&r) {
                relations.push(r);
            }
        }
    }

    let mut inverted_denominator = None;
    if opts.over_z {
        let d = main.terms.values().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
        if !d.is_one() {
            let n = names.next().expect("unbounded names");
            let xt = MPoly::<Rational>::var(&n);
            let mut scaled = MPoly::zero();
            for (m, c) in &main.terms {
                let mut mono = m.clone();
                let integral = c * Rational::from_integer(d.clone());
                let c = if c.is_integer() {
                    c.clone()
                } else {
                    *mono.entry(n.clone()).or_insert(0) += 1;
                    integral
                };
                scaled.insert_add(mono, c);
            }
            main = scaled;
            relations.push(xt.mul(&MPoly::constant(Rational::from_integer(d.clone()))).add(&MPoly::constant(-<Rational as One>::one())));
            inverted_denominator = Some((n, d));
        }
    }

    SpreadPresentation { source: expr.clone(), main, relations, substitution, inverted_denominator }
}

impl fmt::Display for SpreadPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.main)?;
        for r in &self.relations {
            write!(f, ", {}", r)?;
        }
        Ok(())
    }
}

/// Complex fixed-point number with scale `10^WORK_DIGITS`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct CFixed {
    re: BigInt,
    im: BigInt,
}

const WORK_DIGITS: u32 = 80;

fn scale() -> &'static BigInt {
    static S: OnceLock<BigInt> = OnceLock::new();
    S.get_or_init(|| num_traits::pow(BigInt::from(10), WORK_DIGITS as usize))
}

impl CFixed {
    fn real(re: BigInt) -> Self {
        CFixed { re, im: BigInt::zero() }
    }

    fn i() -> Self {
        CFixed { re: BigInt::zero(), im: scale().clone() }
    }

    /// max(|re|, |im|) as a fraction of one.
    fn magnitude(&self) -> BigInt {
        self.re.abs().max(self.im.abs())
    }
}

impl Coeff for CFixed {
    fn zero() -> Self {
        CFixed::real(BigInt::zero())
    }
    fn one() -> Self {
        CFixed::real(scale().clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        CFixed { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        let s = scale();
        CFixed {
            re: (&self.re * &o.re - &self.im * &o.im) / s,
            im: (&self.re * &o.im + &self.im * &o.re) / s,
        }
    }
    fn neg(&self) -> Self {
        CFixed { re: -&self.re, im: -&self.im }
    }
    fn from_rational(r: &Rational) -> Self {
        CFixed::real(r.numer() * scale() / r.denom())
    }
}

/// `arctan(1/x)·S` by its alternating series.
fn arctan_inv(x: u32) -> BigInt {
    let x2 = BigInt::from(x * x);
    let mut power = scale() / x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

fn pi_fixed() -> BigInt {
    arctan_inv(5) * 16 - arctan_inv(239) * 4
}

fn e_fixed() -> BigInt {
    let mut term = scale().clone();
    let mut sum = BigInt::zero();
    let mut k = 1u32;
    while !term.is_zero() {
        sum += &term;
        term /= k;
        k += 1;
    }
    sum
}

fn const_value(c: &ConstSymbol) -> CFixed {
    match c {
        ConstSymbol::Pi => CFixed::real(pi_fixed()),
        ConstSymbol::E => CFixed::real(e_fixed()),
        ConstSymbol::I => CFixed::i(),
        ConstSymbol::Sqrt(k) => CFixed::real((k * scale() * scale()).sqrt()),
        ConstSymbol::SqrtPi => CFixed::real((pi_fixed() * scale()).sqrt()),
    }
}

fn fixed_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY) / 10f64.powi(WORK_DIGITS as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// `|r(p)|` for each relation at the true constants.
    pub relation_residuals: Vec<(String, f64)>,
    /// Largest relative coefficient error against the original polynomial.
    pub max_coefficient_error: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Substitute numerical values (to 80 digits) for the fresh variables and
/// compare with the original polynomial evaluated at the true constants.
pub fn verify_report(sp: &SpreadPresentation, digits: u32) -> VerifyReport {
    assert!(digits + 20 <= WORK_DIGITS, "working precision exceeded");
    let mut values: BTreeMap<String, MPoly<CFixed>> = sp
        .substitution
        .iter()
        .map(|(c, n)| (n.clone(), MPoly::constant(const_value(c))))
        .collect();
    if let Some((n, d)) = &sp.inverted_denominator {
        values.insert(n.clone(), MPoly::constant(CFixed::real(scale() / d)));
    }
    let threshold = num_traits::pow(BigInt::from(10), (WORK_DIGITS - digits) as usize);

    let mut ok = true;
    let mut relation_residuals = Vec::new();
    for r in &sp.relations {
        let v = r.map_coeffs::<CFixed>().substitute(&values);
        let res = v.as_constant().unwrap_or_else(CFixed::zero).magnitude();
        ok &= v.terms.len() <= 1 && res < threshold;
        relation_residuals.push((r.to_string(), fixed_to_f64(&res)));
    }

    let numeric_main = sp.main.map_coeffs::<CFixed>().substitute(&values);
    let original = sp.source.expand(&|e| match e {
        PolyExpr::Var(v) => MPoly::var(v),
        PolyExpr::Const(c) => MPoly::constant(const_value(c)),
        _ => unreachable!("leaves only"),
    });
    let mut worst = 0.0f64;
    let monomials: std::collections::BTreeSet<&Monomial> =
        numeric_main.terms.keys().chain(original.terms.keys()).collect();
    for m in monomials {
        let a = original.terms.get(m).cloned().unwrap_or_else(CFixed::zero);
        let b = numeric_main.terms.get(m).cloned().unwrap_or_else(CFixed::zero);
        let diff = a.add(&b.neg()).magnitude();
        let size = a.magnitude().max(scale().clone());
        // relative error diff/size, tested as diff·10^digits < size
        ok &= &diff * num_traits::pow(BigInt::from(10), digits as usize) < size;
        worst = worst.max(fixed_to_f64(&diff) / fixed_to_f64(&size).max(1.0));
    }
    VerifyReport {
        relation_residuals,
        max_coefficient_error: worst,
        threshold: format!("1e-{}", digits).parse().expect("float literal"),
        passed: ok,
    }
}

/// [`verify_report`], failing unless every check is below `10^-digits`.
pub fn verify_spread(sp: &SpreadPresentation, digits: u32) -> Result<VerifyReport, SpreadError> {
    let report = verify_report(sp, digits);
    if report.passed {
        Ok(report)
    } else {
        let bad: Vec<String> = report
            .relation_residuals
            .iter()
            .filter(|(_, r)| *r >= report.threshold)
            .map(|(s, r)| format!("{} = {:e}", s, r))
            .collect();
        Err(SpreadError::VerificationFailed(format!(
            "relations [{}], coefficient error {:e}",
            bad.join("; "),
            report.max_coefficient_error
        )))
    }
}

/// The polynomial of the affine surface example.
pub const EX000: &str = "pi*y^2 + (sqrt(pi)+4)*x^3 + e*x";

/// The plane cubic over `Q(√π, e, i, √3, √5)`, with its coefficient of
/// `e·z0·z2²` equal to 1/2.
pub const EC_CUBIC: &str = "(1/2)*e*z0*z2^2 - pi*z1^3 + sqrt(pi)*z1*z0^2 + sqrt(3)*i*z0^3";

/// Options reproducing the presentation over `Q[u,v,w,t,s]`: π eliminated
/// through √π, and √5 adjoined.
pub fn ec_options() -> SpreadOptions {
    SpreadOptions { pi_mode: PiMode::Eliminate, adjoin: vec![ConstSymbol::Sqrt(BigInt::from(5))], over_z: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(s: &str) -> MPoly<Rational> {
        parse_poly(s).unwrap().to_mpoly().unwrap()
    }

    #[test]
    fn parse_examples() {
        let e = parse_poly(EX000).unwrap();
        assert_eq!(e.constants(), vec![ConstSymbol::Pi, ConstSymbol::SqrtPi, ConstSymbol::E]);
        assert_eq!(e.variables(), vec!["y", "x"]);
        assert!(parse_poly("x^2 - 2").unwrap().constants().is_empty());
        match parse_poly("sqrt(4)*x") {
            Err(SpreadError::Syntax { position, .. }) => assert_eq!(position, 0),
            other => panic!("{:?}", other),
        }
        assert!(parse_poly("x/y").is_err());
        assert!(parse_poly("x + ").is_err());
        assert!(parse_poly("sqrt(1)").is_err());
    }

    #[test]
    fn ex000_spread() {
        let sp = spread(&parse_poly(EX000).unwrap(), &SpreadOptions::default());
        assert_eq!(sp.main, mp("u*y^2 + (v+4)*x^3 + w*x"));
        assert_eq!(sp.relations, vec![mp("u - v^2")]);
        assert!(verify_spread(&sp, 30).is_ok());
    }

    #[test]
    fn ec_spread() {
        let sp = spread(&parse_poly(EC_CUBIC).unwrap(), &ec_options());
        let main = mp("(1/2)*u*z0*z2^2 - v^2*z1^3 + v*z1*z0^2 + w*t*z0^3");
        let rels = [mp("w^2 + 1"), mp("t^2 - 3"), mp("s^2 - 5")];
        assert!(sp.matches_up_to_renaming(&main, &rels), "{}", sp);
        assert!(verify_spread(&sp, 30).is_ok());
    }

    #[test]
    fn constant_free_is_identity() {
        let e = parse_poly("x^2*y - 3*x + 1/2").unwrap();
        let sp = spread(&e, &SpreadOptions::default());
        assert_eq!(sp.main, e.to_mpoly().unwrap());
        assert!(sp.relations.is_empty());
        assert!(verify_spread(&sp, 30).unwrap().relation_residuals.is_empty());
    }

    #[test]
    fn corrupted_relation_fails() {
        let mut sp = spread(&parse_poly(EX000).unwrap(), &SpreadOptions::default());
        sp.relations[0] = mp("u - v^3");
        assert!(matches!(verify_spread(&sp, 30), Err(SpreadError::VerificationFailed(_))));
        let mut sp = spread(&parse_poly(EX000).unwrap(), &SpreadOptions::default());
        sp.main = mp("u*y^2 + (v+5)*x^3 + w*x");
        assert!(verify_spread(&sp, 30).is_err());
    }

    #[test]
    fn over_z_inverts_denominators() {
        let opts = SpreadOptions { over_z: true, ..ec_options() };
        let sp = spread(&parse_poly(EC_CUBIC).unwrap(), &opts);
        let (name, d) = sp.inverted_denominator.clone().unwrap();
        assert_eq!(d, BigInt::from(2));
        assert!(sp.relations.contains(&mp(&format!("2*{} - 1", name))));
        assert!(sp.main.terms().all(|(_, c)| c.is_integer()));
        assert!(verify_spread(&sp, 30).is_ok());
    }

    #[test]
    fn fresh_names_avoid_existing_variables() {
        let sp = spread(&parse_poly("u*pi + v*e").unwrap(), &SpreadOptions::default());
        assert_eq!(sp.fresh_variables(), vec!["w", "t"]);
    }

    #[test]
    fn constants_are_accurate() {
        let pi = fixed_to_f64(&pi_fixed());
        assert!((pi - std::f64::consts::PI).abs() < 1e-15);
        assert!((fixed_to_f64(&e_fixed()) - std::f64::consts::E).abs() < 1e-15);
        // 50 digits of π
        let digits = (pi_fixed() / num_traits::pow(BigInt::from(10), 30)).to_string();
        assert_eq!(&digits[..50], "31415926535897932384626433832795028841971693993751");
    }
}
