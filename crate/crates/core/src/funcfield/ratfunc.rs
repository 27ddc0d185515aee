//! Elements of Q(t) in reduced form, plus the text grammar used by the CLI
//! and the JSON schemas.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::Poly;
use super::FuncFieldError;
use crate::arith::Rational;

/// `num/den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self, FuncFieldError> {
        if den.is_zero() {
            return Err(FuncFieldError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;
        let lc = den.leading();
        Ok(RationalFunction { num: num.scale(&lc.recip()), den: den.monic() })
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunction { num: p, den: Poly::one() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    /// The coordinate function `t`.
    pub fn t() -> Self {
        Self::from_poly(Poly::x())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&(&self.num * &other.den) + &(&other.num * &self.den), &self.den * &other.den)
            .expect("nonzero denominators")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self, FuncFieldError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, FuncFieldError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, FuncFieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = u32::try_from(e.unsigned_abs()).map_err(|_| FuncFieldError::Parse {
            position: 0,
            message: "exponent too large".into(),
        })?;
        Ok(RationalFunction { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// Value at a rational point where the denominator does not vanish.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    /// Degree as a map P¹ → P¹: max(deg num, deg den).
    pub fn map_degree(&self) -> usize {
        self.num.deg().max(self.den.deg())
    }

    pub fn display_in(&self, var: &str) -> String {
        if self.den.is_constant() {
            return self.num.display_in(var);
        }
        let wrap = |p: &Poly| {
            let s = p.display_in(var);
            if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({})", s)
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }

    pub fn parse(text: &str) -> Result<Self, FuncFieldError> {
        parse_in(text, "t")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("t"))
    }
}

impl std::str::FromStr for RationalFunction {
    type Err = FuncFieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Parse a rational-function expression in the single variable `var`.
///
/// Grammar: integers, rationals `a/b`, the variable, `+ - * / ^`, parentheses.
/// Exponents are integer literals, optionally negative.
pub fn parse_in(text: &str, var: &str) -> Result<RationalFunction, FuncFieldError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, var };
    let value = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FuncFieldError {
        FuncFieldError::Parse { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalFunction, FuncFieldError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, FuncFieldError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.power()?;
                    acc = acc.div(&rhs).map_err(|_| FuncFieldError::Parse {
                        position: at,
                        message: "division by zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<RationalFunction, FuncFieldError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.pos;
            let e = self.integer()?;
            let e: i64 = e.try_into().map_err(|_| FuncFieldError::Parse {
                position: at,
                message: "exponent too large".into(),
            })?;
            let e = if neg { -e } else { e };
            return base.pow(e).map_err(|_| FuncFieldError::Parse {
                position: at,
                message: "negative power of zero".into(),
            });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, FuncFieldError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<RationalFunction, FuncFieldError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RationalFunction::constant(Rational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if name == self.var {
                    Ok(RationalFunction::t())
                } else {
                    self.pos = start;
                    Err(self.error(&format!("unknown identifier '{}'", name)))
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}
