//! Canonical heights on elliptic curves over Q, the Néron–Tate pairing, and
//! the graded height pairing on a product of curves built from it.
//!
//! Heights use the x-coordinate normalization `h(P) = log max(|num x|, den x)`,
//! so `ĥ(P) = lim 4⁻ⁿ h(2ⁿP)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{format_rational, int, ln_big, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NtError {
    #[error("point {0} is not on the curve")]
    NotOnCurve(String),
    #[error("curve is singular (discriminant 0)")]
    SingularCurve,
    #[error("divisor class has degree {0}, expected 0")]
    NotDegreeZero(i64),
    #[error("tolerance {tol} needs {needed} doublings, cap is {cap}")]
    PrecisionUnreachable { tol: f64, needed: u32, cap: u32 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticCurveQ {
    a: [BigInt; 5],
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
    discriminant: BigInt,
}

impl EllipticCurveQ {
    /// Coefficients in the order `[a1, a2, a3, a4, a6]`.
    pub fn new(a: [BigInt; 5]) -> Result<Self, NtError> {
        let [a1, a2, a3, a4, a6] = &a;
        let b2 = a1 * a1 + a2 * 4;
        let b4 = a4 * 2 + a1 * a3;
        let b6 = a3 * a3 + a6 * 4;
        let b8 = a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let b2b2b8: BigInt = &b2 * &b2 * &b8;
        let discriminant: BigInt = -b2b2b8 - &b4 * &b4 * &b4 * 8u32 - &b6 * &b6 * 27u32 + &b2 * &b4 * &b6 * 9u32;
        if discriminant.is_zero() {
            return Err(NtError::SingularCurve);
        }
        Ok(EllipticCurveQ { a, b2, b4, b6, b8, discriminant })
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self, NtError> {
        Self::new(a.map(BigInt::from))
    }

    /// `"[a1,a2,a3,a4,a6]"`.
    pub fn parse(text: &str) -> Result<Self, NtError> {
        let items = bracket_list(text)?;
        if items.len() != 5 {
            return Err(NtError::Invalid(format!("expected 5 coefficients, got {}", items.len())));
        }
        let mut a: [BigInt; 5] = Default::default();
        for (slot, item) in a.iter_mut().zip(&items) {
            *slot = item.parse().map_err(|_| NtError::Invalid(format!("bad coefficient '{}'", item)))?;
        }
        Self::new(a)
    }

    pub fn coefficients(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    fn ar(&self, i: usize) -> Rational {
        Rational::from_integer(self.a[i].clone())
    }

    pub fn contains(&self, p: &ECPoint) -> bool {
        match p {
            ECPoint::Infinity => true,
            ECPoint::Affine { x, y } => {
                let (a1, a2, a3, a4, a6) = (self.ar(0), self.ar(1), self.ar(2), self.ar(3), self.ar(4));
                let lhs = y * y + &a1 * x * y + &a3 * y;
                let rhs = x * x * x + &a2 * x * x + &a4 * x + a6;
                lhs == rhs
            }
        }
    }

    pub fn point(&self, x: Rational, y: Rational) -> Result<ECPoint, NtError> {
        let p = ECPoint::Affine { x, y };
        if self.contains(&p) {
            Ok(p)
        } else {
            Err(NtError::NotOnCurve(p.to_string()))
        }
    }

    pub fn point_i64(&self, x: i64, y: i64) -> Result<ECPoint, NtError> {
        self.point(Rational::from_integer(x.into()), Rational::from_integer(y.into()))
    }

    /// `"[x,y]"` with rational entries, or `"O"` for the identity.
    pub fn parse_point(&self, text: &str) -> Result<ECPoint, NtError> {
        let t = text.trim();
        if t == "O" || t == "0" || t.eq_ignore_ascii_case("inf") {
            return Ok(ECPoint::Infinity);
        }
        let items = bracket_list(t)?;
        if items.len() != 2 {
            return Err(NtError::Invalid(format!("expected [x,y], got '{}'", text)));
        }
        let coord = |s: &str| parse_rational(s).ok_or_else(|| NtError::Invalid(format!("bad coordinate '{}'", s)));
        self.point(coord(&items[0])?, coord(&items[1])?)
    }

    fn check(&self, p: &ECPoint) -> Result<(), NtError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(NtError::NotOnCurve(p.to_string()))
        }
    }

    pub fn neg(&self, p: &ECPoint) -> Result<ECPoint, NtError> {
        self.check(p)?;
        Ok(self.neg_unchecked(p))
    }

    fn neg_unchecked(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => ECPoint::Affine { x: x.clone(), y: -y - self.ar(0) * x - self.ar(2) },
        }
    }

    pub fn add(&self, p: &ECPoint, q: &ECPoint) -> Result<ECPoint, NtError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    fn add_unchecked(&self, p: &ECPoint, q: &ECPoint) -> ECPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (ECPoint::Infinity, _) => return q.clone(),
            (_, ECPoint::Infinity) => return p.clone(),
            (ECPoint::Affine { x: x1, y: y1 }, ECPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let (a1, a2, a3, a4, a6) = (self.ar(0), self.ar(1), self.ar(2), self.ar(3), self.ar(4));
        let (lambda, nu) = if x1 == x2 {
            let denom = y1 * int(2) + &a1 * x1 + &a3;
            if (y1 + y2 + &a1 * x2 + &a3).is_zero() {
                return ECPoint::Infinity;
            }
            let lambda = (x1 * x1 * int(3) + &a2 * x1 * int(2) + &a4 - &a1 * y1) / &denom;
            let nu = (-(x1 * x1 * x1) + &a4 * x1 + &a6 * int(2) - &a3 * y1) / &denom;
            (lambda, nu)
        } else {
            let dx = x2 - x1;
            ((y2 - y1) / &dx, (y1 * x2 - y2 * x1) / &dx)
        };
        let x3 = &lambda * &lambda + &a1 * &lambda - a2 - x1 - x2;
        let y3 = -(&lambda + a1) * &x3 - nu - a3;
        ECPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &ECPoint) -> Result<ECPoint, NtError> {
        self.add(p, p)
    }

    /// `n·P` by double-and-add; negative `n` uses `−P`.
    pub fn mul(&self, n: i64, p: &ECPoint) -> Result<ECPoint, NtError> {
        self.check(p)?;
        Ok(self.mul_unchecked(n, p))
    }

    fn mul_unchecked(&self, n: i64, p: &ECPoint) -> ECPoint {
        let mut base = if n < 0 { self.neg_unchecked(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = ECPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add_unchecked(&base, &base);
            }
        }
        acc
    }

    /// The order of `P` if it is a torsion point. Torsion on E(Q) has order
    /// at most 12, so larger orders are not searched.
    pub fn torsion_order(&self, p: &ECPoint) -> Result<Option<u32>, NtError> {
        self.check(p)?;
        let mut q = p.clone();
        for n in 1..=12 {
            if q.is_infinity() {
                return Ok(Some(n));
            }
            q = self.add_unchecked(&q, p);
        }
        Ok(None)
    }

    /// Numerator and denominator coefficient lists (by power of x) of the
    /// duplication map `x(2P) = F(x)/G(x)`.
    fn duplication(&self) -> ([BigInt; 5], [BigInt; 5]) {
        let f = [-&self.b8, -&self.b6 * 2, -&self.b4, BigInt::zero(), BigInt::one()];
        let g = [self.b6.clone(), &self.b4 * 2, self.b2.clone(), BigInt::from(4), BigInt::zero()];
        (f, g)
    }

    /// A constant `C` with `|h(2Q) − 4h(Q)| ≤ C` for every non-2-torsion
    /// rational point `Q`, together with the integer `N` bounding the
    /// cancellation `gcd(F(a,b), G(a,b)) | N`.
    pub fn height_difference_bound(&self) -> HeightBound {
        let (f, g) = self.duplication();
        let abs_sum = |c: &[BigInt]| c.iter().fold(BigInt::zero(), |s, x| s + x.abs());
        let upper = abs_sum(&f).max(abs_sum(&g));
        // solve u·F + v·G = N·b⁷ and u·F + v·G = N·a⁷ with cubic forms u, v
        let mut sols = Vec::new();
        for target in [0usize, 7] {
            let mut m = vec![vec![Rational::zero(); 9]; 8];
            for k in 0..8 {
                for i in 0..4 {
                    if k >= i && k - i <= 4 {
                        m[k][i] = Rational::from_integer(f[k - i].clone());
                        m[k][4 + i] = Rational::from_integer(g[k - i].clone());
                    }
                }
                if k == target {
                    m[k][8] = Rational::one();
                }
            }
            sols.push(solve(m).expect("duplication polynomials are coprime for a nonsingular curve"));
        }
        let n = sols
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let lower = sols
            .iter()
            .map(|s| s.iter().fold(BigInt::zero(), |acc, c| acc + (c * Rational::from_integer(n.clone())).to_integer().abs()))
            .max()
            .expect("two systems");
        let c = ln_big(&upper).max(ln_big(&lower));
        HeightBound { c, n }
    }
}

impl fmt::Display for EllipticCurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "[{},{},{},{},{}]", a1, a2, a3, a4, a6)
    }
}

fn bracket_list(text: &str) -> Result<Vec<String>, NtError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| NtError::Invalid(format!("expected a bracketed list, got '{}'", text)))?;
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}

/// Exact Gauss–Jordan on an augmented n×(n+1) system.
fn solve(mut m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightBound {
    pub c: f64,
    pub n: BigInt,
}

/// A rational point, or the identity `O = (0:1:0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ECPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl ECPoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, ECPoint::Infinity)
    }

    /// `(X:Y:Z)` with `Z ∈ {0, 1}`.
    pub fn projective(&self) -> [Rational; 3] {
        match self {
            ECPoint::Infinity => [Rational::zero(), Rational::one(), Rational::zero()],
            ECPoint::Affine { x, y } => [x.clone(), y.clone(), Rational::one()],
        }
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { x, .. } => Some(x),
        }
    }
}

impl fmt::Display for ECPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ECPoint::Infinity => f.write_str("O"),
            ECPoint::Affine { x, y } => write!(f, "[{},{}]", format_rational(x), format_rational(y)),
        }
    }
}

/// `log max(|num x|, den x)`, and 0 at `O`.
pub fn naive_height(p: &ECPoint) -> f64 {
    match p {
        ECPoint::Infinity => 0.0,
        ECPoint::Affine { x, .. } => ln_big(&x.numer().abs().max(x.denom().clone())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightOptions {
    pub tol: f64,
    /// Largest number of doublings attempted.
    pub max_doublings: u32,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions { tol: 1e-6, max_doublings: 12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalHeight {
    pub value: f64,
    pub doublings: u32,
    /// `C·4⁻ⁿ/3`, the bound on the truncation error.
    pub error_bound: f64,
    pub torsion_order: Option<u32>,
}

/// `ĥ(P) = lim 4⁻ⁿ h(2ⁿP)`, stopping at the first `n` whose tail bound
/// `C·4⁻ⁿ/3` is below the tolerance.
pub fn canonical_height(e: &EllipticCurveQ, p: &ECPoint, opts: &HeightOptions) -> Result<CanonicalHeight, NtError> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(NtError::InvalidTolerance(opts.tol));
    }
    if let Some(order) = e.torsion_order(p)? {
        return Ok(CanonicalHeight { value: 0.0, doublings: 0, error_bound: 0.0, torsion_order: Some(order) });
    }
    let bound = e.height_difference_bound();
    let needed = (0..).find(|&n| bound.c / (3.0 * 4f64.powi(n as i32)) < opts.tol).expect("bound decreases");
    if needed > opts.max_doublings {
        return Err(NtError::PrecisionUnreachable { tol: opts.tol, needed, cap: opts.max_doublings });
    }
    let x = p.x().expect("non-torsion point is affine");
    let (f, g) = e.duplication();
    let mut a = x.numer().clone();
    let mut b = x.denom().clone();
    for _ in 0..needed {
        let (fa, ga) = duplicate_forms(&f, &g, &a, &b);
        // reduce first: gcd against a huge operand is slow
        let common = bound.n.gcd(&(&fa % &bound.n)).gcd(&(&ga % &bound.n));
        if common.is_one() {
            a = fa;
            b = ga;
        } else {
            a = fa / &common;
            b = ga / &common;
        }
        if b.is_negative() {
            a = -a;
            b = -b;
        }
        debug_assert!(!b.is_zero(), "non-torsion point doubled to O");
    }
    let h = ln_big(&a.abs().max(b));
    let scale = 4f64.powi(needed as i32);
    Ok(CanonicalHeight {
        value: h / scale,
        doublings: needed,
        error_bound: bound.c / (3.0 * scale),
        torsion_order: None,
    })
}

/// Homogenized `(F(a,b), G(a,b))` from five full-size products.
fn duplicate_forms(f: &[BigInt; 5], g: &[BigInt; 5], a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    let aa = a * a;
    let bb = b * b;
    let ab = a * b;
    // monomials a^i b^(4-i), i = 0..4
    let m = [&bb * &bb, &ab * &bb, &aa * &bb, &aa * &ab, &aa * &aa];
    let combine = |c: &[BigInt; 5]| {
        c.iter()
            .zip(&m)
            .filter(|(ci, _)| !ci.is_zero())
            .fold(BigInt::zero(), |acc, (ci, mi)| acc + ci * mi)
    };
    (combine(f), combine(g))
}

/// `½(ĥ(P+Q) − ĥ(P) − ĥ(Q))`.
pub fn nt_pairing(e: &EllipticCurveQ, p: &ECPoint, q: &ECPoint, opts: &HeightOptions) -> Result<f64, NtError> {
    let s = e.add(p, q)?;
    let hs = canonical_height(e, &s, opts)?.value;
    let hp = canonical_height(e, p, opts)?.value;
    let hq = canonical_height(e, q, opts)?.value;
    Ok(0.5 * (hs - hp - hq))
}

/// A degree-zero formal sum of rational points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeZeroDivisorClass {
    terms: Vec<(ECPoint, i64)>,
}

impl DegreeZeroDivisorClass {
    pub fn new(terms: Vec<(ECPoint, i64)>) -> Result<Self, NtError> {
        let deg: i64 = terms.iter().map(|(_, m)| m).sum();
        if deg != 0 {
            return Err(NtError::NotDegreeZero(deg));
        }
        Ok(DegreeZeroDivisorClass { terms })
    }

    /// `(P) − (Q)`.
    pub fn difference(p: &ECPoint, q: &ECPoint) -> Self {
        DegreeZeroDivisorClass { terms: vec![(p.clone(), 1), (q.clone(), -1)] }
    }

    pub fn terms(&self) -> &[(ECPoint, i64)] {
        &self.terms
    }
}

/// Abel–Jacobi on an elliptic curve: `Σ n_i (P_i) ↦ Σ n_i P_i`.
pub fn class_to_point(e: &EllipticCurveQ, d: &DegreeZeroDivisorClass) -> Result<ECPoint, NtError> {
    let mut acc = ECPoint::Infinity;
    for (p, m) in &d.terms {
        acc = e.add(&acc, &e.mul(*m, p)?)?;
    }
    Ok(acc)
}

/// A class on `C × C` in the span of `Δ`, `e × C`, `C × e`, where `C` has genus `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceClass {
    pub coeffs: [i64; 3],
    pub genus: u32,
}

impl SurfaceClass {
    pub fn diagonal(genus: u32) -> Self {
        SurfaceClass { coeffs: [1, 0, 0], genus }
    }

    /// `Δ(1,1) = Δ − e×C − C×e`.
    pub fn delta11(genus: u32) -> Self {
        SurfaceClass { coeffs: [1, -1, -1], genus }
    }

    fn form(genus: u32) -> [[i64; 3]; 3] {
        let g = genus as i64;
        [[2 - 2 * g, 1, 1], [1, 0, 1], [1, 1, 0]]
    }

    pub fn intersect(&self, other: &SurfaceClass) -> Result<i64, NtError> {
        if self.genus != other.genus {
            return Err(NtError::Invalid("classes on different surfaces".into()));
        }
        let m = Self::form(self.genus);
        let mut s = 0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.coeffs[i] * m[i][j] * other.coeffs[j];
            }
        }
        Ok(s)
    }
}

/// `deg Δ(1,1)²` on `C × C` for a curve of genus `g`.
pub fn delta11_self_intersection(genus: u32) -> i64 {
    let d = SurfaceClass::delta11(genus);
    d.intersect(&d).expect("same surface")
}

/// `deg(w₁·w₂) · ⟨α₁, α₂⟩_NT` with the normalization constant fixed to 1.
pub fn lemma_height_relation(
    deg_w1w2: i64,
    e: &EllipticCurveQ,
    a1: &DegreeZeroDivisorClass,
    a2: &DegreeZeroDivisorClass,
    opts: &HeightOptions,
) -> Result<f64, NtError> {
    let p = class_to_point(e, a1)?;
    let q = class_to_point(e, a2)?;
    Ok(deg_w1w2 as f64 * nt_pairing(e, &p, &q, opts)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedHeight {
    /// `Π_j deg Δ²_{C_j}(1,1)`.
    pub factor: i64,
    pub nt: f64,
    pub value: f64,
}

/// The graded height pairing of the cycles built from `p₁ − q₁` and
/// `p₂ − q₂` on `C₁ × C₂ × … × C_ν`, where `genera` lists `g_2, …, g_ν`.
///
/// The hypotheses on the coniveau pieces are not checked; the right-hand
/// side is computed unconditionally.
pub fn graded_height_ex5(
    e: &EllipticCurveQ,
    points: [&ECPoint; 4],
    genera: &[u32],
    opts: &HeightOptions,
) -> Result<GradedHeight, NtError> {
    let [p1, q1, p2, q2] = points;
    if p1 == q1 || p2 == q2 {
        return Err(NtError::Invalid("p_i and q_i must be distinct".into()));
    }
    if genera.is_empty() {
        return Err(NtError::Invalid("need at least one further curve".into()));
    }
    let factor = genera.iter().map(|&g| delta11_self_intersection(g)).product::<i64>();
    let a1 = DegreeZeroDivisorClass::difference(p1, q1);
    let a2 = DegreeZeroDivisorClass::difference(p2, q2);
    let nt = nt_pairing(e, &class_to_point(e, &a1)?, &class_to_point(e, &a2)?, opts)?;
    Ok(GradedHeight { factor, nt, value: factor as f64 * nt })
}
