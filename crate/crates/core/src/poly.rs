//! Bivariate polynomials with exact rational coefficients.
//!
//! Coefficients are kept as [`BigRational`] so parsing and differentiation
//! are exact; evaluation goes through a compiled `f64` form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Upper bound on the total degree accepted by the parser.
pub const MAX_DEGREE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent error at byte {pos}: {msg}")]
    Exponent { pos: usize, msg: String },
}

/// Monomial exponents `(deg_x, deg_y)`.
pub type Exponents = (u32, u32);

/// Canonical polynomial: a map from exponent pair to a nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolyExpr {
    terms: BTreeMap<Exponents, BigRational>,
}

impl PolyExpr {
    pub fn zero() -> Self {
        PolyExpr::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = PolyExpr::zero();
        p.add_term((0, 0), c);
        p
    }

    pub fn from_int(c: i64) -> Self {
        PolyExpr::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn x() -> Self {
        PolyExpr::monomial(BigRational::one(), 1, 0)
    }

    pub fn y() -> Self {
        PolyExpr::monomial(BigRational::one(), 0, 1)
    }

    pub fn monomial(c: BigRational, dx: u32, dy: u32) -> Self {
        let mut p = PolyExpr::zero();
        p.add_term((dx, dy), c);
        p
    }

    /// Build from `(dx, dy, numerator, denominator)` tuples. Zero terms vanish.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, i64, i64)>,
    {
        let mut p = PolyExpr::zero();
        for (dx, dy, n, d) in terms {
            p.add_term((dx, dy), BigRational::new(BigInt::from(n), BigInt::from(d)));
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, BigRational> {
        &self.terms
    }

    pub fn coefficient(&self, dx: u32, dy: u32) -> BigRational {
        self.terms.get(&(dx, dy)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    /// The constant value, when the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &PolyExpr) -> PolyExpr {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> PolyExpr {
        PolyExpr { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn sub(&self, other: &PolyExpr) -> PolyExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyExpr) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }

    pub fn pow(&self, n: u32) -> PolyExpr {
        let mut out = PolyExpr::from_int(1);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// ∂/∂x, exact.
    pub fn dx(&self) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for ((a, b), c) in &self.terms {
            if *a > 0 {
                out.add_term((a - 1, *b), c * BigRational::from_integer(BigInt::from(*a)));
            }
        }
        out
    }

    /// ∂/∂y, exact.
    pub fn dy(&self) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for ((a, b), c) in &self.terms {
            if *b > 0 {
                out.add_term((*a, b - 1), c * BigRational::from_integer(BigInt::from(*b)));
            }
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for ((a, b), c) in &self.terms {
            acc += c * num::pow(x.clone(), *a as usize) * num::pow(y.clone(), *b as usize);
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| (*a as i32, *b as i32, c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.compile().eval(x, y)
    }
}

/// `f64` evaluation form of a [`PolyExpr`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<(i32, i32, f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * x.powi(a) * y.powi(b)).sum()
    }

    /// Σ |c · xᵃ yᵇ|, the magnitude scale of an evaluation at (x, y).
    pub fn abs_scale(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(a, b, c)| (c * x.powi(a) * y.powi(b)).abs()).sum()
    }
}

impl fmt::Display for PolyExpr {
    /// Canonical form: terms by descending total degree, then descending
    /// x-degree. Parses back to the same polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Exponents> = self.terms.keys().collect();
        keys.sort_by_key(|e| std::cmp::Reverse((e.0 + e.1, e.0)));
        for (i, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if !mag.is_one() || *e == (0, 0) {
                factors.push(mag.to_string());
            }
            for (var, deg) in [("x", e.0), ("y", e.1)] {
                match deg {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    d => factors.push(format!("{var}^{d}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl FromStr for PolyExpr {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_polynomial(s)
    }
}

/// Parse `text` into canonical form.
///
/// Grammar (whitespace ignored):
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := unary (('*' | '/') unary)*
/// unary  := ('+' | '-') unary | power
/// power  := atom ('^' uint)?
/// atom   := number | 'x' | 'y' | '(' expr ')'
/// number := digits ('.' digits)?
/// ```
///
/// Division is only allowed by a nonzero constant, which is how rational
/// literals such as `3/4` are written.
pub fn parse_polynomial(text: &str) -> Result<PolyExpr, PolyError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.syntax(format!("unexpected character `{}`", c as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PolyExpr, PolyError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, PolyError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
                self.check_degree(&acc)?;
            } else if self.eat(b'/') {
                self.skip_ws();
                let at = self.pos;
                let d = self.unary()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                    Some(_) => return Err(PolyError::Syntax { pos: at, msg: "division by zero".into() }),
                    None => {
                        return Err(PolyError::Syntax { pos: at, msg: "division by a non-constant expression".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<PolyExpr, PolyError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<PolyExpr, PolyError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        match self.peek() {
            Some(b'-') => {
                return Err(PolyError::Exponent { pos: at, msg: "negative exponent".into() });
            }
            Some(c) if c.is_ascii_digit() => {}
            _ => {
                return Err(PolyError::Exponent {
                    pos: at,
                    msg: "exponent must be a nonnegative integer literal".into(),
                })
            }
        }
        let digits = self.digits();
        if self.peek() == Some(b'.') {
            return Err(PolyError::Exponent { pos: at, msg: "non-integer exponent".into() });
        }
        let n: u32 = match digits.parse() {
            Ok(n) if n <= MAX_DEGREE => n,
            _ => return Err(PolyError::Exponent { pos: at, msg: format!("exponent exceeds {MAX_DEGREE}") }),
        };
        if base.degree() * n > MAX_DEGREE {
            return Err(PolyError::Exponent { pos: at, msg: format!("degree exceeds {MAX_DEGREE}") });
        }
        Ok(base.pow(n))
    }

    fn atom(&mut self) -> Result<PolyExpr, PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(PolyExpr::x())
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(PolyExpr::y())
            }
            Some(b'(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    self.skip_ws();
                    return Err(PolyError::Syntax {
                        pos: self.pos,
                        msg: format!("unclosed parenthesis opened at byte {open}"),
                    });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) => Err(self.syntax(format!("unexpected character `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<PolyExpr, PolyError> {
        let start = self.pos;
        let int_part = self.digits();
        let mut frac = String::new();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int_part.is_empty() && frac.is_empty() {
            return Err(PolyError::Syntax { pos: start, msg: "malformed number".into() });
        }
        let digits = format!("{int_part}{frac}");
        let num: BigInt =
            digits.parse().map_err(|_| PolyError::Syntax { pos: start, msg: "malformed number".into() })?;
        let den = num::pow(BigInt::from(10), frac.len());
        Ok(PolyExpr::constant(BigRational::new(num, den)))
    }

    fn check_degree(&self, p: &PolyExpr) -> Result<(), PolyError> {
        if p.degree() > MAX_DEGREE {
            Err(PolyError::Exponent { pos: self.pos, msg: format!("degree exceeds {MAX_DEGREE}") })
        } else {
            Ok(())
        }
    }
}
