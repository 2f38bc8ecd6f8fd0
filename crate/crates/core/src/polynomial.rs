//! Sparse multivariate polynomials in `x1, …, xm` over a [`Scalar`].
//!
//! Text form: sums of monomials such as `2*x1^2*x3 - 1/3*x2 + 0.5`;
//! parentheses and products of sums are accepted by the parser.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{convert, parse_rational, Rational, Scalar};

#[derive(Clone, PartialEq)]
pub struct Polynomial<S> {
    vars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: S) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The coordinate function `x_{i+1}`.
    pub fn variable(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        Self::monomial(e, S::one())
    }

    pub fn monomial(exponents: Vec<u32>, c: S) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: S) {
        debug_assert_eq!(exponents.len(), self.vars);
        let slot = self.terms.entry(exponents).or_insert_with(S::zero);
        *slot = slot.clone() + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.vars.max(other.vars));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = (0..out.vars)
                    .map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0))
                    .collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.vars, S::one()), |acc, _| acc.mul(self))
    }

    /// `∂/∂x_{i+1}`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c.clone() * S::from_i64(i64::from(e[i])));
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (e, c)| {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = m * xi.clone();
                }
            }
            acc + m
        })
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (e, c)| {
            acc + e.iter().zip(x).fold(c.to_f64(), |m, (&k, xi)| m * xi.powi(k as i32))
        })
    }

    pub fn convert<T: Scalar>(&self) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), convert::<S, T>(c));
        }
        out
    }

    pub fn parse(text: &str, vars: usize) -> Result<Self> {
        let mut p = Parser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, vars };
        let out = p.sum()?;
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!("unexpected `{}` in polynomial `{text}`", p.chars[p.pos])));
        }
        Ok(out.convert())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    vars: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Polynomial<Rational>> {
        let mut acc = Polynomial::zero(self.vars);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    1
                }
                Some('-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            first = false;
            let t = self.product()?;
            acc = if sign > 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Polynomial<Rational>> {
        let mut acc = self.power()?;
        while let Some(op) = self.peek().filter(|c| *c == '*' || *c == '/') {
            self.pos += 1;
            let rhs = self.power()?;
            acc = if op == '*' { acc.mul(&rhs) } else { acc.scale(&Self::constant_inverse(&rhs)?) };
        }
        Ok(acc)
    }

    /// `1/c` for a nonzero constant polynomial `c`.
    fn constant_inverse(p: &Polynomial<Rational>) -> Result<Rational> {
        match p.terms.iter().next() {
            Some((e, c)) if p.terms.len() == 1 && e.iter().all(|&k| k == 0) => Ok(Rational::from_i64(1) / c.clone()),
            None => Err(Error::Parse("division by zero".into())),
            _ => Err(Error::Parse("division is only by nonzero constants".into())),
        }
    }

    fn power(&mut self) -> Result<Polynomial<Rational>> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| Error::Parse(format!("expected integer at position {start}")))
    }

    fn atom(&mut self) -> Result<Polynomial<Rational>> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('-') => {
                self.pos += 1;
                Ok(self.power()?.scale(&-Rational::from_i64(1)))
            }
            Some('x') => {
                self.pos += 1;
                let i = self.integer()? as usize;
                if i == 0 || i > self.vars {
                    return Err(Error::Parse(format!("variable x{i} outside x1..x{}", self.vars)));
                }
                Ok(Polynomial::variable(self.vars, i - 1))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                // exponent part of a decimal literal
                if self.peek().is_some_and(|c| c == 'e' || c == 'E') {
                    self.pos += 1;
                    if self.peek().is_some_and(|c| c == '-' || c == '+') {
                        self.pos += 1;
                    }
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                // a `/` directly followed by digits continues a rational literal
                if self.peek() == Some('/') && self.chars.get(self.pos + 1).is_some_and(char::is_ascii_digit) {
                    self.pos += 1;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                let s: String = self.chars[start..self.pos].iter().collect();
                let v = parse_rational(&s).ok_or_else(|| Error::Parse(format!("bad number `{s}`")))?;
                Ok(Polynomial::constant(self.vars, v))
            }
            other => Err(Error::Parse(format!("unexpected {other:?} at position {}", self.pos))),
        }
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let text = c.to_exact_string();
            let (neg, mag) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == "1" {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<S: fmt::Debug> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = Polynomial<Rational>;

    #[test]
    fn parse_and_print() {
        let p = P::parse("2*x1^2*x3 - 1/3*x2 + 0.5", 3).unwrap();
        assert_eq!(p.eval(&[Rational::from_i64(1), Rational::from_i64(3), Rational::from_i64(2)]), Rational::from_ratio(7, 2));
        let q = P::parse(&p.to_string(), 3).unwrap();
        assert_eq!(p, q);
        assert_eq!(P::parse("(x1+1)*(x1-1)", 1).unwrap(), P::parse("x1^2 - 1", 1).unwrap());
        assert!(P::parse("x4", 3).is_err());
        assert!(P::parse("x1 +", 1).is_err());
        assert_eq!(P::parse("x2/4 - x1/(2*3)", 2).unwrap(), P::parse("1/4*x2 - 1/6*x1", 2).unwrap());
        assert!(P::parse("x1/x2", 2).is_err());
        assert!(P::parse("x1/0", 1).is_err());
        assert_eq!(P::parse("0", 2).unwrap().to_string(), "0");
    }

    #[test]
    fn derivative() {
        let p = P::parse("x1^3*x2 + 4*x2", 2).unwrap();
        assert_eq!(p.derivative(0), P::parse("3*x1^2*x2", 2).unwrap());
        assert_eq!(p.derivative(1), P::parse("x1^3 + 4", 2).unwrap());
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(coeffs in proptest::collection::vec((-20i64..20, 1i64..9, 0u32..3, 0u32..3), 0..6)) {
            let mut p = P::zero(2);
            for (a, b, e1, e2) in coeffs {
                p = p.add(&P::monomial(vec![e1, e2], Rational::from_ratio(a, b)));
            }
            prop_assert_eq!(P::parse(&p.to_string(), 2).unwrap(), p);
        }

        #[test]
        fn evaluation_is_a_ring_map(a in -5i64..5, b in -5i64..5, x in -4i64..4, y in -4i64..4) {
            let p = P::parse(&format!("{a}*x1*x2 + x1^2 - {b}"), 2).unwrap();
            let q = P::parse(&format!("x2 - {b}*x1"), 2).unwrap();
            let pt = [Rational::from_i64(x), Rational::from_i64(y)];
            prop_assert_eq!(p.mul(&q).eval(&pt), p.eval(&pt) * q.eval(&pt));
            prop_assert_eq!(p.add(&q).eval(&pt), p.eval(&pt) + q.eval(&pt));
        }
    }
}
