//! Scalar abstraction shared by every module.
//!
//! Algebraic code is written once against [`Scalar`] and instantiated with
//! [`Rational`] (exact, arbitrary precision) or with `f64`/`f32`. Code that
//! needs square roots or transcendental functions additionally bounds on
//! [`num_traits::Float`].

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Field scalar used by the algebraic core.
pub trait Scalar:
    Num + Clone + Debug + PartialEq + Neg<Output = Self> + Send + Sync + 'static
{
    /// `true` for exact arithmetic. Exact scalars compare with `==`, floats
    /// with [`Scalar::negligible`].
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test: exact for rationals, `|x| <= 1e-10` for `f64`.
    fn negligible(&self) -> bool;

    fn is_positive(&self) -> bool;

    /// Magnitude used for pivot selection.
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Lossless text form (`p/q` for rationals, shortest round-trip for floats).
    fn to_exact_string(&self) -> String;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn negligible(&self) -> bool {
        self.is_zero()
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn to_exact_string(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self) -> bool {
        self.abs() <= 1e-10
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }

    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn negligible(&self) -> bool {
        self.abs() <= 1e-4
    }

    fn is_positive(&self) -> bool {
        *self > 0.0
    }

    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }
}

/// Parses `"p"`, `"p/q"` or a decimal literal such as `"-0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Converts between scalar types through the exact-rational route when the
/// source is exact and through `f64` otherwise.
pub fn convert<S: Scalar, T: Scalar>(value: &S) -> T {
    if S::EXACT {
        T::from_rational(
            &parse_rational(&value.to_exact_string()).expect("exact scalar renders as rational"),
        )
    } else {
        T::from_rational(
            &Rational::from_float(value.to_f64()).unwrap_or_else(Rational::zero),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("3/6"), Some(Rational::from_ratio(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(Rational::from_ratio(-1, 4)));
        assert_eq!(parse_rational("7"), Some(Rational::from_i64(7)));
        assert_eq!(parse_rational("1.5e2"), Some(Rational::from_i64(150)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn exact_string_round_trips() {
        let r = Rational::from_ratio(-22, 7);
        assert_eq!(r.to_exact_string(), "-22/7");
        assert_eq!(parse_rational(&r.to_exact_string()), Some(r));
        assert_eq!(Rational::from_i64(4).to_exact_string(), "4");
    }

    #[test]
    fn float_negligible_threshold() {
        assert!(1e-11_f64.negligible());
        assert!(!1e-9_f64.negligible());
        assert!(!Rational::from_ratio(1, 1_000_000_000_000).negligible());
    }

    #[test]
    fn convert_rational_to_float() {
        let half: f64 = convert(&Rational::from_ratio(1, 2));
        assert_eq!(half, 0.5);
        let back: Rational = convert(&0.75_f64);
        assert_eq!(back, Rational::from_ratio(3, 4));
    }
}
