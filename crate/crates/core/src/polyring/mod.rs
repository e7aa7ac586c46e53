//! Exact polynomial arithmetic over the rationals.
//!
//! [`MPoly`] is sparse in the edge variables `x_g` of one multigraph plus the
//! coupling `q`; [`QPoly`] is dense univariate in `q`. Everything is exact:
//! coefficients are arbitrary-precision rationals and no floating point is
//! involved anywhere.

mod json;
mod monomial;
mod mpoly;
mod qpoly;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use json::{MPolyJson, TermJson};
pub use monomial::Monomial;
pub use mpoly::{Evaluation, MPoly, Registry, Weights};
pub use qpoly::QPoly;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, Error)]
pub enum PolyError {
    #[error("polynomials live over different variable registries")]
    RegistryMismatch,
    #[error("not divisible: remainder {remainder}")]
    NonDivisible { remainder: MPoly },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("no weight given for variable x_{0}")]
    MissingWeight(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
    #[error("invalid polynomial JSON: {0}")]
    Json(String),
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `7`, `-3/2` or a terminating decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, PolyError> {
    let bad = || PolyError::InvalidRational(text.to_string());
    let s = text.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let digits: BigInt = format!(
            "{}{}",
            if whole_abs.is_empty() { "0" } else { whole_abs },
            frac
        )
        .parse()
        .map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    s.parse::<BigInt>()
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Square root of a nonnegative rational that is a perfect square.
pub fn rational_sqrt(value: &Rational) -> Option<Rational> {
    if value.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rational::new(root(value.numer())?, root(value.denom())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3").unwrap(), integer(3));
        assert_eq!(parse_rational("-3/2").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rational(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(rational_sqrt(&rational(9, 4)), Some(rational(3, 2)));
        assert_eq!(rational_sqrt(&integer(2)), None);
        assert_eq!(rational_sqrt(&integer(-4)), None);
        assert_eq!(rational_sqrt(&integer(0)), Some(integer(0)));
    }
}
