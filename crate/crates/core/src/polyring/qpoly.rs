use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{parse_rational, PolyError, Rational};

/// Univariate polynomial in `q`, coefficients constant term first, with
/// trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Rational) -> Self {
        Self::new(vec![value])
    }

    pub fn monomial(coeff: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); power];
        coeffs.push(coeff);
        Self::new(coeffs)
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| super::integer(c)).collect())
    }

    /// Parses coefficient strings such as `["0", "-3/2", "1"]`.
    pub fn parse_coeffs<S: AsRef<str>>(coeffs: &[S]) -> Result<Self, PolyError> {
        coeffs
            .iter()
            .map(|c| parse_rational(c.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> Rational {
        self.coeffs
            .get(power)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` plays the role of degree minus infinity for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest power with a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, q: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * q + c)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Ascending powers, e.g. `2 - 3*q + q^2`.
impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (power, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            let magnitude = c.abs();
            match power {
                0 => write!(f, "{magnitude}")?,
                _ => {
                    if !magnitude.is_one() {
                        write!(f, "{magnitude}*")?;
                    }
                    if power == 1 {
                        f.write_str("q")?;
                    } else {
                        write!(f, "q^{power}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{integer, rational};

    #[test]
    fn trims_and_reports_degree() {
        let p = QPoly::from_integers(&[1, 0, 0]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(QPoly::from_integers(&[0, 0]).degree(), None);
        assert!(QPoly::from_integers(&[0]).is_zero());
        assert_eq!(QPoly::from_integers(&[0, 0, 3]).order(), Some(2));
    }

    #[test]
    fn arithmetic_and_evaluation() {
        // (1 - q)(1 + q) = 1 - q^2
        let a = QPoly::from_integers(&[1, -1]);
        let b = QPoly::from_integers(&[1, 1]);
        assert_eq!(&a * &b, QPoly::from_integers(&[1, 0, -1]));
        assert_eq!(&(&a + &b) - &b, a);
        let p = QPoly::from_integers(&[2, -3, 1]);
        assert_eq!(p.eval(&integer(1)), integer(0));
        assert_eq!(p.eval(&rational(1, 2)), rational(3, 4));
        assert_eq!(p.to_string(), "2 - 3*q + q^2");
        assert_eq!((-&p).to_string(), "-2 + 3*q - q^2");
    }

    #[test]
    fn coefficient_strings_round_trip() {
        let p = QPoly::parse_coeffs(&["0", "-3/2", "1"]).unwrap();
        assert_eq!(p.coeff_strings(), ["0", "-3/2", "1"]);
        assert!(QPoly::parse_coeffs(&["nope"]).is_err());
    }
}
