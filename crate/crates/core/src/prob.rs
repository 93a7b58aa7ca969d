//! Exact probabilities in `[0, 1]`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error("probability `{0}` is outside [0, 1]")]
    OutOfRange(String),
    #[error("malformed probability literal `{0}`")]
    Malformed(String),
    #[error("probability `{0}` has a zero denominator")]
    ZeroDenominator(String),
}

/// An exact rational number `p` with `0 <= p <= 1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(BigRational);

impl Prob {
    pub fn new(value: BigRational) -> Result<Self, ProbError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(ProbError::OutOfRange(value.to_string()));
        }
        Ok(Prob(value))
    }

    /// `num / den`, reduced.
    pub fn ratio(num: u64, den: u64) -> Result<Self, ProbError> {
        if den == 0 {
            return Err(ProbError::ZeroDenominator(format!("{num}/{den}")));
        }
        Prob::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Prob(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob(BigRational::one())
    }

    /// `1 / n` for `n >= 1`.
    pub fn reciprocal(n: usize) -> Self {
        assert!(n >= 1, "reciprocal of zero");
        Prob(BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    /// `1 / n!`.
    pub fn inverse_factorial(n: usize) -> Self {
        let fact = (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
        Prob(BigRational::new(BigInt::one(), fact))
    }

    /// Wraps a rational already known to lie in `[0, 1]`.
    pub(crate) fn from_rational_unchecked(value: BigRational) -> Self {
        debug_assert!(!value.is_negative() && value <= BigRational::one());
        Prob(value)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn complement(&self) -> Prob {
        Prob(BigRational::one() - &self.0)
    }

    pub fn mul(&self, other: &Prob) -> Prob {
        Prob(&self.0 * &other.0)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Reduced fraction `a/b`; the denominator is always written.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Decimal rendering rounded to six places.
    pub fn to_decimal_string(&self) -> String {
        format!("{:.6}", self.to_f64())
    }

    /// Parses either a decimal literal (`0.6`, `1`, `.25`) or a fraction
    /// `a/b` into an exact value.
    pub fn parse_literal(text: &str) -> Result<Prob, ProbError> {
        let malformed = || ProbError::Malformed(text.to_string());
        let value = if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = parse_digits(num.trim()).ok_or_else(malformed)?;
            let den: BigInt = parse_digits(den.trim()).ok_or_else(malformed)?;
            if den.is_zero() {
                return Err(ProbError::ZeroDenominator(text.to_string()));
            }
            BigRational::new(num, den)
        } else {
            let (int_part, frac_part) = match text.split_once('.') {
                Some((i, f)) => (i, f),
                None => (text, ""),
            };
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(malformed());
            }
            let int_val = if int_part.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(int_part).ok_or_else(malformed)?
            };
            let frac_val = if frac_part.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(frac_part).ok_or_else(malformed)?
            };
            let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
            BigRational::new(int_val * &scale + frac_val, scale)
        };
        Prob::new(value).map_err(|_| ProbError::OutOfRange(text.to_string()))
    }
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Compact form: `a/b`, or just `a` for integers.
impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prob({self})")
    }
}

impl FromStr for Prob {
    type Err = ProbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prob::parse_literal(s)
    }
}
