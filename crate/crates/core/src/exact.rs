//! Exact rationals for probabilities, plus the text rendering used in reports.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A reduced rational in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    /// `None` when the value falls outside `[0, 1]` or `den == 0`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Option<Self> {
        let den = den.into();
        if den.is_zero() {
            return None;
        }
        ExactProb::from_ratio(BigRational::new(num.into(), den))
    }

    pub fn from_ratio(value: BigRational) -> Option<Self> {
        if value.is_negative() || value > BigRational::one() {
            None
        } else {
            Some(ExactProb(value))
        }
    }

    pub fn zero() -> Self {
        ExactProb(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactProb(BigRational::one())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn pow(&self, exp: u32) -> ExactProb {
        ExactProb(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn log2(&self) -> f64 {
        ratio_log2(&self.0)
    }

    pub fn render(&self) -> RenderedValue {
        RenderedValue::of(&self.0)
    }
}

impl std::ops::Mul for &ExactProb {
    type Output = ExactProb;

    fn mul(self, rhs: &ExactProb) -> ExactProb {
        ExactProb(&self.0 * &rhs.0)
    }
}

impl std::ops::Mul for ExactProb {
    type Output = ExactProb;

    fn mul(self, rhs: ExactProb) -> ExactProb {
        ExactProb(self.0 * rhs.0)
    }
}

impl Serialize for ExactProb {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.render().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactProb {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RenderedValue::deserialize(deserializer)?;
        let (num, den) = raw.parse_exact().map_err(D::Error::custom)?;
        ExactProb::new(num, den).ok_or_else(|| D::Error::custom("probability outside [0, 1]"))
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `log2` of a non-negative big integer; `-inf` for zero.
pub fn biguint_log2(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

pub fn ratio_log2(value: &BigRational) -> f64 {
    let num = value.numer().magnitude();
    let den = value.denom().magnitude();
    biguint_log2(num) - biguint_log2(den)
}

pub fn ratio_to_f64(value: &BigRational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let sign = if value.numer().sign() == Sign::Minus {
        -1.0
    } else {
        1.0
    };
    sign * ratio_log2(value).exp2()
}

/// Round-half-up decimal with a fixed number of fractional digits.
pub fn ratio_decimal(value: &BigRational, places: usize) -> String {
    let negative = value.is_negative();
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let num: BigInt = value.numer().abs() * &scale * 2u32 + value.denom();
    let scaled = num.div_floor(&(value.denom() * 2));
    let digits = scaled.to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        format!("{int}.{frac}")
    };
    if negative && !scaled.is_zero() {
        format!("-{body}")
    } else {
        body
    }
}

/// `~2^-X.YZ`, two decimals (exact ties go to even).
pub fn format_log2(log2: f64) -> String {
    format!("~2^{log2:.2}")
}

/// Largest denominator digit count for which the fraction is shown.
pub const FRACTION_DIGIT_LIMIT: usize = 20;

/// One value in the report formats: exact numerator/denominator, five-place
/// decimal, and binary logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedValue {
    pub num: String,
    pub den: String,
    pub decimal: String,
    pub log2: String,
}

impl RenderedValue {
    pub fn of(value: &BigRational) -> Self {
        RenderedValue {
            num: value.numer().to_string(),
            den: value.denom().to_string(),
            decimal: ratio_decimal(value, 5),
            log2: format_log2(ratio_log2(value)),
        }
    }

    pub fn parse_exact(&self) -> std::result::Result<(BigInt, BigInt), String> {
        let num: BigInt = self.num.parse().map_err(|e| format!("num: {e}"))?;
        let den: BigInt = self.den.parse().map_err(|e| format!("den: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok((num, den))
    }

    pub fn to_ratio(&self) -> std::result::Result<BigRational, String> {
        let (num, den) = self.parse_exact()?;
        Ok(BigRational::new(num, den))
    }

    /// Fraction when the denominator is short enough, otherwise the decimal.
    pub fn short(&self) -> String {
        if self.den.len() <= FRACTION_DIGIT_LIMIT {
            if self.den == "1" {
                self.num.clone()
            } else {
                format!("{}/{}", self.num, self.den)
            }
        } else {
            self.decimal.clone()
        }
    }
}

impl fmt::Display for RenderedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.len() <= FRACTION_DIGIT_LIMIT {
            write!(f, "{} = {} {}", self.short(), self.decimal, self.log2)
        } else {
            write!(f, "{} {}", self.decimal, self.log2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn log2_ties_round_to_even() {
        assert_eq!(format_log2(-0.125), "~2^-0.12");
        assert_eq!(format_log2(-0.375), "~2^-0.38");
        assert_eq!(format_log2(-16.0), "~2^-16.00");
    }

    #[test]
    fn prob_range_is_checked() {
        assert!(ExactProb::new(3, 2).is_none());
        assert!(ExactProb::new(-1, 2).is_none());
        assert!(ExactProb::new(1, 0).is_none());
        let p = ExactProb::new(108, 256).unwrap();
        assert_eq!(p.numer(), &BigInt::from(27));
        assert_eq!(p.denom(), &BigInt::from(64));
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(ratio_decimal(&q(27, 64), 5), "0.42188");
        assert_eq!(ratio_decimal(&q(747, 65536), 5), "0.01140");
        assert_eq!(ratio_decimal(&q(4, 3), 5), "1.33333");
        assert_eq!(ratio_decimal(&q(1, 1), 5), "1.00000");
        assert_eq!(ratio_decimal(&q(0, 1), 2), "0.00");
        assert_eq!(ratio_decimal(&q(7, 2), 0), "4");
    }

    #[test]
    fn log2_of_huge_values() {
        let tiny = BigRational::new(BigInt::one(), BigInt::one() << 600u32);
        assert!((ratio_log2(&tiny) + 600.0).abs() < 1e-12);
        let third = q(1, 3);
        assert!((ratio_log2(&third) - (1.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!((ratio_to_f64(&q(27, 64)) - 0.421875).abs() < 1e-15);
        assert_eq!(format_log2(-6.8291), "~2^-6.83");
    }

    #[test]
    fn rendering() {
        let r = RenderedValue::of(&q(27, 64));
        assert_eq!(r.short(), "27/64");
        assert_eq!(r.to_string(), "27/64 = 0.42188 ~2^-1.25");
        let big = RenderedValue::of(&BigRational::new(BigInt::one(), BigInt::one() << 100u32));
        assert_eq!(big.short(), big.decimal);
    }
}
