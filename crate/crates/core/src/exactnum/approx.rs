//! Reals known only through rigorous rational enclosures.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_GUARD_DIGITS: u32 = 64;
pub const DEFAULT_CAP_DIGITS: u32 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxSource {
    /// A decimal literal read as a rounded value: the real lies within half a
    /// unit in the last written place. More digits cannot be produced.
    Decimal { text: String, value: BigRational, half_ulp: BigRational },
    Pi,
    E,
}

/// A real number with a working-precision budget.
///
/// Floors and ceilings start at `guard_digits` and double on ambiguity until
/// `cap_digits`; past that the caller gets `PrecisionExhausted`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxReal {
    source: ApproxSource,
    guard_digits: u32,
    cap_digits: u32,
}

fn pow10(digits: u32) -> BigInt {
    BigInt::from(10u8).pow(digits)
}

/// `Σ (-1)^j / ((2j+1) x^(2j+1))` scaled by `scale`, with the absolute error
/// bound in units of `1/scale`.
fn arctan_inv_scaled(x: u32, scale: &BigInt) -> (BigInt, BigInt) {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = scale / &x;
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * j + 1);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        j += 1;
        terms += 1;
    }
    // Each truncated division loses < 1 unit (twice per term), and the
    // omitted alternating tail is < 1 unit.
    (sum, BigInt::from(2 * terms + 2))
}

impl ApproxReal {
    pub fn decimal(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let (int_part, frac_part) = match trimmed.split_once('.') {
            Some((i, f)) => (i, f),
            None => (trimmed, ""),
        };
        let valid = !int_part.is_empty()
            && int_part.bytes().all(|b| b.is_ascii_digit())
            && frac_part.bytes().all(|b| b.is_ascii_digit());
        if !valid {
            return Err(Error::Parse(format!("not a decimal literal: {text:?}")));
        }
        let digits = frac_part.len() as u32;
        let numer: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .map_err(|_| Error::Parse(format!("not a decimal literal: {text:?}")))?;
        let value = BigRational::new(numer, pow10(digits));
        let half_ulp = BigRational::new(BigInt::one(), pow10(digits) * 2);
        Ok(Self::with_source(ApproxSource::Decimal {
            text: trimmed.to_string(),
            value,
            half_ulp,
        }))
    }

    pub fn pi() -> Self {
        Self::with_source(ApproxSource::Pi)
    }

    pub fn e() -> Self {
        Self::with_source(ApproxSource::E)
    }

    fn with_source(source: ApproxSource) -> Self {
        ApproxReal { source, guard_digits: DEFAULT_GUARD_DIGITS, cap_digits: DEFAULT_CAP_DIGITS }
    }

    pub fn with_budget(mut self, guard_digits: u32, cap_digits: u32) -> Self {
        self.guard_digits = guard_digits.max(1);
        self.cap_digits = cap_digits.max(self.guard_digits);
        self
    }

    pub fn source(&self) -> &ApproxSource {
        &self.source
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    pub fn cap_digits(&self) -> u32 {
        self.cap_digits
    }

    /// Closed rational interval containing the value, of width about
    /// `10^-digits` for refinable sources.
    pub fn enclosure(&self, digits: u32) -> (BigRational, BigRational) {
        match &self.source {
            ApproxSource::Decimal { value, half_ulp, .. } => (value - half_ulp, value + half_ulp),
            ApproxSource::Pi => {
                // Machin: π = 16 atan(1/5) − 4 atan(1/239)
                let scale = pow10(digits + 8);
                let (a5, e5) = arctan_inv_scaled(5, &scale);
                let (a239, e239) = arctan_inv_scaled(239, &scale);
                let mid = a5 * 16 - a239 * 4;
                let err = e5 * 16 + e239 * 4;
                (
                    BigRational::new(&mid - &err, scale.clone()),
                    BigRational::new(mid + err, scale),
                )
            }
            ApproxSource::E => {
                // Σ 1/j!, each term truncated; tail after the last nonzero term
                // is below one unit.
                let scale = pow10(digits + 8);
                let mut term = scale.clone();
                let mut sum = BigInt::zero();
                let mut j = 1u64;
                let mut terms = 0u64;
                while !term.is_zero() {
                    sum += &term;
                    term /= BigInt::from(j);
                    j += 1;
                    terms += 1;
                }
                let err = BigInt::from(terms + 2);
                (
                    BigRational::new(&sum - &err, scale.clone()),
                    BigRational::new(sum + err, scale),
                )
            }
        }
    }

    fn refinable(&self) -> bool {
        !matches!(self.source, ApproxSource::Decimal { .. })
    }

    /// Runs `decide` on successively tighter enclosures until it commits.
    pub fn resolve<T>(
        &self,
        mut decide: impl FnMut(&BigRational, &BigRational) -> Option<T>,
    ) -> Result<T> {
        let mut digits = self.guard_digits;
        loop {
            let (lo, hi) = self.enclosure(digits);
            if let Some(v) = decide(&lo, &hi) {
                return Ok(v);
            }
            if !self.refinable() || digits >= self.cap_digits {
                return Err(Error::PrecisionExhausted { digits });
            }
            digits = digits.saturating_mul(2).min(self.cap_digits);
        }
    }
}

impl fmt::Display for ApproxReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            ApproxSource::Decimal { text, .. } => f.write_str(text),
            ApproxSource::Pi => f.write_str("pi"),
            ApproxSource::E => f.write_str("e"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_enclosure_contains_known_digits() {
        let (lo, hi) = ApproxReal::pi().enclosure(40);
        // π truncated to 50 places; the true value is in [t, t + 10^-50).
        let t = "314159265358979323846264338327950288419716939937510";
        let lower = BigRational::new(t.parse().unwrap(), pow10(50));
        let upper = &lower + BigRational::new(BigInt::one(), pow10(50));
        assert!(lo <= upper && lower <= hi);
        assert!(&hi - &lo < BigRational::new(BigInt::one(), pow10(40)));
    }

    #[test]
    fn e_enclosure_contains_known_digits() {
        let (lo, hi) = ApproxReal::e().enclosure(30);
        let t = "2718281828459045235360287471352662497757";
        let lower = BigRational::new(t.parse().unwrap(), pow10(39));
        let upper = &lower + BigRational::new(BigInt::one(), pow10(39));
        assert!(lo <= upper && lower <= hi);
        assert!(&hi - &lo < BigRational::new(BigInt::one(), pow10(30)));
    }

    #[test]
    fn decimal_half_ulp() {
        let a = ApproxReal::decimal("1.25").unwrap();
        let (lo, hi) = a.enclosure(64);
        assert_eq!(lo, BigRational::new(1245.into(), 1000.into()));
        assert_eq!(hi, BigRational::new(1255.into(), 1000.into()));
        assert!(ApproxReal::decimal("1.2.3").is_err());
        assert!(ApproxReal::decimal("-1.5").is_err());
        assert!(ApproxReal::decimal(".5").is_err());
    }

    #[test]
    fn resolve_gives_up_at_cap() {
        let pi = ApproxReal::pi().with_budget(4, 16);
        let mut seen = Vec::new();
        let err = pi
            .resolve(|lo, _| {
                seen.push(lo.clone());
                None::<()>
            })
            .unwrap_err();
        assert_eq!(err, Error::PrecisionExhausted { digits: 16 });
        assert_eq!(seen.len(), 3); // 4, 8, 16 digits
    }
}
