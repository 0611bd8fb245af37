//! Exact arithmetic for the tree parameter `k`.
//!
//! Rational and quadratic-irrational `k` are handled exactly; anything else
//! goes through [`ApproxReal`], which refuses to answer rather than misround.

mod approx;
mod isqrt;
mod quad;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

pub use approx::{ApproxReal, ApproxSource, DEFAULT_CAP_DIGITS, DEFAULT_GUARD_DIGITS};
pub use isqrt::{exact_sqrt, isqrt, isqrt_u128, squarefree_split};
pub use quad::QuadReal;

use crate::error::{Error, Result};

/// The tree parameter, a real number `k > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KValue {
    Rational(BigRational),
    Quad(QuadReal),
    Approx(ApproxReal),
}

impl KValue {
    pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::InvalidK("zero denominator".into()));
        }
        Self::from_exact(QuadReal::from_rational(&BigRational::new(num, den)))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::rational(n, 1)
    }

    /// Wraps an exact value, collapsing rational field elements to `Rational`.
    pub fn from_exact(x: QuadReal) -> Result<Self> {
        if x.compare(&QuadReal::one()) != Ordering::Greater {
            return Err(Error::InvalidK(format!("k must exceed 1, got {x}")));
        }
        Ok(match x.to_rational() {
            Some(r) => KValue::Rational(r),
            None => KValue::Quad(x),
        })
    }

    /// `k = (a + √(a² + 4b))/2`, the positive root of `k² = ak + b`.
    pub fn golden(a: i64, b: i64) -> Result<Self> {
        let disc = a as i128 * a as i128 + 4 * b as i128;
        if disc < 0 {
            return Err(Error::InvalidK(format!("a² + 4b = {disc} is negative")));
        }
        let disc = u64::try_from(disc)
            .map_err(|_| Error::InvalidK(format!("a² + 4b = {disc} is too large")))?;
        Self::from_exact(QuadReal::new(a.into(), BigInt::one(), disc, 2.into()))
    }

    pub fn approx(x: ApproxReal) -> Result<Self> {
        let above_one = x.resolve(|lo, hi| {
            if lo > &BigRational::one() {
                Some(true)
            } else if hi <= &BigRational::one() {
                Some(false)
            } else {
                None
            }
        });
        match above_one {
            Ok(true) => Ok(KValue::Approx(x)),
            Ok(false) => Err(Error::InvalidK(format!("k must exceed 1, got {x}"))),
            Err(_) => Err(Error::InvalidK(format!("cannot confirm {x} exceeds 1"))),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, KValue::Approx(_))
    }

    /// The value as a field element, for exact variants.
    pub fn exact(&self) -> Option<QuadReal> {
        match self {
            KValue::Rational(r) => Some(QuadReal::from_rational(r)),
            KValue::Quad(q) => Some(q.clone()),
            KValue::Approx(_) => None,
        }
    }

    pub fn require_exact(&self) -> Result<QuadReal> {
        self.exact().ok_or(Error::UnsupportedRepresentation(
            "operation needs a rational or quadratic k",
        ))
    }

    /// `⌊n·k⌋`.
    pub fn floor_scaled(&self, n: &BigInt) -> Result<BigInt> {
        match self {
            KValue::Rational(r) => Ok((n * r.numer()).div_floor(r.denom())),
            KValue::Quad(q) => Ok(q.scale(n).floor()),
            KValue::Approx(a) => a.resolve(|lo, hi| {
                let (l, h) = ((lo * n).floor(), (hi * n).floor());
                (l == h).then(|| l.to_integer())
            }),
        }
    }

    /// `⌈n·k⌉`.
    pub fn ceil_scaled(&self, n: &BigInt) -> Result<BigInt> {
        match self {
            KValue::Rational(r) => Ok(-((-(n * r.numer())).div_floor(r.denom()))),
            KValue::Quad(q) => Ok(q.scale(n).ceil()),
            KValue::Approx(a) => a.resolve(|lo, hi| {
                let (l, h) = ((lo * n).ceil(), (hi * n).ceil());
                (l == h).then(|| l.to_integer())
            }),
        }
    }

    /// `⌊n/k⌋`.
    pub fn floor_div(&self, n: &BigInt) -> Result<BigInt> {
        match self {
            KValue::Rational(r) => Ok((n * r.denom()).div_floor(r.numer())),
            KValue::Quad(q) => Ok(q.recip().scale(n).floor()),
            KValue::Approx(a) => a.resolve(|lo, hi| {
                // n ≥ 0 and k > 0, so n/k ∈ [n/hi, n/lo].
                let n = BigRational::from_integer(n.clone());
                let (l, h) = ((&n / hi).floor(), (&n / lo).floor());
                (l == h).then(|| l.to_integer())
            }),
        }
    }

    /// `{n·k}` as an exact field element in `[0, 1)`.
    pub fn frac_scaled(&self, n: &BigInt) -> Result<QuadReal> {
        Ok(self.require_exact()?.scale(n).fract())
    }

    pub fn floor(&self) -> Result<BigInt> {
        self.floor_scaled(&BigInt::one())
    }

    pub fn ceil(&self) -> Result<BigInt> {
        self.ceil_scaled(&BigInt::one())
    }

    pub fn is_integer(&self) -> Result<bool> {
        Ok(self.floor()? == self.ceil()?)
    }

    /// Decimal rendering, rounded down, for display purposes.
    pub fn to_decimal(&self, digits: u32) -> String {
        match self {
            KValue::Approx(a) => {
                let (lo, _) = a.enclosure(digits);
                QuadReal::from_rational(&lo).to_decimal(digits, false)
            }
            _ => self.exact().expect("exact").to_decimal(digits, false),
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            KValue::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            KValue::Quad(q) => write!(f, "{q}"),
            KValue::Approx(a) => write!(f, "{a}"),
        }
    }
}

impl Serialize for KValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_int<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

/// k-spec grammar: `p/q`, `n`, `quad:(p,q,D,r)`, `golden:a,b`, `pi`, `e`, or a
/// decimal literal (approximate).
impl FromStr for KValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("quad:") {
            let inner = body
                .trim()
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected quad:(p,q,D,r), got {s:?}")))?;
            let parts: Vec<&str> = inner.split(',').collect();
            let [p, q, d, r] = parts[..] else {
                return Err(Error::Parse(format!("expected four fields in {s:?}")));
            };
            let r: BigInt = parse_int(r, "denominator")?;
            if r.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            let d: u64 = parse_int(d, "radicand")?;
            return Self::from_exact(QuadReal::new(
                parse_int(p, "p")?,
                parse_int(q, "q")?,
                d,
                r,
            ));
        }
        if let Some(body) = s.strip_prefix("golden:") {
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected golden:a,b, got {s:?}")))?;
            return Self::golden(parse_int(a, "a")?, parse_int(b, "b")?);
        }
        match s {
            "pi" => return Self::approx(ApproxReal::pi()),
            "e" => return Self::approx(ApproxReal::e()),
            _ => {}
        }
        if let Some((n, d)) = s.split_once('/') {
            let d: BigInt = parse_int(d, "denominator")?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            let n: BigInt = parse_int(n, "numerator")?;
            return Self::rational(n, d);
        }
        if s.contains('.') {
            return Self::approx(ApproxReal::decimal(s)?);
        }
        let n: BigInt = parse_int(s, "k")?;
        Self::rational(n, 1)
    }
}

/// Reads a decimal or fraction literal as an exact rational, e.g. `1.05`.
pub fn parse_exact_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let d: BigInt = parse_int(d, "denominator")?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        BigRational::new(parse_int(n, "numerator")?, d)
    } else {
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty() && frac_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part)
        {
            return Err(Error::Parse(format!("not a number: {s:?}")));
        }
        let numer: BigInt = parse_int(&format!("0{int_part}{frac_part}"), "number")?;
        BigRational::new(numer, BigInt::from(10u8).pow(frac_part.len() as u32))
    };
    Ok(if neg { -value } else { value })
}

#[cfg(test)]
pub(crate) fn big(n: i64) -> BigInt {
    BigInt::from(n)
}
