//! Elements `(p + q√D)/r` of real quadratic fields.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::isqrt::{isqrt, squarefree_split};

/// A real number `(p + q·√d)/r` held in canonical form.
///
/// Canonical means `r > 0`, `gcd(p, q, r) = 1`, and `d` squarefree. Rational
/// values always carry `q = 0, d = 0`, so two canonical values are equal
/// exactly when their fields are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadReal {
    p: BigInt,
    q: BigInt,
    d: u64,
    r: BigInt,
}

/// Sign of `p + q·√d` for squarefree `d` (or `d = 0`).
fn sign_surd(p: &BigInt, q: &BigInt, d: u64) -> Ordering {
    let sp = p.cmp(&BigInt::zero());
    let sq = if d == 0 { Ordering::Equal } else { q.cmp(&BigInt::zero()) };
    if sq == Ordering::Equal {
        return sp;
    }
    if sp == Ordering::Equal || sp == sq {
        return sq;
    }
    // Opposite signs: compare p² with q²d.
    match (p * p).cmp(&(q * q * BigInt::from(d))) {
        Ordering::Greater => sp,
        Ordering::Less => sq,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of `a + b√d1 + c√d2` by squaring with sign bookkeeping.
fn sign_two_surds(a: &BigInt, b: &BigInt, d1: u64, c: &BigInt, d2: u64) -> Ordering {
    let left = sign_surd(a, b, d1);
    let right = if d2 == 0 { Ordering::Equal } else { c.cmp(&BigInt::zero()) };
    if right == Ordering::Equal {
        return left;
    }
    if left == Ordering::Equal || left == right {
        return right;
    }
    // |a + b√d1|² − |c√d2|² = (a² + b²d1 − c²d2) + 2ab√d1
    let rational = a * a + b * b * BigInt::from(d1) - c * c * BigInt::from(d2);
    let irrational: BigInt = a * b * 2;
    match sign_surd(&rational, &irrational, d1) {
        Ordering::Greater => left,
        Ordering::Less => right,
        Ordering::Equal => Ordering::Equal,
    }
}

fn floor_surd_part(q: &BigInt, d: u64) -> BigInt {
    // ⌊q√d⌋ for squarefree d ≥ 2 (irrational unless q = 0).
    if q.is_zero() || d == 0 {
        return BigInt::zero();
    }
    let radicand: BigUint = (q * q).magnitude() * BigUint::from(d);
    let root = BigInt::from(isqrt(&radicand));
    if q.is_positive() {
        root
    } else if d == 1 {
        -root
    } else {
        -root - 1
    }
}

impl QuadReal {
    /// Builds the canonical form of `(p + q√d)/r`.
    ///
    /// # Panics
    /// If `r` is zero.
    pub fn new(p: BigInt, q: BigInt, d: u64, r: BigInt) -> Self {
        assert!(!r.is_zero(), "QuadReal denominator must be nonzero");
        let (mut p, mut q, mut r) = if r.is_negative() { (-p, -q, -r) } else { (p, q, r) };
        let (square, core) = squarefree_split(d);
        q *= BigInt::from(square);
        let mut d = core;
        if d == 1 {
            p += &q;
            q = BigInt::zero();
            d = 0;
        }
        if d == 0 || q.is_zero() {
            q = BigInt::zero();
            d = 0;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        if p.is_zero() && q.is_zero() {
            r = BigInt::one();
        }
        QuadReal { p, q, d, r }
    }

    pub fn from_integer(n: BigInt) -> Self {
        QuadReal { p: n, q: BigInt::zero(), d: 0, r: BigInt::one() }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        Self::new(x.numer().clone(), BigInt::zero(), 0, x.denom().clone())
    }

    pub fn zero() -> Self {
        Self::from_integer(BigInt::zero())
    }

    pub fn one() -> Self {
        Self::from_integer(BigInt::one())
    }

    /// `√n` as a field element (rational when `n` is a perfect square).
    pub fn sqrt_of(n: u64) -> Self {
        Self::new(BigInt::zero(), BigInt::one(), n, BigInt::one())
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// The squarefree radicand; `0` for rational values.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn r(&self) -> &BigInt {
        &self.r
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.r.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.p.clone(), self.r.clone()))
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.p.clone())
    }

    /// Field shared by `self` and `other`, or `None` for distinct irrational fields.
    pub fn common_radicand(&self, other: &Self) -> Option<u64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Some(d),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    fn field_with(&self, other: &Self) -> u64 {
        self.common_radicand(other).unwrap_or_else(|| {
            panic!("arithmetic across distinct fields Q(√{}) and Q(√{})", self.d, other.d)
        })
    }

    pub fn signum(&self) -> Ordering {
        sign_surd(&self.p, &self.q, self.d)
    }

    /// Exact ordering of the real values; the radicands may differ.
    pub fn compare(&self, other: &Self) -> Ordering {
        // Sign of (p1 + q1√d1)r2 − (p2 + q2√d2)r1, with r1 r2 > 0.
        let a = &self.p * &other.r - &other.p * &self.r;
        let b = &self.q * &other.r;
        let c = -(&other.q * &self.r);
        if self.d == other.d || other.d == 0 || self.d == 0 {
            let d = self.d.max(other.d);
            let q = if self.d == 0 { c } else if other.d == 0 { b } else { b + c };
            return sign_surd(&a, &q, d);
        }
        sign_two_surds(&a, &b, self.d, &c, other.d)
    }

    pub fn conj(&self) -> Self {
        QuadReal { p: self.p.clone(), q: -&self.q, d: self.d, r: self.r.clone() }
    }

    /// `1/x`.
    ///
    /// # Panics
    /// If `x` is zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let norm = &self.p * &self.p - &self.q * &self.q * BigInt::from(self.d);
        Self::new(&self.r * &self.p, -(&self.r * &self.q), self.d, norm)
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, n: &BigInt) -> Self {
        Self::new(&self.p * n, &self.q * n, self.d, self.r.clone())
    }

    pub fn floor(&self) -> BigInt {
        // p + q√d lies in [m, m + 1) with m = p + ⌊q√d⌋, and an integer j·r is
        // ≤ (p + q√d) exactly when it is ≤ m.
        let m = &self.p + floor_surd_part(&self.q, self.d);
        m.div_floor(&self.r)
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `x − ⌊x⌋ ∈ [0, 1)`, also for negative `x`.
    pub fn fract(&self) -> Self {
        self - &Self::from_integer(self.floor())
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Decimal rendering with `digits` fractional digits, rounded toward
    /// negative infinity (`round_up = false`) or positive infinity.
    pub fn to_decimal(&self, digits: u32, round_up: bool) -> String {
        let scale = BigInt::from(10u8).pow(digits);
        let scaled = self.scale(&scale);
        let n = if round_up { scaled.ceil() } else { scaled.floor() };
        format_fixed(&n, digits)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(20, false).parse().unwrap_or(f64::NAN)
    }

    /// Round-trip text: `p`, `p/r`, or `quad:(p,q,D,r)`.
    pub fn to_spec(&self) -> String {
        if self.is_integer() {
            self.p.to_string()
        } else if self.is_rational() {
            format!("{}/{}", self.p, self.r)
        } else {
            format!("quad:({},{},{},{})", self.p, self.q, self.d, self.r)
        }
    }
}

/// Formats the integer `n · 10^-digits` as a fixed-point decimal string.
pub(crate) fn format_fixed(n: &BigInt, digits: u32) -> String {
    let negative = n.sign() == Sign::Minus;
    let mut s = n.magnitude().to_string();
    let width = digits as usize + 1;
    if s.len() < width {
        s = "0".repeat(width - s.len()) + &s;
    }
    if digits > 0 {
        s.insert(s.len() - digits as usize, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

impl fmt::Display for QuadReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

impl PartialOrd for QuadReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl From<BigInt> for QuadReal {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<i64> for QuadReal {
    fn from(n: i64) -> Self {
        Self::from_integer(BigInt::from(n))
    }
}

impl From<&BigRational> for QuadReal {
    fn from(x: &BigRational) -> Self {
        Self::from_rational(x)
    }
}

impl Neg for &QuadReal {
    type Output = QuadReal;
    fn neg(self) -> QuadReal {
        QuadReal { p: -&self.p, q: -&self.q, d: self.d, r: self.r.clone() }
    }
}

impl Neg for QuadReal {
    type Output = QuadReal;
    fn neg(self) -> QuadReal {
        -&self
    }
}

impl Add for &QuadReal {
    type Output = QuadReal;
    fn add(self, rhs: &QuadReal) -> QuadReal {
        let d = self.field_with(rhs);
        QuadReal::new(
            &self.p * &rhs.r + &rhs.p * &self.r,
            &self.q * &rhs.r + &rhs.q * &self.r,
            d,
            &self.r * &rhs.r,
        )
    }
}

impl Sub for &QuadReal {
    type Output = QuadReal;
    fn sub(self, rhs: &QuadReal) -> QuadReal {
        self + &(-rhs)
    }
}

impl Mul for &QuadReal {
    type Output = QuadReal;
    fn mul(self, rhs: &QuadReal) -> QuadReal {
        let d = self.field_with(rhs);
        let dd = BigInt::from(d);
        QuadReal::new(
            &self.p * &rhs.p + &self.q * &rhs.q * dd,
            &self.p * &rhs.q + &self.q * &rhs.p,
            d,
            &self.r * &rhs.r,
        )
    }
}

impl std::ops::Div for &QuadReal {
    type Output = QuadReal;
    fn div(self, rhs: &QuadReal) -> QuadReal {
        self * &rhs.recip()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for QuadReal {
            type Output = QuadReal;
            fn $m(self, rhs: QuadReal) -> QuadReal {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qr(p: i64, q: i64, d: u64, r: i64) -> QuadReal {
        QuadReal::new(p.into(), q.into(), d, r.into())
    }

    fn phi() -> QuadReal {
        qr(1, 1, 5, 2)
    }

    /// Decimal oracle: `⌊x·10^digits⌋` computed from `p·10^s + ⌊q·√d·10^s⌋`
    /// through `num_integer::Roots`, independent of `QuadReal::floor`.
    fn decimal_oracle(p: i64, q: i64, d: u64, r: i64, digits: u32) -> BigInt {
        use num_integer::Roots;
        let scale = BigInt::from(10u8).pow(digits);
        let radicand = BigInt::from(q) * BigInt::from(q) * BigInt::from(d) * &scale * &scale;
        let mut root = Roots::sqrt(&radicand);
        if q < 0 {
            let exact = &root * &root == radicand;
            root = -root - if exact { 0 } else { 1 };
        }
        (BigInt::from(p) * &scale + root).div_floor(&BigInt::from(r))
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(qr(2, 2, 5, 4), phi());
        assert_eq!(qr(1, 1, 4, 1), QuadReal::from(3));
        let x = qr(0, 3, 8, 3);
        assert_eq!((x.p().clone(), x.q().clone(), x.radicand(), x.r().clone()),
                   (0.into(), 2.into(), 2, 1.into()));
        // 3√8/3 against 2√2 at 100 digits.
        assert_eq!(decimal_oracle(0, 3, 8, 3, 100), decimal_oracle(0, 2, 2, 1, 100));
        assert_eq!(qr(1, 1, 5, -2), qr(-1, -1, 5, 2));
        assert_eq!(qr(0, 0, 7, 5), QuadReal::zero());
        assert_eq!(qr(3, 0, 7, 6).to_spec(), "1/2");
    }

    #[test]
    fn compare_examples() {
        assert_eq!(QuadReal::sqrt_of(2).compare(&qr(3, 0, 0, 2)), Ordering::Less);
        assert_eq!(phi().compare(&phi()), Ordering::Equal);
        // (3+√5)/2 vs 13/5: 5(3+√5) vs 26 ⇔ 5√5 vs 11 ⇔ 125 vs 121.
        assert_eq!(qr(3, 1, 5, 2).compare(&qr(13, 0, 0, 5)), Ordering::Greater);
        assert_eq!(125.cmp(&121), Ordering::Greater);
    }

    #[test]
    fn mixed_radicands() {
        // √2 + √3 ≈ 3.146 vs √10 ≈ 3.162
        let s = &QuadReal::sqrt_of(2) + &QuadReal::sqrt_of(2);
        assert_eq!(s.compare(&QuadReal::sqrt_of(8)), Ordering::Equal);
        assert_eq!(QuadReal::sqrt_of(3).compare(&QuadReal::sqrt_of(2)), Ordering::Greater);
        assert_eq!(phi().compare(&QuadReal::sqrt_of(3)), Ordering::Less);
        assert_eq!(qr(-1, 1, 5, 2).compare(&qr(1, -1, 3, 1)), Ordering::Greater);
    }

    #[test]
    fn floor_ceil_fract() {
        assert_eq!(phi().scale(&5.into()).floor(), 8.into());
        assert_eq!(phi().ceil(), 2.into());
        assert_eq!(phi().scale(&7.into()).ceil(), 12.into());
        assert_eq!(phi().fract(), qr(-1, 1, 5, 2));
        assert_eq!(phi().scale(&3.into()).fract(), qr(-5, 3, 5, 2));
        assert_eq!((-phi()).floor(), (-2).into());
        assert_eq!((-phi()).fract(), qr(3, -1, 5, 2));
        assert_eq!(QuadReal::from(-3).fract(), QuadReal::zero());
    }

    #[test]
    fn field_ops() {
        let p = phi();
        assert_eq!(&(&p * &p) - &p, QuadReal::one());
        assert_eq!(p.recip(), &p - &QuadReal::one());
        assert_eq!(p.pow(10), qr(123, 55, 5, 2));
        assert_eq!(&p / &p, QuadReal::one());
        assert_eq!(p.to_decimal(5, false), "1.61803");
        assert_eq!(p.to_decimal(5, true), "1.61804");
        assert_eq!((-p).to_decimal(3, true), "-1.618");
        assert_eq!(qr(1, 0, 0, 20).to_decimal(0, true), "1");
    }

    fn arb_quad() -> impl Strategy<Value = QuadReal> {
        (-50i64..50, -50i64..50, prop::sample::select(vec![0u64, 2, 3, 5, 8, 12]), 1i64..30)
            .prop_map(|(p, q, d, r)| qr(p, q, d, r))
    }

    proptest! {
        #[test]
        fn normalize_idempotent(x in arb_quad()) {
            let again = QuadReal::new(x.p().clone(), x.q().clone(), x.radicand(), x.r().clone());
            prop_assert_eq!(again, x);
        }

        #[test]
        fn floor_matches_decimal_oracle(p in -500i64..500, q in -500i64..500,
                                        d in prop::sample::select(vec![2u64, 3, 5, 6, 7, 13, 37]),
                                        r in 1i64..60) {
            let x = qr(p, q, d, r);
            let oracle = decimal_oracle(p, q, d, r, 0);
            prop_assert_eq!(x.floor(), oracle);
        }

        #[test]
        fn compare_is_total_order(x in arb_quad(), y in arb_quad(), z in arb_quad()) {
            prop_assert_eq!(x.compare(&y), y.compare(&x).reverse());
            if x.compare(&y) != Ordering::Greater && y.compare(&z) != Ordering::Greater {
                prop_assert_ne!(x.compare(&z), Ordering::Greater);
            }
            prop_assert_eq!(x.compare(&y) == Ordering::Equal, x == y);
        }

        #[test]
        fn compare_agrees_with_floats(x in arb_quad(), y in arb_quad()) {
            let (fx, fy) = (x.to_f64(), y.to_f64());
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(x.compare(&y), fx.partial_cmp(&fy).unwrap());
            }
        }

        #[test]
        fn fract_in_unit_interval(x in arb_quad()) {
            let f = x.fract();
            prop_assert!(f >= QuadReal::zero() && f < QuadReal::one());
            prop_assert!((&x - &f).is_integer());
        }
    }
}
