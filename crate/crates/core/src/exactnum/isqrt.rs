//! Integer square roots with exact floor semantics.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// `⌊√n⌋` for a machine integer. Newton iteration from an overestimate.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    // f64 gives ~53 good bits; pad so the start is always above the root.
    let guess = (n as f64).sqrt() as u128;
    let mut x = guess.saturating_add(guess >> 20).saturating_add(2);
    x = x.min(u64::MAX as u128);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// `⌊√n⌋` for an arbitrary-precision integer.
///
/// Values that fit in 126 bits take the machine-word path. Larger values run
/// Newton's iteration `x ← (x + n/x)/2` from `2^⌈bits/2⌉`, which is never below
/// the root; the iteration is monotone decreasing until it reaches the floor.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.bits() <= 126 {
        let small = n.to_u128().expect("fits in u128");
        return BigUint::from(isqrt_u128(small));
    }
    let mut x = BigUint::from(1u8) << ((n.bits() + 1) / 2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Returns `Some(√n)` when `n` is a perfect square.
pub fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    if n.is_zero() {
        return Some(BigUint::zero());
    }
    let s = isqrt(n);
    if &s * &s == *n {
        Some(s)
    } else {
        None
    }
}

/// Splits `d` as `s² · core` with `core` squarefree. Returns `(s, core)`.
///
/// Plain trial division; radicands in this crate are small.
pub fn squarefree_split(d: u64) -> (u64, u64) {
    if d == 0 {
        return (1, 0);
    }
    let mut rem = d;
    let mut square = 1u64;
    let mut core = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rem {
        let mut e = 0u32;
        while rem % p == 0 {
            rem /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (square, core * rem)
}
