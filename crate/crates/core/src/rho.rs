//! Rigorous enclosures of `c(k) = lim f_n/kⁿ` and `ρ(k) = (k − 1)/k · c(k)`.
//!
//! `f_n/kⁿ` is nondecreasing and each step adds less than `k^{−(n+1)}`, so
//! `c(k) ∈ [f_n/kⁿ, f_n/kⁿ + k^{−n}/(k − 1)]`.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{KValue, QuadReal};
use crate::par::{self, Execution};
use crate::rows::{self, GoldenParams};

pub const DEFAULT_SWEEP_ITERS: u32 = 40;
pub const DEFAULT_DIGITS: u32 = 15;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoEnclosure {
    pub k: KValue,
    pub n_iters: u32,
    pub c_lo: QuadReal,
    pub c_hi: QuadReal,
    pub rho_lo: QuadReal,
    pub rho_hi: QuadReal,
}

impl RhoEnclosure {
    pub fn c_width(&self) -> QuadReal {
        &self.c_hi - &self.c_lo
    }

    pub fn rho_width(&self) -> QuadReal {
        &self.rho_hi - &self.rho_lo
    }

    pub fn contains_rho(&self, rho: &QuadReal) -> bool {
        &self.rho_lo <= rho && rho <= &self.rho_hi
    }

    pub fn strictly_contains_rho(&self, rho: &QuadReal) -> bool {
        &self.rho_lo < rho && rho < &self.rho_hi
    }

    pub fn contains_c(&self, c: &QuadReal) -> bool {
        &self.c_lo <= c && c <= &self.c_hi
    }

    /// Whether both intervals lie inside those of `outer`.
    pub fn nested_in(&self, outer: &RhoEnclosure) -> bool {
        outer.c_lo <= self.c_lo
            && self.c_hi <= outer.c_hi
            && outer.rho_lo <= self.rho_lo
            && self.rho_hi <= outer.rho_hi
    }

    /// `1 ≤ c ≤ k/(k−1)` and `(k−1)/k ≤ ρ ≤ 1` at both endpoints.
    pub fn within_global_bounds(&self) -> Result<bool> {
        let one = QuadReal::one();
        let (k_lo, k_hi) = k_bounds(&self.k)?;
        // k/(k−1) decreases and (k−1)/k increases in k.
        let c_max = &k_lo / &(&k_lo - &one);
        let rho_min = &(&k_hi - &one) / &k_hi;
        let in_c = |x: &QuadReal| &one <= x && x <= &c_max;
        let in_rho = |x: &QuadReal| &rho_min <= x && x <= &one;
        Ok(in_c(&self.c_lo) && in_c(&self.c_hi) && in_rho(&self.rho_lo) && in_rho(&self.rho_hi))
    }

    /// Endpoints as decimals rounded outward.
    pub fn to_json(&self, digits: u32) -> serde_json::Value {
        serde_json::json!({
            "k": self.k.to_string(),
            "n_iters": self.n_iters,
            "c_lo": self.c_lo.to_decimal(digits, false),
            "c_hi": self.c_hi.to_decimal(digits, true),
            "rho_lo": self.rho_lo.to_decimal(digits, false),
            "rho_hi": self.rho_hi.to_decimal(digits, true),
        })
    }
}

/// Rational or field bounds `lo ≤ k ≤ hi` with `lo > 1`.
fn k_bounds(k: &KValue) -> Result<(QuadReal, QuadReal)> {
    match k {
        KValue::Approx(a) => {
            let one = BigRational::one();
            let (lo, hi) = a.resolve(|lo, hi| (lo > &one).then(|| (lo.clone(), hi.clone())))?;
            Ok((QuadReal::from_rational(&lo), QuadReal::from_rational(&hi)))
        }
        _ => {
            let x = k.require_exact()?;
            Ok((x.clone(), x))
        }
    }
}

pub fn enclose_c(k: &KValue, n_iters: u32) -> Result<RhoEnclosure> {
    if n_iters < 1 {
        return Err(Error::InvalidParams("n_iters must be at least 1".into()));
    }
    let f = rows::leftmost_sequence(k, n_iters)?;
    let f_n = QuadReal::from(f[n_iters as usize].clone());
    let one = QuadReal::one();
    let (k_lo, k_hi) = k_bounds(k)?;
    let (c_lo, c_hi, rho_lo, rho_hi) = if k.is_exact() {
        let kn = k_lo.pow(n_iters);
        let c_lo = &f_n / &kn;
        let tail = &kn.recip() / &(&k_lo - &one);
        let c_hi = &c_lo + &tail;
        let factor = &(&k_lo - &one) / &k_lo;
        let rho_lo = &factor * &c_lo;
        let rho_hi = &factor * &c_hi;
        (c_lo, c_hi, rho_lo, rho_hi)
    } else {
        let c_lo = (&f_n / &k_hi.pow(n_iters)).max(one.clone());
        let lo_n = k_lo.pow(n_iters);
        let c_hi = &(&f_n / &lo_n) + &(&lo_n.recip() / &(&k_lo - &one));
        let c_hi = c_hi.min(&k_lo / &(&k_lo - &one));
        let rho_lo = (&(&(&k_lo - &one) / &k_lo) * &c_lo).max(&(&k_hi - &one) / &k_hi);
        let rho_hi = (&(&(&k_hi - &one) / &k_hi) * &c_hi).min(one.clone());
        (c_lo, c_hi, rho_lo, rho_hi)
    };
    Ok(RhoEnclosure { k: k.clone(), n_iters, c_lo, c_hi, rho_lo, rho_hi })
}

/// Exact `ρ(k)` for golden-like `k`: `k/√(a² + 4b)` when `b > 0`,
/// `(k − 1)/√(a² + 4b)` when `b < 0`, and `(a − 1)/a` when `b = 0`.
pub fn closed_rho(params: &GoldenParams) -> Result<QuadReal> {
    params.check_recurrence_range()?;
    let k = params.k_exact();
    let s = params.sqrt_disc();
    Ok(match params.b.cmp(&0) {
        Ordering::Greater => &k / &s,
        Ordering::Less => &(&k - &QuadReal::one()) / &s,
        Ordering::Equal => QuadReal::from_rational(&BigRational::new(
            BigInt::from(params.a - 1),
            BigInt::from(params.a),
        )),
    })
}

/// Exact `c(k) = ρ(k)·k/(k − 1)` for golden-like `k`.
pub fn closed_c(params: &GoldenParams) -> Result<QuadReal> {
    let k = params.k_exact();
    Ok(&(&closed_rho(params)? * &k) / &(&k - &QuadReal::one()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub k: BigRational,
    pub n_iters: u32,
    pub outcome: Result<RhoEnclosure>,
}

/// `num_points` evenly spaced exact rationals from `k_min` to `k_max`.
pub fn sweep_grid(k_min: &BigRational, k_max: &BigRational, num_points: usize) -> Result<Vec<BigRational>> {
    if num_points < 2 {
        return Err(Error::InvalidParams("a sweep needs at least 2 points".into()));
    }
    if k_min <= &BigRational::one() || k_min >= k_max {
        return Err(Error::InvalidParams(format!(
            "sweep needs 1 < k_min < k_max, got {k_min} and {k_max}"
        )));
    }
    let steps = BigRational::from_integer(BigInt::from(num_points - 1));
    let step = (k_max - k_min) / steps;
    Ok((0..num_points)
        .map(|j| k_min + &step * BigRational::from_integer(BigInt::from(j)))
        .collect())
}

pub fn sweep(
    k_min: &BigRational,
    k_max: &BigRational,
    num_points: usize,
    n_iters: u32,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    sweep_with_progress(k_min, k_max, num_points, n_iters, exec, &|_| {})
}

/// Like [`sweep`], calling `progress(done)` after each point. Rows come back
/// sorted by `k` whatever order the points finish in.
pub fn sweep_with_progress(
    k_min: &BigRational,
    k_max: &BigRational,
    num_points: usize,
    n_iters: u32,
    exec: Execution,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<Vec<SweepRow>> {
    let grid = sweep_grid(k_min, k_max, num_points)?;
    let done = AtomicUsize::new(0);
    Ok(par::map(exec, &grid, |k| {
        let outcome = KValue::from_exact(QuadReal::from_rational(k)).and_then(|kv| enclose_c(&kv, n_iters));
        progress(done.fetch_add(1, AtomicOrdering::Relaxed) + 1);
        SweepRow { k: k.clone(), n_iters, outcome }
    }))
}

/// Columns `k_num,k_den,n_iters,c_lo,c_hi,rho_lo,rho_hi,error`; lower
/// endpoints round down and upper endpoints round up.
pub fn sweep_csv(rows: &[SweepRow], digits: u32) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["k_num", "k_den", "n_iters", "c_lo", "c_hi", "rho_lo", "rho_hi", "error"])
        .expect("in-memory write");
    for row in rows {
        let mut rec = vec![row.k.numer().to_string(), row.k.denom().to_string(), row.n_iters.to_string()];
        match &row.outcome {
            Ok(e) => rec.extend([
                e.c_lo.to_decimal(digits, false),
                e.c_hi.to_decimal(digits, true),
                e.rho_lo.to_decimal(digits, false),
                e.rho_hi.to_decimal(digits, true),
                String::new(),
            ]),
            Err(err) => {
                rec.extend(std::iter::repeat(String::new()).take(4));
                rec.push(err.kind().to_string());
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSide {
    pub side: &'static str,
    pub epsilon: String,
    pub k: String,
    pub enclosure: serde_json::Value,
    /// Bounds on `c(k ± ε)/c(k)` from the two enclosures.
    pub ratio_lo: String,
    pub ratio_hi: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct JosephusReport {
    pub q: u64,
    pub k: String,
    pub n_iters: u32,
    pub at_point: serde_json::Value,
    pub sides: Vec<ProbeSide>,
}

/// Enclosures of `c` at `k = q/(q − 1)` and at `k ± ε` for each `ε`.
pub fn josephus_probe(
    q: u64,
    epsilons: &[BigRational],
    n_iters: u32,
    digits: u32,
    exec: Execution,
) -> Result<JosephusReport> {
    if q < 2 {
        return Err(Error::InvalidParams(format!("q = {q} must be at least 2")));
    }
    let k0 = BigRational::new(BigInt::from(q), BigInt::from(q - 1));
    for eps in epsilons {
        if !eps.is_positive() || &k0 - eps <= BigRational::one() {
            return Err(Error::InvalidParams(format!(
                "epsilon {eps} must be positive with {k0} - epsilon > 1"
            )));
        }
    }
    let at_point = enclose_c(&KValue::Rational(k0.clone()), n_iters)?;
    let mut jobs = Vec::new();
    for eps in epsilons {
        jobs.push(("left", eps.clone(), &k0 - eps));
        jobs.push(("right", eps.clone(), &k0 + eps));
    }
    let sides = par::try_map(exec, &jobs, |(side, eps, k)| {
        let e = enclose_c(&KValue::Rational(k.clone()), n_iters)?;
        let ratio_lo = &e.c_lo / &at_point.c_hi;
        let ratio_hi = &e.c_hi / &at_point.c_lo;
        Ok::<_, Error>(ProbeSide {
            side,
            epsilon: eps.to_string(),
            k: k.to_string(),
            enclosure: e.to_json(digits),
            ratio_lo: ratio_lo.to_decimal(digits, false),
            ratio_hi: ratio_hi.to_decimal(digits, true),
        })
    })?;
    Ok(JosephusReport {
        q,
        k: k0.to_string(),
        n_iters,
        at_point: at_point.to_json(digits),
        sides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(s: &str) -> KValue {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn gp(a: i64, b: i64) -> GoldenParams {
        GoldenParams::new(a, b).unwrap()
    }

    #[test]
    fn integer_k_is_tight() {
        let e = enclose_c(&k("2"), 10).unwrap();
        assert_eq!(e.c_lo, QuadReal::one());
        assert_eq!(e.c_width(), QuadReal::from_rational(&rat(1, 1024)));
        assert!(!e.c_width().is_zero());
    }

    #[test]
    fn phi_contains_closed_c() {
        let p = gp(1, 1);
        let e = enclose_c(&p.k(), 50).unwrap();
        let c = closed_c(&p).unwrap();
        assert!(e.contains_c(&c));
        assert!(e.strictly_contains_rho(&closed_rho(&p).unwrap()));
        assert_eq!(c.to_decimal(4, false), "1.8944");
        // φ³/√5
        let phi = p.k_exact();
        assert_eq!(c, &phi.pow(3) / &QuadReal::sqrt_of(5));
    }

    #[test]
    fn closed_rho_examples() {
        assert_eq!(closed_rho(&gp(1, 1)).unwrap(), QuadReal::new(5.into(), 1.into(), 5, 10.into()));
        assert_eq!(closed_rho(&gp(3, 0)).unwrap(), QuadReal::from_rational(&rat(2, 3)));
        assert_eq!(closed_rho(&gp(3, -1)).unwrap(), closed_rho(&gp(1, 1)).unwrap());
        assert_eq!(closed_rho(&gp(1, 1)).unwrap().to_decimal(4, false), "0.7236");
        assert!(closed_rho(&gp(1, 2)).is_err());
    }

    #[test]
    fn width_is_exact_tail() {
        for (spec, n) in [("3/2", 30u32), ("5/3", 12), ("7/4", 20)] {
            let kv = k(spec);
            let kk = kv.exact().unwrap();
            let e = enclose_c(&kv, n).unwrap();
            let tail = &kk.pow(n).recip() / &(&kk - &QuadReal::one());
            assert_eq!(e.c_width(), tail);
        }
    }

    #[test]
    fn nesting_and_bounds() {
        for spec in ["3/2", "golden:1,1", "quad:(0,1,2,1)", "11/10", "9", "pi", "e"] {
            let kv = k(spec);
            let mut prev = enclose_c(&kv, 1).unwrap();
            for n in 2..40 {
                let e = enclose_c(&kv, n).unwrap();
                assert!(e.nested_in(&prev), "{spec} n={n}");
                assert!(e.within_global_bounds().unwrap(), "{spec} n={n}");
                prev = e;
            }
        }
    }

    #[test]
    fn closed_rho_inside_every_enclosure() {
        for p in GoldenParams::recurrence_grid(1..=4) {
            let rho = closed_rho(&p).unwrap();
            for n in 1..30 {
                assert!(enclose_c(&p.k(), n).unwrap().contains_rho(&rho), "{p:?} n={n}");
            }
        }
    }

    #[test]
    fn approx_decimal_enclosure_is_sound() {
        // 1.5 ± 0.05 with the exact 3/2 interval inside.
        let wide = enclose_c(&k("1.5"), 6);
        assert!(matches!(wide, Err(Error::PrecisionExhausted { .. })));
        let e = enclose_c(&k("1.37"), 4).unwrap();
        let exact = enclose_c(&k("137/100"), 4).unwrap();
        assert!(e.c_lo <= exact.c_lo && exact.c_hi <= e.c_hi);
    }

    #[test]
    fn sweep_basic() {
        let rows = sweep(&rat(14, 10), &rat(17, 10), 3, 30, Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].k, rat(155, 100));
        let mid30 = rows[1].outcome.clone().unwrap();
        let mid20 = enclose_c(&KValue::Rational(rat(155, 100)), 20).unwrap();
        assert!(mid30.nested_in(&mid20));
        assert!(sweep(&rat(2, 1), &rat(2, 1), 3, 5, Execution::Sequential).is_err());
        assert!(sweep(&rat(1, 1), &rat(2, 1), 3, 5, Execution::Sequential).is_err());
        assert!(sweep(&rat(3, 2), &rat(2, 1), 1, 5, Execution::Sequential).is_err());
    }

    #[test]
    fn sweep_integer_points_contain_closed_rho() {
        let rows = sweep(&rat(2, 1), &rat(9, 1), 8, 40, Execution::Parallel).unwrap();
        for row in rows {
            let e = row.outcome.unwrap();
            let kk = QuadReal::from_rational(&row.k);
            assert!(kk.is_integer());
            let rho = &(&kk - &QuadReal::one()) / &kk;
            assert!(e.contains_rho(&rho));
        }
    }

    #[test]
    fn sweep_parallel_matches_sequential() {
        let a = sweep(&rat(11, 10), &rat(9, 1), 50, 20, Execution::Parallel).unwrap();
        let b = sweep(&rat(11, 10), &rat(9, 1), 50, 20, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(sweep_csv(&a, 15), sweep_csv(&b, 15));
    }

    #[test]
    fn sweep_csv_format() {
        let rows = sweep(&rat(19, 10), &rat(21, 10), 3, 5, Execution::Sequential).unwrap();
        let text = sweep_csv(&rows, 6);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k_num,k_den,n_iters,c_lo,c_hi,rho_lo,rho_hi,error");
        assert_eq!(lines.len(), 4);
        // k = 2: c ∈ [1, 1 + 1/32]
        assert_eq!(lines[2], "2,1,5,1.000000,1.031250,0.500000,0.515625,");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn josephus_examples() {
        let r = josephus_probe(2, &[rat(1, 1000), rat(1, 1_000_000)], 200, 12, Execution::Parallel).unwrap();
        assert_eq!(r.k, "2");
        assert_eq!(r.sides.len(), 4);
        assert!(r.at_point["c_lo"].as_str().unwrap().starts_with("1.000000"));
        let r = josephus_probe(3, &[rat(1, 10_000)], 400, 12, Execution::Sequential).unwrap();
        assert_eq!(r.k, "3/2");
        assert_eq!(r.sides[0].side, "left");
        assert_eq!(r.sides[1].k, "15001/10000");
        assert!(josephus_probe(1, &[rat(1, 10)], 10, 6, Execution::Sequential).is_err());
        assert!(josephus_probe(2, &[rat(1, 1)], 10, 6, Execution::Sequential).is_err());
        assert!(josephus_probe(2, &[rat(-1, 10)], 10, 6, Execution::Sequential).is_err());
    }
}
