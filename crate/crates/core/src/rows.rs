//! Leftmost nodes `f_i`, row lengths `r_d`, and the linear recurrence for
//! golden-like `k`.
//!
//! Row `d ≥ 1` of the tree is the integer interval `[f_{d−1}, f_d − 1]`, so
//! `r_d = f_d − f_{d−1}` and `Σ_{d≤D} r_d = f_D`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{KValue, QuadReal};
use crate::par::{self, Execution};
use crate::tree::{self, SliceOptions};

pub(crate) fn ser_big<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    tree::json_int(n).serialize(s)
}

pub(crate) fn ser_big_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    serde_json::Value::Array(v.iter().map(tree::json_int).collect()).serialize(s)
}

fn ser_big_pair<S: Serializer>(v: &(BigInt, BigInt), s: S) -> Result<S::Ok, S::Error> {
    serde_json::Value::Array(vec![tree::json_int(&v.0), tree::json_int(&v.1)]).serialize(s)
}

/// Integers `a, b` with `k = (a + √(a² + 4b))/2`, so that `k² = ak + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GoldenParams {
    pub a: i64,
    pub b: i64,
}

impl GoldenParams {
    /// Requires `a ≥ 1`, a real root, and `k > 1`. Individual operations
    /// check their own range of `b` on top of this.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a < 1 {
            return Err(Error::InvalidParams(format!("a = {a} must be at least 1")));
        }
        let disc = a as i128 * a as i128 + 4 * b as i128;
        if disc < 0 {
            return Err(Error::InvalidParams(format!(
                "a² + 4b = {disc} is negative for (a, b) = ({a}, {b})"
            )));
        }
        if disc > u64::MAX as i128 {
            return Err(Error::InvalidParams(format!("a² + 4b = {disc} is too large")));
        }
        let params = GoldenParams { a, b };
        if params.k_exact().compare(&QuadReal::one()) != Ordering::Greater {
            return Err(Error::InvalidParams(format!(
                "(a, b) = ({a}, {b}) gives k = {} which is not above 1",
                params.k_exact()
            )));
        }
        Ok(params)
    }

    pub fn discriminant(&self) -> u64 {
        (self.a as i128 * self.a as i128 + 4 * self.b as i128) as u64
    }

    pub fn k_exact(&self) -> QuadReal {
        QuadReal::new(self.a.into(), BigInt::one(), self.discriminant(), 2.into())
    }

    pub fn k(&self) -> KValue {
        KValue::from_exact(self.k_exact()).expect("validated k > 1")
    }

    /// `√(a² + 4b)` as a field element (rational when the discriminant is a square).
    pub fn sqrt_disc(&self) -> QuadReal {
        QuadReal::sqrt_of(self.discriminant())
    }

    /// `1 − a < b < 1 + a`, where the recurrence is claimed.
    pub fn check_recurrence_range(&self) -> Result<()> {
        if 1 - self.a < self.b && self.b < 1 + self.a {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "b = {} is outside 1 - a < b < 1 + a for a = {} (k = {})",
                self.b,
                self.a,
                self.k_exact()
            )))
        }
    }

    /// `1 − a ≤ b ≤ a − 1`, where the grandparent count is claimed.
    pub fn check_grandparent_range(&self) -> Result<()> {
        if 1 - self.a <= self.b && self.b <= self.a - 1 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "b = {} is outside 1 - a <= b <= a - 1 for a = {}",
                self.b, self.a
            )))
        }
    }

    /// Every `(a, b)` with `a` in `a_range` and `b` in the recurrence range.
    pub fn recurrence_grid(a_range: std::ops::RangeInclusive<i64>) -> Vec<GoldenParams> {
        a_range
            .flat_map(|a| (2 - a..=a).map(move |b| GoldenParams { a, b }))
            .collect()
    }

    /// Every `(a, b)` with `a` in `a_range` and `b` in the grandparent range,
    /// including pairs that do not give `k > 1`.
    pub fn grandparent_grid(a_range: std::ops::RangeInclusive<i64>) -> Vec<(i64, i64)> {
        a_range.flat_map(|a| (1 - a..=a - 1).map(move |b| (a, b))).collect()
    }
}

/// `[f_0, ..., f_depth]` with `f_0 = 1` and `f_{i+1} = ⌈k·f_i⌉`.
pub fn leftmost_sequence(k: &KValue, depth: u32) -> Result<Vec<BigInt>> {
    let mut f = Vec::with_capacity(depth as usize + 1);
    f.push(BigInt::one());
    for i in 0..depth as usize {
        let next = k.ceil_scaled(&f[i])?;
        f.push(next);
    }
    Ok(f)
}

fn difference(f: &[BigInt]) -> Vec<BigInt> {
    std::iter::once(BigInt::one())
        .chain(f.windows(2).map(|w| &w[1] - &w[0]))
        .collect()
}

/// `[r_0, ..., r_depth]` with `r_0 = 1` and `r_d = f_d − f_{d−1}`.
pub fn row_lengths(k: &KValue, depth: u32) -> Result<Vec<BigInt>> {
    Ok(difference(&leftmost_sequence(k, depth)?))
}

/// Row lengths by breadth-first expansion of children ranges.
pub fn brute_force_row_lengths(k: &KValue, depth: u32) -> Result<Vec<BigInt>> {
    brute_force_row_lengths_with(k, depth, SliceOptions::default())
}

pub fn brute_force_row_lengths_with(
    k: &KValue,
    depth: u32,
    opts: SliceOptions,
) -> Result<Vec<BigInt>> {
    let slice = tree::build_slice_with(k, depth, opts)?;
    Ok(slice.row_lengths().into_iter().map(BigInt::from).collect())
}

/// Largest depth `D` whose slice has at most `limit` nodes, i.e. `f_D ≤ limit`.
pub fn max_depth_within(k: &KValue, limit: u64) -> Result<u32> {
    let limit = BigInt::from(limit);
    let mut f = BigInt::one();
    let mut d = 0;
    loop {
        let next = k.ceil_scaled(&f)?;
        if next > limit {
            return Ok(d);
        }
        f = next;
        d += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTable {
    pub k: KValue,
    pub f: Vec<BigInt>,
    pub r: Vec<BigInt>,
}

impl RowTable {
    pub fn build(k: &KValue, depth: u32) -> Result<Self> {
        let f = leftmost_sequence(k, depth)?;
        let r = difference(&f);
        Ok(RowTable { k: k.clone(), f, r })
    }

    /// Columns `d,f_d,r_d`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(vec![]);
        w.write_record(["d", "f_d", "r_d"]).expect("in-memory write");
        for (d, (f, r)) in self.f.iter().zip(&self.r).enumerate() {
            w.write_record([d.to_string(), f.to_string(), r.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k.to_string(),
            "f": self.f.iter().map(tree::json_int).collect::<Vec<_>>(),
            "r": self.r.iter().map(tree::json_int).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecurrenceReport {
    pub a: i64,
    pub b: i64,
    pub k: String,
    pub depth: u32,
    /// `(r_0, r_1)` from enumeration.
    #[serde(serialize_with = "ser_big_pair")]
    pub base: (BigInt, BigInt),
    /// `(1, ⌈k⌉ − 1)`.
    #[serde(serialize_with = "ser_big_pair")]
    pub expected_base: (BigInt, BigInt),
    pub base_ok: bool,
    /// First `d ≥ 2` where `r_d ≠ a·r_{d−1} + b·r_{d−2}`.
    pub first_failure: Option<u32>,
    pub holds: bool,
    #[serde(serialize_with = "ser_big_vec")]
    pub rows: Vec<BigInt>,
}

/// Checks `r_d = a·r_{d−1} + b·r_{d−2}` for `2 ≤ d ≤ depth` and the base
/// `r_0 = 1`, `r_1 = ⌈k⌉ − 1`, with row lengths from exact enumeration.
pub fn verify_recurrence(params: &GoldenParams, depth: u32) -> Result<RecurrenceReport> {
    params.check_recurrence_range()?;
    if depth < 2 {
        return Err(Error::InvalidParams(format!("depth {depth} must be at least 2")));
    }
    let k = params.k();
    let rows = row_lengths(&k, depth)?;
    let (a, b) = (BigInt::from(params.a), BigInt::from(params.b));
    let first_failure = (2..=depth as usize)
        .find(|&d| rows[d] != &a * &rows[d - 1] + &b * &rows[d - 2])
        .map(|d| d as u32);
    let base = (rows[0].clone(), rows[1].clone());
    let expected_base = (BigInt::one(), k.ceil()? - 1);
    let base_ok = base == expected_base;
    Ok(RecurrenceReport {
        a: params.a,
        b: params.b,
        k: k.to_string(),
        depth,
        holds: base_ok && first_failure.is_none(),
        base,
        expected_base,
        base_ok,
        first_failure,
        rows,
    })
}

/// `r_d` from the closed form, evaluated exactly in `ℚ(√(a² + 4b))`.
///
/// With `k₁, k₂ = (a ± √(a² + 4b))/2`:
/// `b > 0`: `(k₁^{d+1} − k₂^{d+1})/√(a² + 4b)`;
/// `b < 0`: `((k₁ − 1)·k₁^d − (k₂ − 1)·k₂^d)/√(a² + 4b)`;
/// `b = 0`: `1` at `d = 0`, else `a^{d−1}(a − 1)`.
pub fn closed_form_row(params: &GoldenParams, d: u32) -> Result<BigInt> {
    params.check_recurrence_range()?;
    let a = BigInt::from(params.a);
    if params.b == 0 {
        return Ok(if d == 0 { BigInt::one() } else { a.pow(d - 1) * (&a - 1) });
    }
    let s = params.sqrt_disc();
    let half = QuadReal::from_rational(&num_rational::BigRational::new(1.into(), 2.into()));
    let aq = QuadReal::from(a);
    let k1 = &(&aq + &s) * &half;
    let k2 = &(&aq - &s) * &half;
    let numer = if params.b > 0 {
        &k1.pow(d + 1) - &k2.pow(d + 1)
    } else {
        let one = QuadReal::one();
        &(&(&k1 - &one) * &k1.pow(d)) - &(&(&k2 - &one) * &k2.pow(d))
    };
    let value = &numer / &s;
    value.to_integer().ok_or_else(|| {
        Error::NonIntegerResult(format!(
            "(a, b) = ({}, {}), d = {d} gave {value}",
            params.a, params.b
        ))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridEntry {
    pub a: i64,
    pub b: i64,
    pub recurrence_holds: bool,
    pub first_failure: Option<u32>,
    pub base_ok: bool,
    /// First `d` where the closed form disagrees with enumeration.
    pub closed_form_mismatch: Option<u32>,
    pub error: Option<String>,
}

impl GridEntry {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.recurrence_holds && self.closed_form_mismatch.is_none()
    }
}

fn grid_entry(params: &GoldenParams, depth: u32) -> Result<GridEntry> {
    let report = verify_recurrence(params, depth)?;
    let mut closed_form_mismatch = None;
    for (d, r) in report.rows.iter().enumerate() {
        if &closed_form_row(params, d as u32)? != r {
            closed_form_mismatch = Some(d as u32);
            break;
        }
    }
    Ok(GridEntry {
        a: params.a,
        b: params.b,
        recurrence_holds: report.holds,
        first_failure: report.first_failure,
        base_ok: report.base_ok,
        closed_form_mismatch,
        error: None,
    })
}

/// Recurrence and closed-form checks over many parameter pairs.
pub fn verify_grid(grid: &[GoldenParams], depth: u32, exec: Execution) -> Vec<GridEntry> {
    par::map(exec, grid, |p| {
        grid_entry(p, depth).unwrap_or_else(|e| GridEntry {
            a: p.a,
            b: p.b,
            recurrence_holds: false,
            first_failure: None,
            base_ok: false,
            closed_form_mismatch: None,
            error: Some(e.to_string()),
        })
    })
}

/// `f_i / k^i` for `i = 0..=depth`, exact.
pub fn leftmost_ratios(k: &KValue, depth: u32) -> Result<Vec<QuadReal>> {
    let kk = k.require_exact()?;
    let f = leftmost_sequence(k, depth)?;
    let mut power = QuadReal::one();
    let mut out = Vec::with_capacity(f.len());
    for fi in &f {
        out.push(&QuadReal::from(fi.clone()) / &power);
        power = &power * &kk;
    }
    Ok(out)
}

/// Sum of `r_0..=r_D`, which must equal `f_D`.
pub fn total_nodes(r: &[BigInt]) -> BigInt {
    r.iter().fold(BigInt::zero(), |acc, x| acc + x)
}

/// `r_d` as `u64`, for callers that know the values are small.
pub fn to_u64s(v: &[BigInt]) -> Option<Vec<u64>> {
    v.iter().map(ToPrimitive::to_u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::big;

    fn k(s: &str) -> KValue {
        s.parse().unwrap()
    }

    fn bigs(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| big(x)).collect()
    }

    #[test]
    fn leftmost_examples() {
        assert_eq!(leftmost_sequence(&k("golden:1,1"), 5).unwrap(), bigs(&[1, 2, 4, 7, 12, 20]));
        assert_eq!(leftmost_sequence(&k("3"), 3).unwrap(), bigs(&[1, 3, 9, 27]));
        assert_eq!(
            leftmost_sequence(&k("3/2"), 7).unwrap(),
            bigs(&[1, 2, 3, 5, 8, 12, 18, 27])
        );
        assert_eq!(leftmost_sequence(&k("pi"), 3).unwrap(), bigs(&[1, 4, 13, 41]));
    }

    #[test]
    fn row_examples() {
        assert_eq!(row_lengths(&k("golden:1,1"), 5).unwrap(), bigs(&[1, 1, 2, 3, 5, 8]));
        assert_eq!(row_lengths(&k("3"), 3).unwrap(), bigs(&[1, 2, 6, 18]));
        assert_eq!(row_lengths(&k("3/2"), 7).unwrap(), bigs(&[1, 1, 1, 2, 3, 4, 6, 9]));
        assert_eq!(row_lengths(&k("3"), 0).unwrap(), bigs(&[1]));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_row_lengths(&k("golden:1,1"), 5).unwrap(), bigs(&[1, 1, 2, 3, 5, 8]));
        assert_eq!(brute_force_row_lengths(&k("3"), 2).unwrap(), bigs(&[1, 2, 6]));
        let kk = k("golden:3,-1");
        assert_eq!(brute_force_row_lengths(&kk, 4).unwrap(), row_lengths(&kk, 4).unwrap());
        let opts = SliceOptions { node_limit: 100, exec: Execution::Sequential };
        assert_eq!(
            brute_force_row_lengths_with(&k("3"), 5, opts),
            Err(Error::SizeLimit { limit: 100 })
        );
    }

    #[test]
    fn max_depth_examples() {
        assert_eq!(max_depth_within(&k("3"), 27).unwrap(), 3);
        assert_eq!(max_depth_within(&k("3"), 26).unwrap(), 2);
        assert_eq!(max_depth_within(&k("golden:1,1"), 20).unwrap(), 5);
    }

    #[test]
    fn params_validation() {
        assert!(GoldenParams::new(0, 1).is_err());
        assert!(GoldenParams::new(1, -1).is_err());
        assert!(GoldenParams::new(2, -1).is_err()); // k = 1
        assert!(GoldenParams::new(1, 0).is_err());
        assert!(GoldenParams::new(1, 2).unwrap().check_recurrence_range().is_err());
        assert!(GoldenParams::new(4, -3).unwrap().check_grandparent_range().is_ok());
        assert!(GoldenParams::new(4, -3).unwrap().check_recurrence_range().is_err());
        assert_eq!(GoldenParams::new(1, 1).unwrap().k(), k("golden:1,1"));
        assert_eq!(GoldenParams::new(3, 0).unwrap().k(), k("3"));
    }

    #[test]
    fn grids() {
        let g = GoldenParams::recurrence_grid(1..=3);
        let pairs: Vec<(i64, i64)> = g.iter().map(|p| (p.a, p.b)).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 0), (2, 1), (2, 2), (3, -1), (3, 0), (3, 1), (3, 2), (3, 3)]);
        assert!(g.iter().all(|p| GoldenParams::new(p.a, p.b).is_ok()));
        assert_eq!(GoldenParams::grandparent_grid(1..=2), vec![(1, 0), (2, -1), (2, 0), (2, 1)]);
    }

    #[test]
    fn recurrence_examples() {
        let r = verify_recurrence(&GoldenParams::new(1, 1).unwrap(), 30).unwrap();
        assert!(r.holds);
        assert_eq!(r.base, (big(1), big(1)));
        let r = verify_recurrence(&GoldenParams::new(3, -1).unwrap(), 25).unwrap();
        assert!(r.holds);
        assert_eq!(r.base, (big(1), big(2)));
        let r = verify_recurrence(&GoldenParams::new(2, 0).unwrap(), 25).unwrap();
        assert!(r.holds);
        assert_eq!(r.base, (big(1), big(1)));
        assert!(verify_recurrence(&GoldenParams::new(1, 2).unwrap(), 25).is_err());
        assert!(verify_recurrence(&GoldenParams::new(1, 1).unwrap(), 1).is_err());
    }

    #[test]
    fn recurrence_report_json() {
        let r = verify_recurrence(&GoldenParams::new(1, 1).unwrap(), 4).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["base"].to_string(), "[1,1]");
        assert_eq!(v["rows"].to_string(), "[1,1,2,3,5]");
        assert_eq!(v["first_failure"], serde_json::Value::Null);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_row(&GoldenParams::new(1, 1).unwrap(), 5).unwrap(), big(8));
        assert_eq!(closed_form_row(&GoldenParams::new(3, 0).unwrap(), 4).unwrap(), big(54));
        assert_eq!(closed_form_row(&GoldenParams::new(3, 0).unwrap(), 0).unwrap(), big(1));
        let p = GoldenParams::new(3, -1).unwrap();
        let rows = row_lengths(&p.k(), 20).unwrap();
        for (d, r) in rows.iter().enumerate() {
            assert_eq!(&closed_form_row(&p, d as u32).unwrap(), r);
        }
    }

    #[test]
    fn closed_form_at_b_equal_a() {
        let p = GoldenParams::new(5, 5).unwrap();
        let rows = row_lengths(&p.k(), 12).unwrap();
        for (d, r) in rows.iter().enumerate() {
            assert_eq!(&closed_form_row(&p, d as u32).unwrap(), r);
        }
        assert!(closed_form_row(&GoldenParams::new(5, 6).unwrap(), 3).is_err());
    }

    #[test]
    fn grid_to_depth_25() {
        let grid = GoldenParams::recurrence_grid(1..=7);
        for e in verify_grid(&grid, 25, Execution::Parallel) {
            assert!(e.passed(), "{e:?}");
        }
    }

    #[test]
    fn ratios_monotone_and_bounded() {
        for spec in ["3/2", "5/3", "golden:1,1", "quad:(0,1,2,1)", "golden:3,-1", "3", "7/4"] {
            let kv = k(spec);
            let kk = kv.exact().unwrap();
            let bound = &kk / &(&kk - &QuadReal::one());
            let ratios = leftmost_ratios(&kv, 40).unwrap();
            for w in ratios.windows(2) {
                assert!(w[0] <= w[1], "{spec}");
            }
            assert!(ratios.iter().all(|x| x <= &bound && x >= &QuadReal::one()), "{spec}");
        }
    }

    #[test]
    fn telescoping() {
        for spec in ["3/2", "golden:1,1", "pi", "e", "golden:5,3"] {
            let f = leftmost_sequence(&k(spec), 30).unwrap();
            let r = row_lengths(&k(spec), 30).unwrap();
            for dd in 0..=30 {
                assert_eq!(total_nodes(&r[..=dd]), f[dd], "{spec}");
            }
            assert!(r.iter().all(|x| x >= &BigInt::one()));
        }
    }

    #[test]
    fn csv_and_json() {
        let t = RowTable::build(&k("golden:1,1"), 3).unwrap();
        assert_eq!(t.to_csv(), "d,f_d,r_d\n0,1,1\n1,2,1\n2,4,2\n3,7,3\n");
        assert_eq!(t.to_json()["f"].to_string(), "[1,2,4,7]");
        assert_eq!(to_u64s(&t.r), Some(vec![1, 1, 2, 3]));
    }
}
