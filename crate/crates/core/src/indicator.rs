//! Count indicators `{n·k}` and what they predict.
//!
//! The fractional part `{n·k}` alone decides `h(n)`: nodes whose indicator
//! lies in the floor-range `(0, 1 − {k}]` have `⌊k⌋` children, all others
//! (including indicator `0`) have `⌈k⌉`.
//!
//! For `k² = ak + b` the indicator of the `i`-th child of a node with
//! indicator `x` is `{(i − x)·b/k}`, independent of the node itself. Those
//! functions of `x` are the lines of the child-count indicator graph. On the
//! graph the ranges are the open-at-zero pair `(0, 1 − {k}]` and
//! `(1 − {k}, 1)`: a line sitting at `0` belongs to neither, and the last
//! line is only defined for `x` in the upper range.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{KValue, QuadReal};
use crate::par::{self, Execution};
use crate::rows::GoldenParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeClass {
    Floor,
    Ceil,
}

impl fmt::Display for RangeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangeClass::Floor => "floor",
            RangeClass::Ceil => "ceil",
        })
    }
}

/// `1 − {k}`, the upper end of the floor-range.
fn floor_range_end(k: &QuadReal) -> QuadReal {
    &QuadReal::one() - &k.fract()
}

fn check_unit(x: &QuadReal) -> Result<()> {
    if x.signum() == Ordering::Less || x.compare(&QuadReal::one()) != Ordering::Less {
        return Err(Error::InvalidParams(format!("indicator {x} is outside [0, 1)")));
    }
    Ok(())
}

/// `{n·k}` for `n ≥ 1`.
pub fn count_indicator(n: &BigInt, k: &KValue) -> Result<QuadReal> {
    k.frac_scaled(n)
}

/// Which child count an indicator predicts: `Floor` iff `0 < x ≤ 1 − {k}`.
pub fn classify(x: &QuadReal, k: &KValue) -> Result<RangeClass> {
    check_unit(x)?;
    let k = k.require_exact()?;
    Ok(classify_exact(x, &k))
}

fn classify_exact(x: &QuadReal, k: &QuadReal) -> RangeClass {
    if x.signum() == Ordering::Greater && x.compare(&floor_range_end(k)) != Ordering::Greater {
        RangeClass::Floor
    } else {
        RangeClass::Ceil
    }
}

/// Range of a point on the indicator graph; `None` at exactly `0`.
pub fn graph_class(y: &QuadReal, k: &QuadReal) -> Option<RangeClass> {
    if y.signum() != Ordering::Greater {
        return None;
    }
    Some(if y.compare(&floor_range_end(k)) == Ordering::Greater {
        RangeClass::Ceil
    } else {
        RangeClass::Floor
    })
}

/// One line `x ↦ {(i − x)·b/k}` of the child-count indicator graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorLine {
    pub index: u64,
    /// `b/k`, which equals `k − a`.
    slope_factor: QuadReal,
    /// Lower (exclusive) end of the domain for the last line when `k ∉ ℤ`.
    domain_start: Option<QuadReal>,
}

impl IndicatorLine {
    pub fn is_restricted(&self) -> bool {
        self.domain_start.is_some()
    }

    pub fn defined_at(&self, x: &QuadReal) -> bool {
        match &self.domain_start {
            Some(start) => x.compare(start) == Ordering::Greater,
            None => true,
        }
    }

    /// Value at `x`, or `None` outside the line's domain.
    pub fn eval(&self, x: &QuadReal) -> Option<QuadReal> {
        self.defined_at(x).then(|| {
            let shift = &QuadReal::from(self.index as i64) - x;
            (&shift * &self.slope_factor).fract()
        })
    }
}

fn same_field(x: &QuadReal, k: &QuadReal) -> Result<()> {
    x.common_radicand(k).map(|_| ()).ok_or_else(|| {
        Error::InvalidParams(format!("indicator {x} is not in the field of k = {k}"))
    })
}

/// The `⌈k⌉` lines of the indicator graph; the last one is restricted to
/// `(1 − {k}, 1)` when `k` is not an integer.
pub fn cci_lines(params: &GoldenParams) -> Result<Vec<IndicatorLine>> {
    let k = params.k_exact();
    let slope_factor = &k - &QuadReal::from(params.a);
    let ceil = k.ceil().to_u64().expect("small k");
    let restricted = !k.is_integer();
    Ok((1..=ceil)
        .map(|index| IndicatorLine {
            index,
            slope_factor: slope_factor.clone(),
            domain_start: (restricted && index == ceil).then(|| floor_range_end(&k)),
        })
        .collect())
}

/// Indicator of the `i`-th smallest child of any node with indicator `x`.
pub fn child_indicator(i: u64, x: &QuadReal, params: &GoldenParams) -> Result<QuadReal> {
    check_unit(x)?;
    let k = params.k_exact();
    same_field(x, &k)?;
    let lines = cci_lines(params)?;
    let line = lines
        .get((i as usize).wrapping_sub(1))
        .ok_or_else(|| Error::InvalidParams(format!("child index {i} outside 1..={}", lines.len())))?;
    line.eval(x).ok_or(Error::ChildAbsent { index: i })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CciSample {
    pub x: QuadReal,
    pub index: u64,
    pub value: QuadReal,
    pub class: Option<RangeClass>,
}

/// Lines sampled at `x = j/resolution`, `j = 0..resolution`.
pub fn cci_samples(params: &GoldenParams, resolution: u64, exec: Execution) -> Result<Vec<CciSample>> {
    if resolution == 0 {
        return Err(Error::InvalidParams("resolution must be positive".into()));
    }
    let k = params.k_exact();
    let lines = cci_lines(params)?;
    let grid = sample_grid(resolution);
    let per_x = par::map(exec, &grid, |x| {
        lines
            .iter()
            .filter_map(|line| {
                line.eval(x).map(|value| CciSample {
                    x: x.clone(),
                    index: line.index,
                    class: graph_class(&value, &k),
                    value,
                })
            })
            .collect::<Vec<_>>()
    });
    Ok(per_x.into_iter().flatten().collect())
}

/// `j/n` for `j = 0..n`.
pub fn sample_grid(n: u64) -> Vec<QuadReal> {
    (0..n)
        .map(|j| QuadReal::from_rational(&BigRational::new(j.into(), n.into())))
        .collect()
}

/// Rationals within `10^-digits` on either side of `1 − {k}`, plus points
/// just above 0 and just below 1.
pub fn boundary_probes(params: &GoldenParams, digits: u32) -> Vec<QuadReal> {
    let end = floor_range_end(&params.k_exact());
    let unit = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(digits));
    let scale = BigInt::from(10u8).pow(digits);
    let below = BigRational::new(end.scale(&scale).floor(), scale.clone());
    let above = &below + &unit;
    let mut probes = vec![
        QuadReal::from_rational(&unit),
        QuadReal::from_rational(&(BigRational::one() - &unit)),
    ];
    for p in [below, above] {
        let q = QuadReal::from_rational(&p);
        if q.signum() == Ordering::Greater && q < QuadReal::one() {
            probes.push(q);
        }
    }
    probes
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrandparentReport {
    pub a: i64,
    pub b: i64,
    /// `ceil` when `b ≥ 0`, `floor` when `b < 0`.
    pub target: RangeClass,
    pub expected: u64,
    pub counts: Vec<u64>,
    /// Sample indices whose count differs from `expected`.
    pub failures: Vec<usize>,
    pub verdict: bool,
}

/// For each sample `x`, the number of existing child lines landing in the
/// ceil-range (`b ≥ 0`) or floor-range (`b < 0`). The verdict holds when
/// every count equals `|b|`.
pub fn grandparent_count(
    params: &GoldenParams,
    samples: &[QuadReal],
    exec: Execution,
) -> Result<GrandparentReport> {
    params.check_grandparent_range()?;
    for x in samples {
        check_unit(x)?;
    }
    let k = params.k_exact();
    let lines = cci_lines(params)?;
    let target = if params.b >= 0 { RangeClass::Ceil } else { RangeClass::Floor };
    let counts = par::map(exec, samples, |x| {
        lines
            .iter()
            .filter_map(|line| line.eval(x))
            .filter(|y| graph_class(y, &k) == Some(target))
            .count() as u64
    });
    let expected = params.b.unsigned_abs();
    let failures: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != expected)
        .map(|(i, _)| i)
        .collect();
    Ok(GrandparentReport {
        a: params.a,
        b: params.b,
        target,
        expected,
        verdict: failures.is_empty(),
        counts,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScatterPoint {
    pub n: BigInt,
    pub x: QuadReal,
    pub child_x: QuadReal,
}

/// `({n·k}, {c₁·k})` for `n = 1..=n_max`, where `c₁ = ⌈n·k⌉` is the first child.
pub fn indicator_scatter(k: &KValue, n_max: u64, exec: Execution) -> Result<Vec<ScatterPoint>> {
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    k.require_exact()?;
    let ns: Vec<u64> = (1..=n_max).collect();
    par::try_map(exec, &ns, |&n| {
        let n = BigInt::from(n);
        let first = k.ceil_scaled(&n)?;
        Ok(ScatterPoint { x: count_indicator(&n, k)?, child_x: count_indicator(&first, k)?, n })
    })
}

fn class_label(c: Option<RangeClass>) -> String {
    c.map_or_else(|| "none".to_string(), |c| c.to_string())
}

/// CSV with columns `x,i,f_i(x),range_class`.
pub fn cci_csv(samples: &[CciSample], digits: u32) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["x", "i", "f_i(x)", "range_class"]).expect("in-memory write");
    for s in samples {
        w.write_record([
            s.x.to_decimal(digits, false),
            s.index.to_string(),
            s.value.to_decimal(digits, false),
            class_label(s.class),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// CSV with columns `n,x,i,f_i(x),range_class` for the first child of each node.
pub fn scatter_csv(points: &[ScatterPoint], k: &KValue, digits: u32) -> Result<String> {
    let kk = k.require_exact()?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["n", "x", "i", "f_i(x)", "range_class"]).expect("in-memory write");
    for p in points {
        w.write_record([
            p.n.to_string(),
            p.x.to_decimal(digits, false),
            "1".to_string(),
            p.child_x.to_decimal(digits, false),
            classify_exact(&p.child_x, &kk).to_string(),
        ])
        .expect("in-memory write");
    }
    Ok(String::from_utf8(w.into_inner().expect("flush")).expect("utf8"))
}
