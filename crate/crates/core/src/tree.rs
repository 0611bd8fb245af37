//! The k-descending tree: parents, children, child counts, depths, and
//! breadth-first slices.
//!
//! Trees are never stored as pointer structures. A node's children are the
//! integer range `[⌈n·k⌉, ⌈(n+1)·k⌉ − 1]`, so adjacency is pure arithmetic and
//! a [`TreeSlice`] only keeps the sorted node list of each row.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::KValue;
use crate::indicator;
use crate::par::{self, Execution};

pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;

/// Inclusive integer range of children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChildRange {
    #[serde(serialize_with = "crate::rows::ser_big")]
    pub lo: BigInt,
    #[serde(serialize_with = "crate::rows::ser_big")]
    pub hi: BigInt,
}

impl ChildRange {
    pub fn len(&self) -> BigInt {
        &self.hi - &self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, n: &BigInt) -> bool {
        &self.lo <= n && n <= &self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = BigInt> + '_ {
        let mut next = self.lo.clone();
        std::iter::from_fn(move || {
            (next <= self.hi).then(|| {
                let out = next.clone();
                next += 1;
                out
            })
        })
    }
}

/// `⌊n/k⌋`; the root is its own parent.
pub fn parent(n: &BigInt, k: &KValue) -> Result<BigInt> {
    k.floor_div(n)
}

/// All `c` with `⌊c/k⌋ = n`. For `n = 0` this includes the root itself.
pub fn children(n: &BigInt, k: &KValue) -> Result<ChildRange> {
    let lo = k.ceil_scaled(n)?;
    let hi = k.ceil_scaled(&(n + 1))? - 1;
    Ok(ChildRange { lo, hi })
}

/// `h(n)`, the number of children of `n`.
///
/// Counted from the children range. Debug builds with exact `k` also run the
/// count-indicator classification and require the two to agree.
pub fn child_count(n: &BigInt, k: &KValue) -> Result<u64> {
    let count = children(n, k)?
        .len()
        .to_u64()
        .expect("child count fits in u64");
    if cfg!(debug_assertions) && k.is_exact() {
        let predicted = child_count_by_indicator(n, k)?;
        debug_assert_eq!(count, predicted, "indicator classification disagrees at n = {n}");
    }
    Ok(count)
}

/// `h(n)` from the count indicator `{n·k}` alone: `⌊k⌋` in the floor-range,
/// `⌈k⌉` otherwise. Exact `k` only.
pub fn child_count_by_indicator(n: &BigInt, k: &KValue) -> Result<u64> {
    let x = k.frac_scaled(n)?;
    let count = match indicator::classify(&x, k)? {
        indicator::RangeClass::Floor => k.floor()?,
        indicator::RangeClass::Ceil => k.ceil()?,
    };
    Ok(count.to_u64().expect("child count fits in u64"))
}

/// Number of parent steps from `n` down to the root; `depth(0) = 0`.
pub fn depth(n: &BigInt, k: &KValue) -> Result<u64> {
    let mut node = n.clone();
    let mut steps = 0;
    while !node.is_zero() {
        node = parent(&node, k)?;
        steps += 1;
    }
    Ok(steps)
}

#[derive(Clone, Copy, Debug)]
pub struct SliceOptions {
    pub node_limit: u64,
    pub exec: Execution,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { node_limit: DEFAULT_NODE_LIMIT, exec: Execution::default() }
    }
}

/// Every node of depth at most `max_depth`, row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSlice {
    pub k: KValue,
    pub max_depth: u32,
    pub rows: Vec<Vec<BigInt>>,
}

/// Children ranges of every node in `row`, with the root's self-loop removed.
pub(crate) fn expand_row(
    row: &[BigInt],
    k: &KValue,
    exec: Execution,
) -> Result<Vec<ChildRange>> {
    par::try_map(exec, row, |n| {
        let mut range = children(n, k)?;
        if n.is_zero() {
            range.lo = BigInt::one();
        }
        Ok(range)
    })
}

pub fn build_slice(k: &KValue, max_depth: u32) -> Result<TreeSlice> {
    build_slice_with(k, max_depth, SliceOptions::default())
}

pub fn build_slice_with(k: &KValue, max_depth: u32, opts: SliceOptions) -> Result<TreeSlice> {
    let mut rows = vec![vec![BigInt::zero()]];
    let mut total: u64 = 1;
    for _ in 0..max_depth {
        let ranges = expand_row(rows.last().expect("nonempty"), k, opts.exec)?;
        let added: BigInt = ranges.iter().filter(|r| !r.is_empty()).map(ChildRange::len).sum();
        total = added
            .to_u64()
            .and_then(|a| total.checked_add(a))
            .filter(|&t| t <= opts.node_limit)
            .ok_or(Error::SizeLimit { limit: opts.node_limit })?;
        let pieces = par::map(opts.exec, &ranges, |r| r.iter().collect::<Vec<_>>());
        rows.push(pieces.into_iter().flatten().collect());
    }
    Ok(TreeSlice { k: k.clone(), max_depth, rows })
}

impl TreeSlice {
    pub fn row_lengths(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn node_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Graphviz digraph; edges run child → parent and nodes carry `h(n)`.
    pub fn to_dot(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "// k-descending tree, k = {}, depth <= {}", self.k, self.max_depth).unwrap();
        writeln!(out, "// edges point child -> parent; the root's self-loop (0 -> 0) is omitted")
            .unwrap();
        out.push_str("digraph ktree {\n  rankdir=BT;\n  node [shape=circle];\n");
        for row in &self.rows {
            for n in row {
                let h = child_count(n, &self.k)?;
                writeln!(out, "  {n} [label=\"{n}\\nh={h}\"];").unwrap();
            }
        }
        for (d, row) in self.rows.iter().enumerate() {
            let ids: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(out, "  {{ rank=same; {} }}", ids.join("; ")).unwrap();
            if d == 0 {
                continue;
            }
            for n in row {
                writeln!(out, "  {n} -> {};", parent(n, &self.k)?).unwrap();
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    /// Indented outline, one node per line: `<id> (h=<children>)`.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# k-descending tree, k = {}, depth <= {}", self.k, self.max_depth).unwrap();
        self.write_subtree(&mut out, &BigInt::zero(), 0)?;
        Ok(out)
    }

    fn write_subtree(&self, out: &mut String, n: &BigInt, depth: u32) -> Result<()> {
        let h = child_count(n, &self.k)?;
        writeln!(out, "{}{n} (h={h})", "  ".repeat(depth as usize)).unwrap();
        if depth == self.max_depth {
            return Ok(());
        }
        let mut kids = children(n, &self.k)?;
        if n.is_zero() {
            kids.lo = BigInt::one();
        }
        for c in kids.iter() {
            self.write_subtree(out, &c, depth + 1)?;
        }
        Ok(())
    }

    /// `{"k": ..., "max_depth": ..., "rows": [[...], ...]}` with integer node ids.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| serde_json::Value::Array(row.iter().map(json_int).collect()))
            .collect();
        serde_json::json!({
            "k": self.k.to_string(),
            "max_depth": self.max_depth,
            "rows": rows,
        })
    }
}

/// A JSON number of any size (serde_json built with `arbitrary_precision`).
pub(crate) fn json_int(n: &BigInt) -> serde_json::Value {
    serde_json::Value::Number(
        serde_json::Number::from_str(&n.to_string()).expect("integer literal"),
    )
}
