//! Exact k-descending trees.
//!
//! For a real `k > 1`, node `n ≥ 0` has parent `⌊n/k⌋` and `0` is the root
//! (its own parent). This crate builds these trees with exact arithmetic,
//! computes leftmost-node and row-length sequences, encloses the growth
//! constants `c(k)` and `ρ(k)` in rigorous intervals, and checks the exact
//! recurrence and closed forms for `k = (a + √(a² + 4b))/2`.

pub mod error;
pub mod exactnum;
pub mod indicator;
pub mod par;
pub mod rho;
pub mod rows;
pub mod tree;

pub use error::{Error, Result};
pub use exactnum::{ApproxReal, KValue, QuadReal};
pub use indicator::RangeClass;
pub use par::Execution;
pub use rho::RhoEnclosure;
pub use rows::{GoldenParams, RowTable};
pub use tree::{ChildRange, TreeSlice};
