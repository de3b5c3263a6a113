//! Pointwise numerical verification of weak almost contact metric
//! structures on a single coordinate chart.
//!
//! The crate is `no_std` (with `alloc`). File formats, the command line
//! front end and parallel sampling live in the `wact` crate.

#![no_std]
// Tensor code indexes several arrays with the same loop variable; dual
// arithmetic mixes operators by design; negated float comparisons reject NaN.
#![allow(
    clippy::needless_range_loop,
    clippy::suspicious_arithmetic_impl,
    clippy::neg_cmp_op_on_partial_ord
)]

extern crate alloc;

pub mod calculus;
pub mod chart;
pub mod classify;
pub mod deform;
pub mod dual;
pub mod expr;
pub mod linalg;
pub mod structure;
pub mod tensor;

pub use chart::{Chart, SamplePlan};
pub use chart::{Executor, Sequential};
pub use classify::{classify, verify, CheckReport, Classification, Flag, Quantity, Verdict};
pub use deform::{DeformParams, Direction};
pub use dual::{Dual, Scalar};
pub use expr::ScalarExpr;
pub use structure::{validate, Axiom, RawStructure, Structure, ValidationReport};
pub use tensor::{TensorField, TensorValue, Valence};
