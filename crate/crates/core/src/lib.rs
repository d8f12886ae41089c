//! Covering and packing numbers of `L^p` balls of convex functions and of
//! convex bodies.
//!
//! The crate turns the partitioning method for metric entropy into executable
//! objects:
//!
//! - [`geometry`]: rectangles, midpoint tensor rules and sphere nets.
//! - [`convexfn`]: max-of-affine convex functions, the balls `C_p(I, B)`,
//!   the infinite-entropy witnesses `f_j` and a perturbation packing family.
//! - [`metrics`]: `L^q` pseudometrics (exact in one dimension), support-function
//!   sup distances and pairwise distance matrices.
//! - [`constants`]: `C(α, p)`, the envelope constant, the threshold `u`, `η_ε`
//!   and the right-hand sides of the entropy bounds (unit-constant convention).
//! - [`partition`]: η-schedules, partition plans, per-box quantized covers and
//!   the reductions that assemble them into a cover of `C_p(I, B)`.
//! - [`bodies`]: support functions of polytopes, the classes `K_p(R)` and the
//!   inclusion `K_p(R) ⊆ K_∞(MR)`.
//! - [`estimator`]: greedy packing / covering counts and exponent regression.
//! - [`experiments`]: the reproducible runners behind the `convex-entropy` CLI.
//!
//! Empirical covering and packing counts are always relative to a finite
//! population; they are lower envelopes of the true covering numbers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod constants;
pub mod convexfn;
mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod metrics;
pub mod numeric;
pub mod partition;
pub mod seed;

pub use error::{Error, Result};
