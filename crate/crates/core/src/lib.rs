//! Finite-resolution laboratory for sticky convergence of function sequences.
//!
//! Every quantifier over `n`, `eps` and neighbourhoods is evaluated on a
//! [`ResolutionSchedule`](funcspace::ResolutionSchedule); results are three-valued
//! [`Verdict`](funcspace::Verdict)s that carry a replayable certificate or witness.

// `!(x < eps)` is deliberate throughout: NaN must count as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod convergence;
pub mod doubleseq;
pub mod error;
pub mod funcspace;
pub mod functionals;
pub mod humps;
pub mod par;
pub mod piecewise;
pub mod poly;
pub mod quad;
pub mod seqspace;

pub use error::{LabError, Result};
