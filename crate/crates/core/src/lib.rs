//! Verification toolkit for the Chen-Sbert divergence.
//!
//! For two probability mass functions `P`, `Q` over the same `n`-letter
//! alphabet the measure is
//!
//! ```text
//! D(P, Q) = 1/2 · Σ (p_i + q_i) · log2(|p_i − q_i|^k + 1),   k > 0
//! ```
//!
//! It is symmetric, bounded by `[0, 1]`, and has none of the singularities of
//! the Kullback-Leibler divergence. Whether it satisfies the triangle
//! inequality — plainly for `0 < k ≤ 1`, or after a k-th root for `k > 1` —
//! is an open question. This crate provides the machinery to probe it:
//!
//! * [`divergence`] — the measure, its two-letter closed form, and the
//!   KL / Jensen-Shannon baselines it is compared against
//! * [`triangle`] — triangle deficits, per-letter terms, the six-case
//!   ordering decomposition, and the `X ≥ Y` comparison behind the
//!   two-letter proof
//! * [`search`] — seeded Monte-Carlo trials over random simplex triples,
//!   counterexample hunting with local refinement, and postulation
//!   evidence runs
//! * [`reduce`] — the solver for replacing three letter terms by two with
//!   the same term sum under box and sum constraints
//!
//! Every search is a pure function of its configuration: per-trial random
//! streams derive from `(base_seed, trial_index)` alone, so results are
//! independent of thread count and scheduling.

mod error;
mod kahan;

pub mod divergence;
pub mod pmf;
pub mod reduce;
pub mod search;
pub mod triangle;

pub use error::Error;
pub use pmf::{KParam, Pmf, DEFAULT_SUM_TOLERANCE};

pub use divergence::{chen_sbert, chen_sbert_binary, js_divergence, js_metric, kl_divergence, ExtendedReal};
pub use reduce::{ReductionCandidate, ReductionProblem, ReductionSolution, SolverTrace};
pub use search::{CounterexampleRecord, Orientation, Postulation, PostulationReport, SearchConfig, Trial};
pub use triangle::{
    case_fraction, classify_ordering, lemma2_xy, letter_term, pair_combine_gap, triangle_deficit,
    CaseParams, DeficitVariant, LetterTriple, OrderingCase, TriangleReport,
};
