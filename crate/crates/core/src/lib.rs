//! Exact dynamic programming, approximate dynamic programming (ADP) and
//! greedy performance bounds for finite-horizon deterministic control.
//!
//! The crate is organised bottom-up:
//!
//! - [`string`]: action strings, enumeration and the [`StringFunction`] interface.
//! - [`curvature`]: global curvatures of a string function and string-submodularity checks.
//! - [`greedy`]: greedy strings, brute-force optima and the classical greedy floors.
//! - [`control`]: tabular control instances, trajectories and the Bellman backward recursion.
//! - [`adp`]: value-to-go approximators, the ADP forward pass and the induced string function.
//! - [`bounds`]: trajectory curvatures, the factor `beta` and the ADP bound checks.
//! - [`instance`], [`generate`], [`families`], [`scheme`], [`report`]: harness plumbing used by the CLI.
//!
//! Stages are numbered from 1 in every public API (`k = 1..=K`), matching the
//! convention that `V_{K+1} = W_{K+1} = 0`. Curvature lists are indexed from 0.

pub mod adp;
pub mod bounds;
pub mod control;
pub mod curvature;
pub mod error;
pub mod families;
pub mod generate;
pub mod greedy;
pub mod instance;
pub mod report;
pub mod scheme;
pub mod string;

pub use adp::{induced_f, myopic_vtg, optimal_vtg, rollout_vtg, run_adp, table_vtg, InducedStringFunction, VtgApproximator, VtgKind};
pub use bounds::{verify_thm3, Check, CheckStatus, CurvatureReport};
pub use control::{solve_exact_dp, ControlInstance, Policy, ValueTable};
pub use error::{Error, Result};
pub use greedy::{brute_force_optimum, greedy_string, GreedyTrace};
pub use string::{ActionString, FnStringFunction, StringFunction};

/// Absolute tolerance used by every curvature and bound check unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Maximum number of strings an exhaustive oracle may evaluate.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;
