//! Sequential multi-hypothesis testing with dropped-backward-control (DBC)
//! rules.
//!
//! The crate builds truncated sequential tests of k simple hypotheses that
//! minimize a weighted expected sample size under error-probability
//! constraints, handled through Lagrange multipliers:
//!
//! - [`dbc`]: the closed-form DBC stopping and decision rules, the posterior
//!   representation and the Lagrangian functional;
//! - [`lattice`]: exact evaluation on the Bernoulli (n, s) lattice, the
//!   optimal test by backward induction, and path-enumeration oracles;
//! - [`montecarlo`]: seeded, thread-count-independent simulation for any
//!   model;
//! - [`classic`]: SPRT, 2-SPRT, MSPRT and the two-sided wrapper;
//! - [`fit`]: Nelder–Mead calibration of the multipliers to target errors;
//! - [`kiefer_weiss`]: worst-case ESS search and the fixed-point design;
//! - [`scenarios`]: the reference numerical studies as runnable checks.

pub mod classic;
pub mod dbc;
pub mod error;
pub mod fit;
pub mod kiefer_weiss;
pub mod lattice;
pub mod models;
pub mod montecarlo;
pub mod numeric;
pub mod report;
pub mod scenarios;
pub mod spec;
pub mod state;

pub use dbc::{dbc_verdict, lagrangian, DbcRule, SequentialRule, Verdict};
pub use error::{Error, Result};
pub use lattice::{Action, LatticePolicy};
pub use models::Model;
pub use report::TestReport;
pub use spec::{Horizon, TestSpec};
pub use state::LogLikState;
