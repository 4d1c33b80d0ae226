//! Ratio-test hierarchy for positive series (d'Alembert, Raabe, Bertrand and
//! the iterated-logarithm extension) built on Kummer's test, plus recurrence
//! classifiers for birth-and-death chains and reflected random walks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdp;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod expr;
pub mod family;
pub mod iterlog;
pub mod real;
pub mod rwalk;
pub mod table;

pub use bdp::{bdp_classify, recurrence_ratio, BirthDeathRates, Classification, Recurrence};
pub use convergence::{
    adaptive_classify, extended_bdm_test, extract_sn, kummer_rho, kummer_test, ClassifyConfig,
    Decision, ExtractionSample, KummerWeight, RatioSpec, Verdict, Window,
};
pub use error::{Error, Result};
pub use expr::{parse_expression, Expr};
pub use iterlog::{Level, K_MAX_NUMERIC};
pub use real::{Dd, DoubleDouble, Real};
pub use rwalk::{
    rw_classify, rw_to_bdp, simulate, step_probabilities, DriftSpec, RWClassification,
    SimulationReport,
};
