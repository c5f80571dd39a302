//! Numerical engine for bivariate Szász-Mirakjan-type operators.
//!
//! The operator family is parameterised by `(m, n, a)` and samples a function
//! on the grid `{k1/m} x {k2/n}` with product-Poisson weights whose rates are
//! `x·ln(a)/(a^{1/m} - 1)` and `y·ln(a)/(a^{1/n} - 1)`. Alongside it the crate
//! provides the Generalized Boolean Sum (GBS) form, a Kantorovich-Szász
//! comparator, the classical Mirakjan-Favard-Szász operator and its GBS form,
//! closed-form moments, modulus-of-continuity estimators, error-bound
//! evaluators, and the experiment drivers behind the `szasz` CLI.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod funcparser;
pub mod kernel;
pub mod moduli;
pub mod moments;
pub mod operators;

pub use error::{DomainError, Error, ParseError, Result};
pub use funcparser::{catalog, parse, BivariateFunction, Expr, Growth, Smoothness};
pub use kernel::{
    expectation, poisson_rate, truncation_window, weight, Axis, OperatorParams, Point2, Rect,
    SummationWindow, TruncationPolicy,
};
pub use operators::{
    eval_bivariate, eval_gbs, eval_kantorovich, eval_mfs, eval_mfs_gbs, evaluate, OperatorKind,
    QuadratureSpec,
};
