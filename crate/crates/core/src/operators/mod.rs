//! The operator families evaluated at a single point.
//!
//! | kind | weights | summand at node `(k1, k2)` |
//! |------|---------|----------------------------|
//! | `BivariateSzaszType` | rates `λx`, `λy` | `f(k1/m, k2/n)` |
//! | `GbsSzaszType` | rates `λx`, `λy` | `f(x, k2/n) + f(k1/m, y) - f(k1/m, k2/n)` |
//! | `KantorovichSzasz` | rates `mx`, `ny` | mean of `f` over `[k1/m, (k1+1)/m] x [k2/n, (k2+1)/n]` |
//! | `MfsClassical` | rates `mx`, `ny` | `f(k1/m, k2/n)` |
//! | `MfsGbs` | rates `mx`, `ny` | `f(x, k2/n) + f(k1/m, y) - f(k1/m, k2/n)` |

mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcparser::BivariateFunction;
use crate::kernel::{
    weighted_sum, OperatorParams, Point2, PoissonPair, Summation, TruncationPolicy,
};

pub use quadrature::{GaussLegendre, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorKind {
    BivariateSzaszType,
    GbsSzaszType,
    KantorovichSzasz,
    MfsClassical,
    MfsGbs,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::BivariateSzaszType,
        OperatorKind::GbsSzaszType,
        OperatorKind::KantorovichSzasz,
        OperatorKind::MfsClassical,
        OperatorKind::MfsGbs,
    ];

    /// Short name used on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::BivariateSzaszType => "bivariate",
            OperatorKind::GbsSzaszType => "gbs",
            OperatorKind::KantorovichSzasz => "kantorovich",
            OperatorKind::MfsClassical => "mfs",
            OperatorKind::MfsGbs => "mfs-gbs",
        }
    }

    /// Whether the operator depends on the parameter `a`.
    pub fn uses_a(self) -> bool {
        matches!(
            self,
            OperatorKind::BivariateSzaszType | OperatorKind::GbsSzaszType
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown operator `{s}` (expected one of bivariate, gbs, kantorovich, mfs, mfs-gbs)"
                ))
            })
    }
}

fn nodes(params: &OperatorParams) -> (f64, f64) {
    (f64::from(params.m()), f64::from(params.n()))
}

fn plain_sum(
    f: &BivariateFunction,
    params: &OperatorParams,
    rates: PoissonPair,
    policy: &TruncationPolicy,
) -> Result<Summation> {
    let (m, n) = nodes(params);
    weighted_sum(rates, policy, f.growth(), |k1, k2| {
        Ok(f.eval(k1 as f64 / m, k2 as f64 / n)?)
    })
}

/// The three boolean-sum terms share the window chosen for `rates`.
fn boolean_sum(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    rates: PoissonPair,
    policy: &TruncationPolicy,
) -> Result<Summation> {
    let (m, n) = nodes(params);
    let (x, y) = (point.x(), point.y());
    weighted_sum(rates, policy, f.growth(), |k1, k2| {
        let (t, s) = (k1 as f64 / m, k2 as f64 / n);
        Ok(f.eval(x, s)? + f.eval(t, y)? - f.eval(t, s)?)
    })
}

/// `Ŷ_{m,n,a}(f; x, y)`.
pub fn eval_bivariate(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<f64> {
    plain_sum(f, params, PoissonPair::for_params(params, point), policy).map(|s| s.value)
}

/// GBS form of `Ŷ_{m,n,a}`.
pub fn eval_gbs(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<f64> {
    boolean_sum(
        f,
        params,
        point,
        PoissonPair::for_params(params, point),
        policy,
    )
    .map(|s| s.value)
}

/// Kantorovich-Szász operator with classical weights; `a` is ignored.
pub fn eval_kantorovich(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
    quad: QuadratureSpec,
) -> Result<f64> {
    let (m, n) = nodes(params);
    let rule = quad.rule();
    let rates = PoissonPair::classical(params, point);
    let cell = |k1: usize, k2: usize| -> Result<f64> {
        let (x0, y0) = (k1 as f64 / m, k2 as f64 / n);
        let (hx, hy) = (0.5 / m, 0.5 / n);
        let mut acc = 0.0;
        for (ti, wi) in rule.nodes.iter().zip(&rule.weights) {
            let t = x0 + hx * (1.0 + ti);
            let mut row = 0.0;
            for (sj, wj) in rule.nodes.iter().zip(&rule.weights) {
                row += wj * f.eval(t, y0 + hy * (1.0 + sj))?;
            }
            acc += wi * row;
        }
        Ok(acc / 4.0)
    };
    weighted_sum(rates, policy, f.growth(), cell).map(|s| s.value)
}

/// Classical Mirakjan-Favard-Szász operator; `a` is ignored.
pub fn eval_mfs(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<f64> {
    plain_sum(f, params, PoissonPair::classical(params, point), policy).map(|s| s.value)
}

/// GBS form of the Mirakjan-Favard-Szász operator; `a` is ignored.
pub fn eval_mfs_gbs(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<f64> {
    boolean_sum(
        f,
        params,
        point,
        PoissonPair::classical(params, point),
        policy,
    )
    .map(|s| s.value)
}

/// Dispatch on `kind`. `quad` is only consulted for the Kantorovich operator.
pub fn evaluate(
    kind: OperatorKind,
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
    quad: QuadratureSpec,
) -> Result<f64> {
    match kind {
        OperatorKind::BivariateSzaszType => eval_bivariate(f, params, point, policy),
        OperatorKind::GbsSzaszType => eval_gbs(f, params, point, policy),
        OperatorKind::KantorovichSzasz => eval_kantorovich(f, params, point, policy, quad),
        OperatorKind::MfsClassical => eval_mfs(f, params, point, policy),
        OperatorKind::MfsGbs => eval_mfs_gbs(f, params, point, policy),
    }
}
