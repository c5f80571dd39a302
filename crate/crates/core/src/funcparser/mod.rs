//! Bivariate test functions: an expression language and a catalog of
//! named functions with analytic metadata.

mod catalog;
mod compiled;
mod expr;
mod parser;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::DomainError;
use crate::kernel::{Point2, Rect};

pub use catalog::{catalog, CATALOG_NAMES};
pub use expr::{evaluate, BinOp, Constant, Expr, Func, Var};
pub use parser::parse;

/// How fast a function may grow towards infinity in the first quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Bounded,
    Polynomial,
    Exponential,
}

/// Analytic smoothness constants of a catalog function.
///
/// Each constant bounds the corresponding difference quotient between a base
/// point in the declared domain and any other point of the quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Smoothness {
    /// `|f(p) - f(q)| <= lipschitz_total * |p - q|`.
    pub lipschitz_total: f64,
    /// `|f(x1, y) - f(x2, y)| <= lipschitz_x * |x1 - x2|`.
    pub lipschitz_x: f64,
    /// `|f(x, y1) - f(x, y2)| <= lipschitz_y * |y1 - y2|`.
    pub lipschitz_y: f64,
    /// Bound on `|∂²f/∂x∂y|`; the mixed difference obeys
    /// `|Δf| <= mixed_derivative_bound * |Δx| * |Δy|`.
    pub mixed_derivative_bound: f64,
    /// Bound on the mixed difference of the mixed derivative itself,
    /// in the sense `|Δ(∂²f/∂x∂y)| <= dbf_mixed_bound * |Δx| * |Δy|`.
    pub dbf_mixed_bound: f64,
}

type EvalFn = dyn Fn(f64, f64) -> Result<f64, DomainError> + Send + Sync;

/// A named real function of two variables.
#[derive(Clone)]
pub struct BivariateFunction {
    name: String,
    eval: Arc<EvalFn>,
    expr: Option<Arc<Expr>>,
    domain: Option<Rect>,
    growth: Option<Growth>,
    smoothness: Option<Smoothness>,
}

impl BivariateFunction {
    /// Wrap a parsed expression. Constant expressions are marked bounded.
    pub fn from_expr(name: impl Into<String>, expr: Expr) -> Self {
        let expr = Arc::new(expr);
        let growth = expr.is_constant().then_some(Growth::Bounded);
        let program = compiled::Program::compile(&expr);
        let inner = Arc::clone(&expr);
        Self {
            name: name.into(),
            eval: Arc::new(move |x, y| program.eval(&inner, x, y)),
            expr: Some(expr),
            domain: None,
            growth,
            smoothness: None,
        }
    }

    /// Parse `source` and wrap the result; the source text becomes the name.
    pub fn parse(source: &str) -> crate::Result<Self> {
        Ok(Self::from_expr(source.trim(), parse(source)?))
    }

    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<f64, DomainError> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            expr: None,
            domain: None,
            growth: None,
            smoothness: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(format!("{c}"), Expr::num(c)).with_growth(Growth::Bounded)
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn with_domain(mut self, domain: Rect) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = Some(smoothness);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        (self.eval)(x, y)
    }

    pub fn eval_at(&self, p: Point2) -> Result<f64, DomainError> {
        self.eval(p.x(), p.y())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_deref()
    }

    pub fn domain(&self) -> Option<Rect> {
        self.domain
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn smoothness(&self) -> Option<&Smoothness> {
        self.smoothness.as_ref()
    }
}

impl fmt::Debug for BivariateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateFunction")
            .field("name", &self.name)
            .field("expr", &self.expr.as_ref().map(|e| e.to_string()))
            .field("domain", &self.domain)
            .field("growth", &self.growth)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}
