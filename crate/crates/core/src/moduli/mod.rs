//! Moduli of continuity and the error bounds built on them.

mod grid;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcparser::{BivariateFunction, Smoothness};
use crate::kernel::{Axis, OperatorParams, Point2, Rect};
use crate::moments::{delta_m, delta_mn, delta_n, delta_prime, BoundConstants};

pub use grid::{
    default_grid_step, mixed_difference, mixed_modulus, partial_modulus, total_modulus,
    ModulusEstimate, ModulusKind,
};

/// Source of modulus values for the bound evaluators.
pub trait ModulusProvider {
    /// `ω(f; δ)`.
    fn total(&self, delta: f64) -> Result<f64>;
    /// `ω_1(f; δ)` for `Axis::X`, `ω_2(f; δ)` for `Axis::Y`.
    fn partial(&self, axis: Axis, delta: f64) -> Result<f64>;
    /// `ω_B(f; δ1, δ2)`.
    fn mixed(&self, delta1: f64, delta2: f64) -> Result<f64>;
    /// True when every value returned is a guaranteed upper bound of the modulus.
    fn is_upper_bound(&self) -> bool;
}

/// Moduli from analytic Lipschitz-type constants: `ω(δ) <= L·δ`, `ω_B(δ1, δ2) <= L12·δ1·δ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticModulus {
    pub name_hint: &'static str,
    pub total: Option<f64>,
    pub partial_x: Option<f64>,
    pub partial_y: Option<f64>,
    pub mixed: Option<f64>,
}

impl AnalyticModulus {
    /// Moduli of `f` itself.
    pub fn of_function(s: &Smoothness) -> Self {
        Self {
            name_hint: "f",
            total: Some(s.lipschitz_total),
            partial_x: Some(s.lipschitz_x),
            partial_y: Some(s.lipschitz_y),
            mixed: Some(s.mixed_derivative_bound),
        }
    }

    /// Mixed modulus of the mixed derivative `D_B f`.
    pub fn of_mixed_derivative(s: &Smoothness) -> Self {
        Self {
            name_hint: "D_B f",
            total: None,
            partial_x: None,
            partial_y: None,
            mixed: Some(s.dbf_mixed_bound),
        }
    }

    /// Analytic moduli of a function carrying smoothness metadata.
    pub fn for_function(f: &BivariateFunction) -> Result<Self> {
        f.smoothness()
            .map(Self::of_function)
            .ok_or_else(|| Error::MissingMetadata(f.name().to_string()))
    }

    /// A modulus that is identically zero, as for constant `D_B f`.
    pub fn zero() -> Self {
        Self {
            name_hint: "0",
            total: Some(0.0),
            partial_x: Some(0.0),
            partial_y: Some(0.0),
            mixed: Some(0.0),
        }
    }

    fn need(&self, v: Option<f64>, what: &str) -> Result<f64> {
        v.ok_or_else(|| Error::MissingMetadata(format!("{} ({what} modulus)", self.name_hint)))
    }
}

impl ModulusProvider for AnalyticModulus {
    fn total(&self, delta: f64) -> Result<f64> {
        Ok(self.need(self.total, "total")? * delta)
    }

    fn partial(&self, axis: Axis, delta: f64) -> Result<f64> {
        let l = match axis {
            Axis::X => self.need(self.partial_x, "partial x")?,
            Axis::Y => self.need(self.partial_y, "partial y")?,
        };
        Ok(l * delta)
    }

    fn mixed(&self, delta1: f64, delta2: f64) -> Result<f64> {
        Ok(self.need(self.mixed, "mixed")? * delta1 * delta2)
    }

    fn is_upper_bound(&self) -> bool {
        true
    }
}

/// Moduli estimated by grid sweeps over a rectangle; values are lower bounds.
#[derive(Debug, Clone)]
pub struct GridModulus {
    pub f: BivariateFunction,
    pub rect: Rect,
    pub step: f64,
}

impl GridModulus {
    pub fn new(f: BivariateFunction, rect: Rect, step: Option<f64>) -> Result<Self> {
        let step = step.unwrap_or_else(|| default_grid_step(rect));
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid step must be positive (got {step})"
            )));
        }
        Ok(Self { f, rect, step })
    }
}

impl ModulusProvider for GridModulus {
    fn total(&self, delta: f64) -> Result<f64> {
        total_modulus(&self.f, self.rect, delta, self.step).map(|e| e.value)
    }

    fn partial(&self, axis: Axis, delta: f64) -> Result<f64> {
        partial_modulus(&self.f, self.rect, axis, delta, self.step).map(|e| e.value)
    }

    fn mixed(&self, delta1: f64, delta2: f64) -> Result<f64> {
        mixed_modulus(&self.f, self.rect, delta1, delta2, self.step).map(|e| e.value)
    }

    fn is_upper_bound(&self) -> bool {
        false
    }
}

/// `M`, `μ1`, `μ2` of the class `|Δf| <= M |u-u0|^μ1 |v-v0|^μ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzSpec {
    m: f64,
    mu1: f64,
    mu2: f64,
}

impl LipschitzSpec {
    pub fn new(m: f64, mu1: f64, mu2: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Lipschitz constant must be positive (got {m})"
            )));
        }
        for mu in [mu1, mu2] {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "Lipschitz exponents must lie in (0, 1] (got {mu})"
                )));
            }
        }
        Ok(Self { m, mu1, mu2 })
    }

    /// The class `Lip_M(1, 1)` certified by a mixed-derivative bound.
    pub fn from_smoothness(s: &Smoothness) -> Result<Self> {
        Self::new(s.mixed_derivative_bound, 1.0, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }
}

/// `2 ω(f; δ_{m,n})` with `δ_{m,n}` the root of the summed second central moments.
pub fn bound_total(
    provider: &dyn ModulusProvider,
    params: &OperatorParams,
    point: Point2,
) -> Result<f64> {
    Ok(2.0 * provider.total(delta_mn(params, point))?)
}

/// `2 (ω_1(f; δ_m) + ω_2(f; δ_n))` with `δ_m`, `δ_n` the roots of the axis second central moments.
pub fn bound_partial(
    provider: &dyn ModulusProvider,
    params: &OperatorParams,
    point: Point2,
) -> Result<f64> {
    let wx = provider.partial(Axis::X, delta_m(params, point))?;
    let wy = provider.partial(Axis::Y, delta_n(params, point))?;
    Ok(2.0 * (wx + wy))
}

/// `4 ω_B(f; δ'_m, δ'_n)` with `δ'_m = sqrt(x(x+1)/m)`.
pub fn bound_gbs(
    provider: &dyn ModulusProvider,
    params: &OperatorParams,
    point: Point2,
) -> Result<f64> {
    let (dm, dn) = (
        delta_prime(params.m(), point.x()),
        delta_prime(params.n(), point.y()),
    );
    Ok(4.0 * provider.mixed(dm, dn)?)
}

/// `M δ'_m^{μ1} δ'_n^{μ2}`.
pub fn bound_lipschitz_gbs(spec: &LipschitzSpec, params: &OperatorParams, point: Point2) -> f64 {
    let (dm, dn) = (
        delta_prime(params.m(), point.x()),
        delta_prime(params.n(), point.y()),
    );
    spec.m * dm.powf(spec.mu1) * dn.powf(spec.mu2)
}

/// The constants `M1..M4` of the B-differentiable bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BdiffConstants {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl BdiffConstants {
    pub fn new(k: &BoundConstants) -> Self {
        let m1 = k.lambda_x.sqrt() + k.m_x.sqrt();
        let m2 = k.lambda_y.sqrt() + k.m_y.sqrt();
        let m3 = (k.lambda_x * k.lambda_y).sqrt();
        Self {
            m1,
            m2,
            m3,
            m4: (m1 * m2).max(m3),
        }
    }
}

/// `(M4/√(mn)) (3 M3 ‖D_B f‖ + ω_B(D_B f; 1/√m, 1/√n))`.
pub fn bound_bdiff(
    dbf_norm: f64,
    dbf_modulus: &dyn ModulusProvider,
    consts: &BoundConstants,
    params: &OperatorParams,
) -> Result<f64> {
    if !(dbf_norm >= 0.0 && dbf_norm.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "‖D_B f‖ must be finite and nonnegative (got {dbf_norm})"
        )));
    }
    let (m, n) = (f64::from(params.m()), f64::from(params.n()));
    let k = BdiffConstants::new(consts);
    let omega = dbf_modulus.mixed(1.0 / m.sqrt(), 1.0 / n.sqrt())?;
    Ok(k.m4 / (m * n).sqrt() * (3.0 * k.m3 * dbf_norm + omega))
}

/// Step of the mixed difference quotient used to probe `D_B f`.
pub const DBF_PROBE_STEP: f64 = 1e-4;

/// `Δf((x+h, y+h), (x, y)) / h²`, a forward approximation of `D_B f(x, y)`.
pub fn dbf_probe(f: &BivariateFunction, point: Point2, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "probe step must be positive (got {h})"
        )));
    }
    let probe = Point2::new(point.x() + h, point.y() + h)?;
    Ok(mixed_difference(f, probe, point)? / (h * h))
}

/// The probe `(x, y) ↦ dbf_probe(f, (x, y), h)` as a function in its own right.
pub fn dbf_probe_function(f: &BivariateFunction, h: f64) -> BivariateFunction {
    let g = f.clone();
    BivariateFunction::from_fn(format!("D_B[{}]", f.name()), move |x, y| {
        let d = g.eval(x + h, y + h)? - g.eval(x + h, y)? - g.eval(x, y + h)? + g.eval(x, y)?;
        Ok(d / (h * h))
    })
}

/// Grid estimate of `‖D_B f‖` on `rect` from the probe; a lower bound.
pub fn dbf_norm_estimate(f: &BivariateFunction, rect: Rect, step: f64, h: f64) -> Result<f64> {
    let g = dbf_probe_function(f, h);
    let mut best: f64 = 0.0;
    for p in rect.grid(step)? {
        best = best.max(g.eval_at(p)?.abs());
    }
    Ok(best)
}
