//! Closed-form moments of the operator, their bounds, and numeric cross-checks.
//!
//! Along one axis the operator is the law of `K/d` with `K ~ Poisson(λ)`,
//! `λ = coord·ln(a)/(a^{1/d} - 1)`. Writing `r = λ/(d·coord)` for the mean ratio,
//! every closed form below is a polynomial in `coord`, `r` and `1/d`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcparser::Growth;
use crate::kernel::{
    poisson_rate, weighted_sum, Axis, OperatorParams, Point2, PoissonPair, Rect, TruncationPolicy,
};

/// Exponents of a moment `Ŷ(t^i s^j)` or, when centered, `Ŷ((t-x)^i (s-y)^j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MomentOrder {
    pub i: u32,
    pub j: u32,
    pub centered: bool,
}

impl MomentOrder {
    pub fn raw(i: u32, j: u32) -> Self {
        Self {
            i,
            j,
            centered: false,
        }
    }

    pub fn central(i: u32, j: u32) -> Self {
        Self {
            i,
            j,
            centered: true,
        }
    }

    fn unsupported(self) -> Error {
        Error::UnsupportedOrder {
            i: self.i,
            j: self.j,
            centered: self.centered,
        }
    }
}

/// Closed form against kernel sum for one moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub order: MomentOrder,
    pub closed_form: f64,
    pub numeric: f64,
    pub abs_diff: f64,
    /// `abs_diff / max(1, |closed_form|)`.
    pub rel_diff: f64,
}

/// Constants of the second and fourth moment bounds on `[0, c] x [0, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub c: f64,
    pub d: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub m_x: f64,
    pub m_y: f64,
}

fn quartic(c: f64) -> f64 {
    c * (1.0 + c * (10.0 + c * (6.0 + c)))
}

impl BoundConstants {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        let rect = Rect::new(c, d)?;
        Ok(Self::for_rect(rect))
    }

    pub fn for_rect(rect: Rect) -> Self {
        let (c, d) = (rect.c(), rect.d());
        Self {
            c,
            d,
            lambda_x: c * (c + 1.0),
            lambda_y: d * (d + 1.0),
            m_x: quartic(c),
            m_y: quartic(d),
        }
    }
}

/// Where a moment bound is taken: at one point, or uniformly over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundTarget {
    Pointwise(Point2),
    Rectangle(Rect),
}

fn axis_data(params: &OperatorParams, axis: Axis) -> (f64, f64) {
    (params.mean_ratio(axis), f64::from(params.index(axis)))
}

/// `Ŷ(t^k)` along one axis, `k <= 2`.
fn raw_axis(params: &OperatorParams, axis: Axis, u: f64, k: u32) -> Option<f64> {
    let (r, d) = axis_data(params, axis);
    let mean = u * r;
    match k {
        0 => Some(1.0),
        1 => Some(mean),
        2 => Some(mean * mean + mean / d),
        _ => None,
    }
}

/// `Ŷ((t-u)^k)` along one axis, `k ∈ {0, 1, 2, 4}`.
fn central_axis(params: &OperatorParams, axis: Axis, u: f64, k: u32) -> Option<f64> {
    let (r, d) = axis_data(params, axis);
    let bias = u * (r - 1.0);
    // Central moments of Poisson(λ) are λ, λ, λ + 3λ²; `v` is the variance of K/d.
    let v = u * r / d;
    match k {
        0 => Some(1.0),
        1 => Some(bias),
        2 => Some(u * (u * (r - 1.0).powi(2) + r / d)),
        4 => {
            let mu3 = v / d;
            let mu4 = v / (d * d) + 3.0 * v * v;
            Some(mu4 + 4.0 * bias * mu3 + 6.0 * bias * bias * v + bias.powi(4))
        }
        _ => None,
    }
}

/// Closed-form raw moments `Ŷ(t^i s^j)` for `i, j <= 2`.
pub fn raw_moment_closed(params: &OperatorParams, point: Point2, i: u32, j: u32) -> Result<f64> {
    let order = MomentOrder::raw(i, j);
    let fx = raw_axis(params, Axis::X, point.x(), i).ok_or_else(|| order.unsupported())?;
    let fy = raw_axis(params, Axis::Y, point.y(), j).ok_or_else(|| order.unsupported())?;
    Ok(fx * fy)
}

/// Central moments `Ŷ((t-x)^i (s-y)^j)` for `i, j ∈ {0, 1, 2, 4}`.
pub fn central_moment_closed(
    params: &OperatorParams,
    point: Point2,
    i: u32,
    j: u32,
) -> Result<f64> {
    let order = MomentOrder::central(i, j);
    let fx = central_axis(params, Axis::X, point.x(), i).ok_or_else(|| order.unsupported())?;
    let fy = central_axis(params, Axis::Y, point.y(), j).ok_or_else(|| order.unsupported())?;
    Ok(fx * fy)
}

pub fn closed_moment(params: &OperatorParams, point: Point2, order: MomentOrder) -> Result<f64> {
    if order.centered {
        central_moment_closed(params, point, order.i, order.j)
    } else {
        raw_moment_closed(params, point, order.i, order.j)
    }
}

/// `Ŷ((t - center)^k)` along one axis by truncated summation over the kernel.
fn numeric_axis(
    params: &OperatorParams,
    axis: Axis,
    u: f64,
    center: f64,
    k: u32,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let rate = poisson_rate(params, axis, u);
    let rates = match axis {
        Axis::X => PoissonPair::new(rate, 0.0)?,
        Axis::Y => PoissonPair::new(0.0, rate)?,
    };
    let d = f64::from(params.index(axis));
    let growth = if k == 0 {
        Growth::Bounded
    } else {
        Growth::Polynomial
    };
    weighted_sum(rates, policy, Some(growth), |k1, k2| {
        let kk = match axis {
            Axis::X => k1,
            Axis::Y => k2,
        };
        Ok((kk as f64 / d - center).powi(k as i32))
    })
    .map(|s| s.value)
}

/// Any moment by truncated summation over the kernel, one axis at a time.
pub fn numeric_moment(
    params: &OperatorParams,
    point: Point2,
    order: MomentOrder,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let (x, y) = (point.x(), point.y());
    let (cx, cy) = if order.centered { (x, y) } else { (0.0, 0.0) };
    Ok(numeric_axis(params, Axis::X, x, cx, order.i, policy)?
        * numeric_axis(params, Axis::Y, y, cy, order.j, policy)?)
}

pub fn moment_report(
    params: &OperatorParams,
    point: Point2,
    order: MomentOrder,
    policy: &TruncationPolicy,
) -> Result<MomentReport> {
    let closed_form = closed_moment(params, point, order)?;
    let numeric = numeric_moment(params, point, order, policy)?;
    let abs_diff = (closed_form - numeric).abs();
    Ok(MomentReport {
        order,
        closed_form,
        numeric,
        abs_diff,
        rel_diff: abs_diff / closed_form.abs().max(1.0),
    })
}

/// Upper bound for a second or fourth central moment along one axis.
///
/// Pointwise: `u(u+1)/d` and `(u^4 + 6u^3 + 10u^2 + u)/d^2`. Over a rectangle
/// the coordinate is replaced by the side length.
pub fn central_moment_bound(
    params: &OperatorParams,
    target: BoundTarget,
    i: u32,
    j: u32,
) -> Result<f64> {
    let order = MomentOrder::central(i, j);
    let (axis, k) = match (i, j) {
        (k, 0) if k == 2 || k == 4 => (Axis::X, k),
        (0, k) if k == 2 || k == 4 => (Axis::Y, k),
        _ => return Err(order.unsupported()),
    };
    let u = match (target, axis) {
        (BoundTarget::Pointwise(p), _) => p.coord(axis),
        (BoundTarget::Rectangle(r), Axis::X) => r.c(),
        (BoundTarget::Rectangle(r), Axis::Y) => r.d(),
    };
    let d = f64::from(params.index(axis));
    Ok(if k == 2 {
        u * (u + 1.0) / d
    } else {
        quartic(u) / (d * d)
    })
}

/// One-axis central moment of even order `2k`, by closed form when available.
fn even_axis_moment(
    params: &OperatorParams,
    point: Point2,
    axis: Axis,
    k: u32,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let u = point.coord(axis);
    match central_axis(params, axis, u, 2 * k) {
        Some(v) => Ok(v),
        None => numeric_axis(params, axis, u, u, 2 * k, policy),
    }
}

/// `Ŷ((t-x)^{2i} (s-y)^{2j})` as the product of the two one-axis moments.
pub fn mixed_central_moment(
    params: &OperatorParams,
    point: Point2,
    i: u32,
    j: u32,
    policy: &TruncationPolicy,
) -> Result<f64> {
    Ok(even_axis_moment(params, point, Axis::X, i, policy)?
        * even_axis_moment(params, point, Axis::Y, j, policy)?)
}

/// `sqrt(Ŷ((t-x)^2) + Ŷ((s-y)^2))`.
pub fn delta_mn(params: &OperatorParams, point: Point2) -> f64 {
    (delta_m(params, point).powi(2) + delta_n(params, point).powi(2)).sqrt()
}

/// `sqrt(Ŷ((t-x)^2))`.
pub fn delta_m(params: &OperatorParams, point: Point2) -> f64 {
    central_axis(params, Axis::X, point.x(), 2)
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// `sqrt(Ŷ((s-y)^2))`.
pub fn delta_n(params: &OperatorParams, point: Point2) -> f64 {
    central_axis(params, Axis::Y, point.y(), 2)
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// `sqrt(u(u+1)/d)`.
pub fn delta_prime(index: u32, u: f64) -> f64 {
    (u * (u + 1.0) / f64::from(index)).sqrt()
}

#[cfg(test)]
mod tests;
