use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcparser::BivariateFunction;
use crate::kernel::{Axis, Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusKind {
    Total,
    PartialX,
    PartialY,
    Mixed,
}

/// A modulus value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub kind: ModulusKind,
    pub delta1: f64,
    /// Only meaningful for `ModulusKind::Mixed`.
    pub delta2: f64,
    pub value: f64,
    pub grid_step: f64,
    /// Grid sweeps only see grid pairs and so can undershoot the supremum.
    pub is_lower_bound: bool,
}

/// `f(u, v) - f(u, v0) - f(u0, v) + f(u0, v0)` for probe `(u, v)` and base `(u0, v0)`.
pub fn mixed_difference(f: &BivariateFunction, probe: Point2, base: Point2) -> Result<f64> {
    let (u, v, u0, v0) = (probe.x(), probe.y(), base.x(), base.y());
    Ok(f.eval(u, v)? - f.eval(u, v0)? - f.eval(u0, v)? + f.eval(u0, v0)?)
}

/// Grid step used when none is given: the longer side over 400.
pub fn default_grid_step(rect: Rect) -> f64 {
    rect.c().max(rect.d()) / 400.0
}

fn near_integer(r: f64) -> Option<f64> {
    let k = r.round();
    ((r - k).abs() <= 1e-9 * r.max(1.0)).then_some(k)
}

/// Largest `k` with `k·h <= delta`, treating near-equality as equality.
fn max_offset_inclusive(delta: f64, h: f64) -> usize {
    let r = delta / h;
    near_integer(r).unwrap_or_else(|| r.floor()) as usize
}

/// Largest `k` with `k·h < delta`, treating near-equality as equality.
fn max_offset_strict(delta: f64, h: f64) -> usize {
    let r = delta / h;
    if delta <= 0.0 {
        return 0;
    }
    match near_integer(r) {
        Some(k) => (k as usize).saturating_sub(1),
        None => r.floor() as usize,
    }
}

/// Function values on the grid `{0, h, 2h, ...} x {0, h, 2h, ...}` inside `rect`.
struct Table {
    nx: usize,
    ny: usize,
    vals: Vec<f64>,
}

impl Table {
    fn build(f: &BivariateFunction, rect: Rect, h: f64) -> Result<Self> {
        let nx = (rect.c() / h + 1e-9).floor() as usize + 1;
        let ny = (rect.d() / h + 1e-9).floor() as usize + 1;
        let rows: Result<Vec<Vec<f64>>> = (0..nx)
            .into_par_iter()
            .map(|i| {
                (0..ny)
                    .map(|j| Ok(f.eval(i as f64 * h, j as f64 * h)?))
                    .collect()
            })
            .collect();
        Ok(Self {
            nx,
            ny,
            vals: rows?.concat(),
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.ny + j]
    }
}

fn check(delta: f64, step: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "delta must be a finite nonnegative number (got {delta})"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "grid step must be positive (got {step})"
        )));
    }
    Ok(())
}

fn row_max<F>(nx: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..nx).into_par_iter().map(row).reduce(|| 0.0, f64::max)
}

/// Grid estimate of `sup |f(t,s) - f(x,y)|` over pairs at Euclidean distance `<= delta`.
pub fn total_modulus(
    f: &BivariateFunction,
    rect: Rect,
    delta: f64,
    grid_step: f64,
) -> Result<ModulusEstimate> {
    check(delta, grid_step)?;
    let estimate = |value| ModulusEstimate {
        kind: ModulusKind::Total,
        delta1: delta,
        delta2: 0.0,
        value,
        grid_step,
        is_lower_bound: true,
    };
    if delta == 0.0 {
        return Ok(estimate(0.0));
    }
    let t = Table::build(f, rect, grid_step)?;
    let k = max_offset_inclusive(delta, grid_step);
    let r2 = (delta / grid_step).powi(2) * (1.0 + 1e-9);
    // Half of the offset disc; the other half gives the same absolute differences.
    let offsets: Vec<(usize, isize)> = (0..=k)
        .flat_map(|di| (-(k as isize)..=k as isize).map(move |dj| (di, dj)))
        .filter(|&(di, dj)| (di > 0 || dj > 0) && (di * di) as f64 + (dj * dj) as f64 <= r2)
        .collect();
    let value = row_max(t.nx, |i| {
        let mut best: f64 = 0.0;
        for j in 0..t.ny {
            let v = t.at(i, j);
            for &(di, dj) in &offsets {
                let (i2, j2) = (i + di, j as isize + dj);
                if i2 < t.nx && j2 >= 0 && (j2 as usize) < t.ny {
                    best = best.max((t.at(i2, j2 as usize) - v).abs());
                }
            }
        }
        best
    });
    Ok(estimate(value))
}

/// Grid estimate of the partial modulus along `axis`, the other coordinate swept over the grid.
pub fn partial_modulus(
    f: &BivariateFunction,
    rect: Rect,
    axis: Axis,
    delta: f64,
    grid_step: f64,
) -> Result<ModulusEstimate> {
    check(delta, grid_step)?;
    let kind = match axis {
        Axis::X => ModulusKind::PartialX,
        Axis::Y => ModulusKind::PartialY,
    };
    let estimate = |value| ModulusEstimate {
        kind,
        delta1: delta,
        delta2: 0.0,
        value,
        grid_step,
        is_lower_bound: true,
    };
    if delta == 0.0 {
        return Ok(estimate(0.0));
    }
    let t = Table::build(f, rect, grid_step)?;
    let k = max_offset_inclusive(delta, grid_step);
    let value = row_max(t.nx, |i| {
        let mut best: f64 = 0.0;
        for j in 0..t.ny {
            let v = t.at(i, j);
            for d in 1..=k {
                let other = match axis {
                    Axis::X if i + d < t.nx => t.at(i + d, j),
                    Axis::Y if j + d < t.ny => t.at(i, j + d),
                    _ => break,
                };
                best = best.max((other - v).abs());
            }
        }
        best
    });
    Ok(estimate(value))
}

/// Grid estimate of `sup |Δf(t,s;x,y)|` over pairs with `|t-x| < delta1`, `|s-y| < delta2`.
pub fn mixed_modulus(
    f: &BivariateFunction,
    rect: Rect,
    delta1: f64,
    delta2: f64,
    grid_step: f64,
) -> Result<ModulusEstimate> {
    check(delta1, grid_step)?;
    check(delta2, grid_step)?;
    let estimate = |value| ModulusEstimate {
        kind: ModulusKind::Mixed,
        delta1,
        delta2,
        value,
        grid_step,
        is_lower_bound: true,
    };
    let (k1, k2) = (
        max_offset_strict(delta1, grid_step),
        max_offset_strict(delta2, grid_step),
    );
    if k1 == 0 || k2 == 0 {
        return Ok(estimate(0.0));
    }
    let t = Table::build(f, rect, grid_step)?;
    // For fixed rows i < i2, Δf = g(j2) - g(j) with g = f(i2, .) - f(i, .), so the
    // sup over |j2 - j| <= k2 is the largest max - min over windows of k2 + 1 columns.
    let value = row_max(t.nx, |i| {
        let mut best: f64 = 0.0;
        let mut g = vec![0.0; t.ny];
        for i2 in i + 1..=(i + k1).min(t.nx - 1) {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = t.at(i2, j) - t.at(i, j);
            }
            best = best.max(window_spread(&g, k2 + 1));
        }
        best
    });
    Ok(estimate(value))
}

/// Largest `max - min` over all runs of `width` consecutive entries.
fn window_spread(g: &[f64], width: usize) -> f64 {
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for (j, &v) in g.iter().enumerate() {
        while hi.back().is_some_and(|&b| g[b] <= v) {
            hi.pop_back();
        }
        hi.push_back(j);
        while lo.back().is_some_and(|&b| g[b] >= v) {
            lo.pop_back();
        }
        lo.push_back(j);
        let start = (j + 1).saturating_sub(width);
        while hi.front().is_some_and(|&f| f < start) {
            hi.pop_front();
        }
        while lo.front().is_some_and(|&f| f < start) {
            lo.pop_front();
        }
        best = best.max(g[hi[0]] - g[lo[0]]);
    }
    best
}
