//! Operator parameters, the product-Poisson weight and the truncation engine.
//!
//! Every operator in this crate is a double series `Σ_{k1} Σ_{k2} w(k1) w(k2) g(k1, k2)`
//! whose weights factor into two Poisson mass functions. The engine here cuts
//! the series to a finite window:
//!
//! * a window centred on the Poisson means is widened until the Chernoff bound
//!   on the mass outside it drops below `tail_tol` (this is final for bounded
//!   summands);
//! * for summands that may grow, the window is then doubled until
//!   `stabilization_rounds` successive doublings each add less than `tail_tol`.
//!
//! Sums run outward from the modal index with Neumaier compensation.

use crate::error::{DomainError, Error, Result};
use crate::funcparser::{BivariateFunction, Growth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// The `(m, n, a)` triple shared by every operator family.
///
/// The classical comparators only read `m` and `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    m: u32,
    n: u32,
    a: f64,
}

impl OperatorParams {
    pub fn new(m: u32, n: u32, a: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParams(format!(
                "m and n must be positive (got m={m}, n={n})"
            )));
        }
        if !a.is_finite() || a <= 0.0 || a == 1.0 {
            return Err(Error::InvalidParams(format!(
                "a must be positive, finite and different from 1 (got {a})"
            )));
        }
        Ok(Self { m, n, a })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `m` for the x axis, `n` for the y axis.
    pub fn index(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.m,
            Axis::Y => self.n,
        }
    }

    /// `ln(a) / (a^{1/d} - 1)`; the Poisson rate is this factor times the coordinate.
    ///
    /// `a^{1/d} - 1` is evaluated as `expm1(ln(a)/d)` so that `a` close to 1 and
    /// large `d` keep full relative precision.
    pub fn rate_factor(&self, axis: Axis) -> f64 {
        let ln_a = self.a.ln();
        ln_a / (ln_a / f64::from(self.index(axis))).exp_m1()
    }

    /// `ln(a) / (d (a^{1/d} - 1))`: ratio of the operator's first moment to the coordinate.
    pub fn mean_ratio(&self, axis: Axis) -> f64 {
        self.rate_factor(axis) / f64::from(self.index(axis))
    }
}

/// A point of the closed first quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    x: f64,
    y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "point ({x}, {y}) is not in the closed first quadrant"
            )));
        }
        Ok(Self { x, y })
    }

    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

/// The compact rectangle `[0, c] x [0, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    c: f64,
    d: f64,
}

impl Rect {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c.is_finite() && d.is_finite() && c > 0.0 && d > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rectangle sides must be positive and finite (got {c}, {d})"
            )));
        }
        Ok(Self { c, d })
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x <= self.c && p.y <= self.d
    }

    /// Points `(i·step, j·step)` inside the rectangle, row-major in x then y.
    pub fn grid(&self, step: f64) -> Result<Vec<Point2>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid step must be positive (got {step})"
            )));
        }
        let nx = (self.c / step + 1e-9).floor() as usize;
        let ny = (self.d / step + 1e-9).floor() as usize;
        let mut out = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                let x = (i as f64 * step).min(self.c);
                let y = (j as f64 * step).min(self.d);
                out.push(Point2 { x, y });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    tail_tol: f64,
    spread_multiplier: f64,
    max_terms: usize,
    stabilization_rounds: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            spread_multiplier: 8.0,
            max_terms: 1_000_000,
            stabilization_rounds: 2,
        }
    }
}

impl TruncationPolicy {
    pub fn new(
        tail_tol: f64,
        spread_multiplier: f64,
        max_terms: usize,
        stabilization_rounds: u32,
    ) -> Result<Self> {
        if !(tail_tol.is_finite() && tail_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tail_tol must be positive (got {tail_tol})"
            )));
        }
        if !(spread_multiplier.is_finite() && spread_multiplier >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "spread_multiplier must be at least 1 (got {spread_multiplier})"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidInput("max_terms must be at least 1".into()));
        }
        if stabilization_rounds == 0 {
            return Err(Error::InvalidInput(
                "stabilization_rounds must be at least 1".into(),
            ));
        }
        Ok(Self {
            tail_tol,
            spread_multiplier,
            max_terms,
            stabilization_rounds,
        })
    }

    pub fn with_tail_tol(self, tail_tol: f64) -> Result<Self> {
        Self::new(
            tail_tol,
            self.spread_multiplier,
            self.max_terms,
            self.stabilization_rounds,
        )
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::new(
            self.tail_tol,
            self.spread_multiplier,
            max_terms,
            self.stabilization_rounds,
        )
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn spread_multiplier(&self) -> f64 {
        self.spread_multiplier
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn stabilization_rounds(&self) -> u32 {
        self.stabilization_rounds
    }
}

/// Inclusive index ranges `[k1_lo, k1_hi] x [k2_lo, k2_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SummationWindow {
    pub k1_lo: usize,
    pub k1_hi: usize,
    pub k2_lo: usize,
    pub k2_hi: usize,
}

impl SummationWindow {
    pub fn contains(&self, k1: usize, k2: usize) -> bool {
        (self.k1_lo..=self.k1_hi).contains(&k1) && (self.k2_lo..=self.k2_hi).contains(&k2)
    }

    pub fn terms(&self) -> usize {
        (self.k1_hi - self.k1_lo + 1) * (self.k2_hi - self.k2_lo + 1)
    }
}

/// Rates of the two independent Poisson factors of a product weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonPair {
    pub rate_x: f64,
    pub rate_y: f64,
}

impl PoissonPair {
    pub fn new(rate_x: f64, rate_y: f64) -> Result<Self> {
        if !(rate_x.is_finite() && rate_y.is_finite() && rate_x >= 0.0 && rate_y >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Poisson rates must be finite and nonnegative (got {rate_x}, {rate_y})"
            )));
        }
        Ok(Self { rate_x, rate_y })
    }

    /// Rates of the `a`-parameterised weight at `point`.
    pub fn for_params(params: &OperatorParams, point: Point2) -> Self {
        Self {
            rate_x: poisson_rate(params, Axis::X, point.x),
            rate_y: poisson_rate(params, Axis::Y, point.y),
        }
    }

    /// Rates `m·x`, `n·y` of the classical Szász weight.
    pub fn classical(params: &OperatorParams, point: Point2) -> Self {
        Self {
            rate_x: f64::from(params.m) * point.x,
            rate_y: f64::from(params.n) * point.y,
        }
    }

    pub fn rate(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.rate_x,
            Axis::Y => self.rate_y,
        }
    }
}

/// Result of a truncated double sum together with the window it covered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summation {
    pub value: f64,
    pub window: SummationWindow,
}

/// Poisson rate `coord·ln(a)/(a^{1/d} - 1)` with `d = m` on X and `d = n` on Y.
///
/// `coord` must be nonnegative; the result is then nonnegative for every valid `a`.
pub fn poisson_rate(params: &OperatorParams, axis: Axis, coord: f64) -> f64 {
    debug_assert!(coord >= 0.0);
    coord * params.rate_factor(axis)
}

/// `ln P(K = k)` for `K ~ Poisson(rate)`.
pub fn ln_poisson_pmf(rate: f64, k: usize) -> f64 {
    if rate == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let k = k as f64;
    k * rate.ln() - rate - libm::lgamma(k + 1.0)
}

/// The weight `s^a_{m,n}(x, y)` of node `(k1, k2)`, evaluated in log space.
pub fn weight(params: &OperatorParams, point: Point2, k1: usize, k2: usize) -> f64 {
    let rates = PoissonPair::for_params(params, point);
    (ln_poisson_pmf(rates.rate_x, k1) + ln_poisson_pmf(rates.rate_y, k2)).exp()
}

/// One axis of a summation window: `[center - half, center + half]` clipped at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AxisWindow {
    center: usize,
    half: usize,
}

impl AxisWindow {
    fn initial(rate: f64, policy: &TruncationPolicy) -> Self {
        if rate == 0.0 {
            return Self { center: 0, half: 0 };
        }
        let center = rate.round() as usize;
        let half = (policy.spread_multiplier * rate.sqrt()).ceil().max(1.0) as usize;
        Self { center, half }
    }

    fn lo(&self) -> usize {
        self.center.saturating_sub(self.half)
    }

    fn hi(&self) -> usize {
        self.center + self.half
    }

    fn width(&self) -> usize {
        self.hi() - self.lo() + 1
    }

    fn contains(&self, k: usize) -> bool {
        (self.lo()..=self.hi()).contains(&k)
    }

    fn doubled(&self, axis: Axis, policy: &TruncationPolicy) -> Result<Self> {
        if self.half == 0 {
            // zero rate: all mass sits at k = 0
            return Ok(*self);
        }
        let next = Self {
            center: self.center,
            half: self.half * 2,
        };
        if next.width() > policy.max_terms {
            return Err(Error::TruncationFailure {
                axis: axis.name(),
                max_terms: policy.max_terms,
            });
        }
        Ok(next)
    }

    /// Chernoff bound on the Poisson mass outside the window.
    fn tail_bound(&self, rate: f64) -> f64 {
        if rate == 0.0 {
            return 0.0;
        }
        let chernoff = |k: f64| (-rate + k * (1.0 + rate.ln() - k.ln())).exp();
        // P(K >= hi + 1)
        let k_up = (self.hi() + 1) as f64;
        let upper = if k_up <= rate { 1.0 } else { chernoff(k_up) };
        // P(K <= lo - 1)
        let lower = match self.lo() {
            0 => 0.0,
            1 => (-rate).exp(),
            lo => {
                let k = (lo - 1) as f64;
                if k >= rate {
                    1.0
                } else {
                    chernoff(k)
                }
            }
        };
        (upper + lower).min(1.0)
    }

    /// Indices of the window, starting at the centre and alternating outward.
    fn outward(&self) -> Vec<usize> {
        let (lo, hi) = (self.lo(), self.hi());
        let c = self.center.clamp(lo, hi);
        let mut out = Vec::with_capacity(self.width());
        out.push(c);
        for d in 1..=(hi - lo) {
            if c + d <= hi {
                out.push(c + d);
            }
            if d <= c && c - d >= lo {
                out.push(c - d);
            }
        }
        out
    }
}

/// Poisson probabilities for every index of `w`, anchored at the mode and
/// propagated by the ratio recurrence in both directions.
fn pmf_table(rate: f64, w: &AxisWindow) -> Vec<f64> {
    let (lo, hi) = (w.lo(), w.hi());
    let mut p = vec![0.0; hi - lo + 1];
    if rate == 0.0 {
        if lo == 0 {
            p[0] = 1.0;
        }
        return p;
    }
    let anchor = w.center.clamp(lo, hi);
    p[anchor - lo] = ln_poisson_pmf(rate, anchor).exp();
    for k in anchor..hi {
        p[k + 1 - lo] = p[k - lo] * rate / (k + 1) as f64;
    }
    for k in (lo + 1..=anchor).rev() {
        p[k - 1 - lo] = p[k - lo] * k as f64 / rate;
    }
    p
}

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn certified_windows(
    rates: PoissonPair,
    policy: &TruncationPolicy,
) -> Result<(AxisWindow, AxisWindow)> {
    let mut wx = AxisWindow::initial(rates.rate_x, policy);
    let mut wy = AxisWindow::initial(rates.rate_y, policy);
    for (w, axis) in [(&wx, Axis::X), (&wy, Axis::Y)] {
        if w.width() > policy.max_terms {
            return Err(Error::TruncationFailure {
                axis: axis.name(),
                max_terms: policy.max_terms,
            });
        }
    }
    let tol = policy.tail_tol;
    loop {
        let tx = wx.tail_bound(rates.rate_x);
        let ty = wy.tail_bound(rates.rate_y);
        if tx + ty < tol {
            return Ok((wx, wy));
        }
        if tx >= tol / 2.0 {
            wx = wx.doubled(Axis::X, policy)?;
        }
        if ty >= tol / 2.0 {
            wy = wy.doubled(Axis::Y, policy)?;
        }
    }
}

fn to_window(wx: &AxisWindow, wy: &AxisWindow) -> SummationWindow {
    SummationWindow {
        k1_lo: wx.lo(),
        k1_hi: wx.hi(),
        k2_lo: wy.lo(),
        k2_hi: wy.hi(),
    }
}

/// Window whose Poisson tail mass is certified below `tail_tol`.
///
/// For `Growth::Bounded` summands this is the window `expectation` sums over.
/// For growing or unknown summands it is the starting window of the
/// stabilization doubling, which `expectation` performs on top of it.
pub fn truncation_window(
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
    growth_hint: Option<Growth>,
) -> Result<SummationWindow> {
    let _ = growth_hint;
    let (wx, wy) = certified_windows(PoissonPair::for_params(params, point), policy)?;
    Ok(to_window(&wx, &wy))
}

#[allow(clippy::too_many_arguments)]
fn sum_region<F>(
    wx: &AxisWindow,
    wy: &AxisWindow,
    px: &[f64],
    py: &[f64],
    exclude: Option<(&AxisWindow, &AxisWindow)>,
    summand: &mut F,
) -> Result<f64>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let cols = wy.outward();
    let mut acc = Compensated::default();
    for k1 in wx.outward() {
        let p1 = px[k1 - wx.lo()];
        if p1 == 0.0 {
            continue;
        }
        let skip_inner = exclude.filter(|(ox, _)| ox.contains(k1)).map(|(_, oy)| oy);
        let mut row = Compensated::default();
        for &k2 in &cols {
            if skip_inner.is_some_and(|oy| oy.contains(k2)) {
                continue;
            }
            let p2 = py[k2 - wy.lo()];
            if p2 == 0.0 {
                continue;
            }
            row.add(p2 * summand(k1, k2)?);
        }
        acc.add(p1 * row.value());
    }
    Ok(acc.value())
}

/// Truncated `Σ Σ P(K1 = k1) P(K2 = k2) g(k1, k2)` for independent Poisson `K1`, `K2`.
///
/// `growth` describes how fast `g` may grow; `Some(Growth::Bounded)` stops at
/// the Chernoff-certified window, anything else continues with stabilization
/// doubling.
pub fn weighted_sum<F>(
    rates: PoissonPair,
    policy: &TruncationPolicy,
    growth: Option<Growth>,
    mut summand: F,
) -> Result<Summation>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let (mut wx, mut wy) = certified_windows(rates, policy)?;
    let mut px = pmf_table(rates.rate_x, &wx);
    let mut py = pmf_table(rates.rate_y, &wy);
    let mut total = Compensated::default();
    total.add(sum_region(&wx, &wy, &px, &py, None, &mut summand)?);

    let fixed = wx.half == 0 && wy.half == 0;
    if growth != Some(Growth::Bounded) && !fixed {
        let mut stable = 0;
        while stable < policy.stabilization_rounds {
            let nx = wx.doubled(Axis::X, policy)?;
            let ny = wy.doubled(Axis::Y, policy)?;
            px = pmf_table(rates.rate_x, &nx);
            py = pmf_table(rates.rate_y, &ny);
            let ring = sum_region(&nx, &ny, &px, &py, Some((&wx, &wy)), &mut summand)?;
            total.add(ring);
            wx = nx;
            wy = ny;
            if ring.abs() < policy.tail_tol {
                stable += 1;
            } else {
                stable = 0;
            }
        }
    }

    let value = total.value();
    if !value.is_finite() {
        return Err(Error::Domain(DomainError::new(
            "series sum is not finite",
            rates.rate_x,
            rates.rate_y,
        )));
    }
    Ok(Summation {
        value,
        window: to_window(&wx, &wy),
    })
}

/// The operator double sum `Σ Σ s^a_{m,n}(x, y) f(k1/m, k2/n)` with its window.
pub fn expectation_detailed(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<Summation> {
    let (m, n) = (f64::from(params.m), f64::from(params.n));
    weighted_sum(
        PoissonPair::for_params(params, point),
        policy,
        f.growth(),
        |k1, k2| Ok(f.eval(k1 as f64 / m, k2 as f64 / n)?),
    )
}

/// The operator double sum `Σ Σ s^a_{m,n}(x, y) f(k1/m, k2/n)`.
pub fn expectation(
    f: &BivariateFunction,
    params: &OperatorParams,
    point: Point2,
    policy: &TruncationPolicy,
) -> Result<f64> {
    expectation_detailed(f, params, point, policy).map(|s| s.value)
}
