//! Drivers for error tables, convergence sweeps, operator comparisons and
//! bound reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcparser::BivariateFunction;
use crate::kernel::{OperatorParams, Point2, Rect, TruncationPolicy};
use crate::moduli::{
    bound_bdiff, bound_gbs, bound_lipschitz_gbs, bound_partial, bound_total, AnalyticModulus,
    LipschitzSpec,
};
use crate::moments::BoundConstants;
use crate::operators::{eval_bivariate, eval_gbs, eval_kantorovich, eval_mfs_gbs, QuadratureSpec};

/// Where operator errors are measured and how they are aggregated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeMode {
    SinglePoint(Point2),
    GridMax { rect: Rect, step: f64 },
    GridMean { rect: Rect, step: f64 },
}

impl Default for ProbeMode {
    /// The point `(0.5, 0.5)`.
    fn default() -> Self {
        ProbeMode::SinglePoint(Point2::new(0.5, 0.5).expect("valid point"))
    }
}

impl ProbeMode {
    fn points(&self) -> Result<Vec<Point2>> {
        match *self {
            ProbeMode::SinglePoint(p) => Ok(vec![p]),
            ProbeMode::GridMax { rect, step } | ProbeMode::GridMean { rect, step } => {
                rect.grid(step)
            }
        }
    }

    fn aggregate(&self, errs: &[f64]) -> f64 {
        match self {
            ProbeMode::GridMean { .. } => errs.iter().sum::<f64>() / errs.len() as f64,
            _ => errs.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Human-readable description for output headers.
    pub fn describe(&self) -> String {
        match self {
            ProbeMode::SinglePoint(p) => format!("point({},{})", p.x(), p.y()),
            ProbeMode::GridMax { rect, step } => {
                format!("grid-max([0,{}]x[0,{}],step={step})", rect.c(), rect.d())
            }
            ProbeMode::GridMean { rect, step } => {
                format!("grid-mean([0,{}]x[0,{}],step={step})", rect.c(), rect.d())
            }
        }
    }
}

/// Aggregated absolute errors `|L f - f|` at one `m = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorTableRow {
    pub m: u32,
    pub n: u32,
    pub err_bivariate: f64,
    pub err_gbs: f64,
    pub err_kantorovich: Option<f64>,
    pub err_mfs_gbs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<ErrorTableRow>,
    pub slope_bivariate: Option<f64>,
    pub slope_gbs: Option<f64>,
    /// True when some family had fewer than four errors above `10·tail_tol`.
    pub noise_floor: bool,
}

fn check_m_list(m_list: &[u32]) -> Result<()> {
    if m_list.is_empty() {
        return Err(Error::InvalidInput("m list must not be empty".into()));
    }
    if m_list.contains(&0) {
        return Err(Error::InvalidInput(
            "m list entries must be positive".into(),
        ));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "m list must be strictly ascending".into(),
        ));
    }
    Ok(())
}

type Evaluator<'a> = dyn Fn(&OperatorParams, Point2) -> Result<f64> + Sync + 'a;

fn probe_error(
    f: &BivariateFunction,
    params: &OperatorParams,
    points: &[Point2],
    probe: &ProbeMode,
    op: &Evaluator<'_>,
) -> Result<f64> {
    let errs = points
        .iter()
        .map(|&p| Ok((op(params, p)? - f.eval_at(p)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(probe.aggregate(&errs))
}

fn table_rows(
    f: &BivariateFunction,
    a: f64,
    m_list: &[u32],
    probe: &ProbeMode,
    policy: &TruncationPolicy,
    with_mfs: bool,
) -> Result<Vec<ErrorTableRow>> {
    check_m_list(m_list)?;
    let points = probe.points()?;
    m_list
        .par_iter()
        .map(|&m| {
            let params = OperatorParams::new(m, m, a)?;
            let err = |op: &Evaluator<'_>| probe_error(f, &params, &points, probe, op);
            Ok(ErrorTableRow {
                m,
                n: m,
                err_bivariate: err(&|pr, p| eval_bivariate(f, pr, p, policy))?,
                err_gbs: err(&|pr, p| eval_gbs(f, pr, p, policy))?,
                err_kantorovich: None,
                err_mfs_gbs: if with_mfs {
                    Some(err(&|pr, p| eval_mfs_gbs(f, pr, p, policy))?)
                } else {
                    None
                },
            })
        })
        .collect()
}

/// One row per `m` (with `n = m`) holding the bivariate and GBS errors.
pub fn run_error_table(
    f: &BivariateFunction,
    a: f64,
    m_list: &[u32],
    probe: ProbeMode,
    policy: &TruncationPolicy,
) -> Result<Vec<ErrorTableRow>> {
    table_rows(f, a, m_list, &probe, policy, false)
}

/// As `run_error_table`, additionally filling `err_mfs_gbs`.
pub fn run_mfs_comparison(
    f: &BivariateFunction,
    a: f64,
    m_list: &[u32],
    probe: ProbeMode,
    policy: &TruncationPolicy,
) -> Result<Vec<ErrorTableRow>> {
    table_rows(f, a, m_list, &probe, policy, true)
}

/// Least-squares slope of `ln y` against `ln x`; `None` below four points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 4 || xs.len() != ys.len() {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Error table plus fitted log-log slopes, ignoring errors below `10·tail_tol`.
pub fn run_convergence_sweep(
    f: &BivariateFunction,
    a: f64,
    m_list: &[u32],
    probe: ProbeMode,
    policy: &TruncationPolicy,
) -> Result<SweepResult> {
    if m_list.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "a convergence sweep needs at least 4 values of m (got {})",
            m_list.len()
        )));
    }
    let rows = run_error_table(f, a, m_list, probe, policy)?;
    let floor = 10.0 * policy.tail_tol();
    let fit = |pick: fn(&ErrorTableRow) -> f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| pick(r) >= floor)
            .map(|r| (f64::from(r.m), pick(r)))
            .unzip();
        loglog_slope(&xs, &ys)
    };
    let slope_bivariate = fit(|r| r.err_bivariate);
    let slope_gbs = fit(|r| r.err_gbs);
    Ok(SweepResult {
        noise_floor: slope_bivariate.is_none() || slope_gbs.is_none(),
        rows,
        slope_bivariate,
        slope_gbs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KantorovichPoint {
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub bivariate: f64,
    pub kantorovich: f64,
    pub err_bivariate: f64,
    pub err_kantorovich: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KantorovichComparison {
    pub m: u32,
    pub a: f64,
    pub points: Vec<KantorovichPoint>,
    pub mean_err_bivariate: f64,
    pub mean_err_kantorovich: f64,
    pub max_err_bivariate: f64,
    pub max_err_kantorovich: f64,
}

/// Both surfaces and their errors on the grid of `rect`, with `m = n`.
pub fn run_kantorovich_comparison(
    f: &BivariateFunction,
    a: f64,
    m: u32,
    rect: Rect,
    step: f64,
    quad: QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<KantorovichComparison> {
    let params = OperatorParams::new(m, m, a)?;
    let points = rect
        .grid(step)?
        .into_par_iter()
        .map(|p| {
            let fv = f.eval_at(p)?;
            let b = eval_bivariate(f, &params, p, policy)?;
            let k = eval_kantorovich(f, &params, p, policy, quad)?;
            Ok(KantorovichPoint {
                x: p.x(),
                y: p.y(),
                f: fv,
                bivariate: b,
                kantorovich: k,
                err_bivariate: (b - fv).abs(),
                err_kantorovich: (k - fv).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = points.len() as f64;
    let mean = |g: fn(&KantorovichPoint) -> f64| points.iter().map(g).sum::<f64>() / n;
    let max = |g: fn(&KantorovichPoint) -> f64| points.iter().map(g).fold(0.0, f64::max);
    Ok(KantorovichComparison {
        m,
        a,
        mean_err_bivariate: mean(|p| p.err_bivariate),
        mean_err_kantorovich: mean(|p| p.err_kantorovich),
        max_err_bivariate: max(|p| p.err_bivariate),
        max_err_kantorovich: max(|p| p.err_kantorovich),
        points,
    })
}

/// Which inequality a bound row checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    /// `|Ŷf - f| <= 2 ω(f; δ_{m,n})`.
    Total,
    /// `|Ŷf - f| <= 2 (ω_1(f; δ_m) + ω_2(f; δ_n))`.
    Partial,
    /// `|GBS f - f| <= 4 ω_B(f; δ'_m, δ'_n)`.
    Gbs,
    /// `|GBS f - f| <= M δ'_m^{μ1} δ'_n^{μ2}`.
    LipschitzGbs,
    /// `|GBS f - f| <= (M4/√(mn)) (3 M3 ‖D_B f‖ + ω_B(D_B f; 1/√m, 1/√n))`.
    Bdiff,
}

impl BoundName {
    pub const ALL: [BoundName; 5] = [
        BoundName::Total,
        BoundName::Partial,
        BoundName::Gbs,
        BoundName::LipschitzGbs,
        BoundName::Bdiff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Total => "total",
            BoundName::Partial => "partial",
            BoundName::Gbs => "gbs",
            BoundName::LipschitzGbs => "lipschitz_gbs",
            BoundName::Bdiff => "bdiff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub m: u32,
    pub n: u32,
    pub x: f64,
    pub y: f64,
    /// Error of the operator the bound is about.
    pub err: f64,
    pub bound_name: BoundName,
    pub bound_value: f64,
    /// `err <= bound_value + 3·tail_tol`.
    pub holds: bool,
}

impl BoundRow {
    /// `bound_value / err`, infinite when the error vanishes.
    pub fn tightness(&self) -> f64 {
        if self.err == 0.0 {
            f64::INFINITY
        } else {
            self.bound_value / self.err
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub all_hold: bool,
}

/// Check every error bound for `f` at `m = n ∈ m_list` and each grid point of `rect`.
///
/// `f` must carry smoothness metadata; the moduli used are its analytic upper bounds.
pub fn run_bound_report(
    f: &BivariateFunction,
    a: f64,
    m_list: &[u32],
    rect: Rect,
    step: f64,
    policy: &TruncationPolicy,
) -> Result<BoundReport> {
    check_m_list(m_list)?;
    let s = *f
        .smoothness()
        .ok_or_else(|| Error::MissingMetadata(f.name().to_string()))?;
    let modulus = AnalyticModulus::of_function(&s);
    let dbf_modulus = AnalyticModulus::of_mixed_derivative(&s);
    let lipschitz = LipschitzSpec::from_smoothness(&s).ok();
    let consts = BoundConstants::for_rect(rect);
    let points = rect.grid(step)?;
    let slack = 3.0 * policy.tail_tol();

    let jobs: Vec<(u32, Point2)> = m_list
        .iter()
        .flat_map(|&m| points.iter().map(move |&p| (m, p)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(m, p)| {
            let params = OperatorParams::new(m, m, a)?;
            let fv = f.eval_at(p)?;
            let err_b = (eval_bivariate(f, &params, p, policy)? - fv).abs();
            let err_g = (eval_gbs(f, &params, p, policy)? - fv).abs();
            let mut rows = Vec::with_capacity(BoundName::ALL.len());
            for name in BoundName::ALL {
                let (err, value) = match name {
                    BoundName::Total => (err_b, bound_total(&modulus, &params, p)?),
                    BoundName::Partial => (err_b, bound_partial(&modulus, &params, p)?),
                    BoundName::Gbs => (err_g, bound_gbs(&modulus, &params, p)?),
                    BoundName::LipschitzGbs => match &lipschitz {
                        Some(spec) => (err_g, bound_lipschitz_gbs(spec, &params, p)),
                        // M = 0: the mixed difference vanishes identically.
                        None => (err_g, 0.0),
                    },
                    BoundName::Bdiff => (
                        err_g,
                        bound_bdiff(s.mixed_derivative_bound, &dbf_modulus, &consts, &params)?,
                    ),
                };
                rows.push(BoundRow {
                    m,
                    n: m,
                    x: p.x(),
                    y: p.y(),
                    err,
                    bound_name: name,
                    bound_value: value,
                    holds: err <= value + slack,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<BoundRow> = chunks.into_iter().flatten().collect();
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(BoundReport { rows, all_hold })
}
