//! Command-line front end: argument parsing, report assembly and CSV/JSON output.
//!
//! [`run`] never calls `process::exit`; it returns the exit code so the binary
//! and the tests share one code path.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::{
    run_bound_report, run_convergence_sweep, run_error_table, run_kantorovich_comparison,
    run_mfs_comparison, ProbeMode,
};
use crate::funcparser::{catalog, BivariateFunction};
use crate::kernel::{expectation, Axis, OperatorParams, Point2, Rect, TruncationPolicy};
use crate::moduli::{
    default_grid_step, mixed_modulus, partial_modulus, total_modulus, AnalyticModulus,
    ModulusEstimate, ModulusProvider,
};
use crate::moments::{moment_report, MomentOrder};
use crate::operators::{eval_gbs, evaluate, OperatorKind, QuadratureSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_EVAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "szasz",
    version,
    about = "Szász-type operator evaluation and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Tail mass allowed outside each summation window.
    #[arg(long, default_value_t = 1e-12, global = true)]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeArg {
    Point,
    GridMax,
    GridMean,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one operator at a point or over a grid.
    Eval(EvalArgs),
    /// Compare closed-form moments with truncated sums.
    Moments(MomentsArgs),
    /// Check GBS exactness on a separable function and first-moment annihilation.
    GbsCheck(GbsCheckArgs),
    /// Bivariate and GBS errors for a list of m = n.
    Table(TableArgs),
    /// MFS-GBS against GBS errors for a list of m = n.
    CompareMfs(TableArgs),
    /// Point-sampling against cell-averaging operator on a grid.
    CompareKantorovich(KantorovichArgs),
    /// Error table plus fitted log-log convergence slopes.
    Sweep(TableArgs),
    /// Check the error bounds for a catalog function.
    Bounds(BoundsArgs),
    /// Grid estimates of the moduli of continuity and smoothness.
    Modulus(ModulusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Function expression in x and y.
    #[arg(long = "f", value_name = "EXPR", conflicts_with = "catalog")]
    pub expr: Option<String>,

    /// Name of a built-in catalog function.
    #[arg(long, value_name = "NAME")]
    pub catalog: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    /// Defaults to m.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub y: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Rectangle [0,C]x[0,D] given as `C,D`.
    #[arg(long, value_name = "C,D", value_parser = parse_rect)]
    pub rect: Option<Rect>,
    /// Grid step.
    #[arg(long, value_name = "H")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// bivariate, gbs, kantorovich, mfs or mfs-gbs.
    #[arg(long, default_value = "bivariate")]
    pub op: OperatorKind,
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = QuadratureSpec::DEFAULT_ORDER)]
    pub quad_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub point: PointArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GbsCheckArgs {
    /// Separable test function; defaults to `sin(x) + y^2`.
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub point: PointArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Comma-separated values of m (with n = m).
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value_t = ProbeArg::Point)]
    pub probe: ProbeArg,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KantorovichArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = QuadratureSpec::DEFAULT_ORDER)]
    pub quad_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Distance for the total and partial moduli, and first distance of the mixed one.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Second distance of the mixed modulus; defaults to `--delta`.
    #[arg(long)]
    pub delta2: Option<f64>,
}

fn parse_rect(s: &str) -> std::result::Result<Rect, String> {
    let (c, d) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `C,D`, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad rectangle side `{t}`: {e}"))
    };
    Rect::new(num(c)?, num(d)?).map_err(|e| e.to_string())
}

/// Everything a subcommand produces before it is written out.
struct Report {
    command: &'static str,
    params: Vec<(&'static str, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    records: Value,
    summary: Vec<(&'static str, Value)>,
}

impl Report {
    fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            params: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            records: Value::Array(Vec::new()),
            summary: Vec::new(),
        }
    }

    fn param(&mut self, key: &'static str, value: impl ToString) {
        self.params.push((key, value.to_string()));
    }

    /// Shortest round-trip form, e.g. `1e-12` or `2.0`.
    fn param_f64(&mut self, key: &'static str, value: f64) {
        self.params.push((key, format!("{value:?}")));
    }

    fn param_function(&mut self, f: &BivariateFunction) {
        self.param("f", f.name());
        if let Some(e) = f.expr() {
            let text = e.to_string();
            if text != f.name() {
                self.param("expr", text);
            }
        }
    }

    fn header_line(&self) -> String {
        let mut line = format!("# szasz {}", self.command);
        for (k, v) in &self.params {
            if v.is_empty() || v.contains([' ', '"', '#']) {
                line.push_str(&format!(" {k}={}", Value::String(v.clone())));
            } else {
                line.push_str(&format!(" {k}={v}"));
            }
        }
        line
    }

    fn to_json(&self) -> Value {
        let params: serde_json::Map<String, Value> = self
            .params
            .iter()
            .map(|(k, v)| ((*k).to_string(), Value::String(v.clone())))
            .collect();
        let summary: serde_json::Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| ((*k).to_string(), v.clone()))
            .collect();
        json!({
            "command": self.command,
            "params": params,
            "rows": self.records,
            "summary": summary,
        })
    }
}

/// Round-trip-safe scientific formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Six significant digits for human-facing summaries.
fn fmt_short(v: f64) -> String {
    format!("{v:.5e}")
}

fn records<T: Serialize>(items: &[T]) -> Value {
    serde_json::to_value(items).unwrap_or(Value::Null)
}

fn load_function(args: &FunctionArgs, default: &str) -> Result<BivariateFunction> {
    match (&args.expr, &args.catalog) {
        (Some(src), _) => BivariateFunction::parse(src),
        (None, Some(name)) => catalog(name),
        (None, None) => catalog(default),
    }
}

fn policy(tail_tol: f64) -> Result<TruncationPolicy> {
    TruncationPolicy::default().with_tail_tol(tail_tol)
}

fn resolve_grid(grid: &GridArgs, default_side: f64, default_step: f64) -> Result<(Rect, f64)> {
    let rect = match grid.rect {
        Some(r) => r,
        None => Rect::square(default_side)?,
    };
    let step = grid.step.unwrap_or(default_step);
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "--step must be positive (got {step})"
        )));
    }
    Ok((rect, step))
}

fn resolve_probe(args: &TableArgs) -> Result<ProbeMode> {
    match args.probe {
        ProbeArg::Point => Ok(ProbeMode::SinglePoint(Point2::new(
            args.point.x,
            args.point.y,
        )?)),
        ProbeArg::GridMax => {
            let (rect, step) = resolve_grid(&args.grid, 1.0, 0.25)?;
            Ok(ProbeMode::GridMax { rect, step })
        }
        ProbeArg::GridMean => {
            let (rect, step) = resolve_grid(&args.grid, 1.0, 0.25)?;
            Ok(ProbeMode::GridMean { rect, step })
        }
    }
}

fn join_list(ms: &[u32]) -> String {
    ms.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn cmd_eval(args: &EvalArgs, tail_tol: f64) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let quad = QuadratureSpec::new(args.quad_order)?;
    let n = args.params.n.unwrap_or(args.params.m);
    let params = OperatorParams::new(args.params.m, n, args.params.a)?;
    let points = match args.grid.rect {
        Some(rect) => {
            let step = args
                .grid
                .step
                .ok_or_else(|| Error::InvalidInput("--rect requires --step".into()))?;
            rect.grid(step)?
        }
        None => vec![Point2::new(args.point.x, args.point.y)?],
    };
    let f = load_function(&args.function, "x_sin_pi_y")?;

    let mut rep = Report::new(
        "eval",
        &["op", "m", "n", "a", "x", "y", "value", "f", "abs_err"],
    );
    rep.param("op", args.op);
    rep.param_function(&f);
    rep.param("m", params.m());
    rep.param("n", params.n());
    rep.param_f64("a", params.a());
    match args.grid.rect {
        Some(rect) => {
            rep.param("rect", format!("{},{}", rect.c(), rect.d()));
            rep.param_f64("step", args.grid.step.unwrap_or_default());
        }
        None => {
            rep.param_f64("x", args.point.x);
            rep.param_f64("y", args.point.y);
        }
    }
    rep.param("quad_order", quad.order());
    rep.param_f64("tail_tol", tail_tol);

    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let value = evaluate(args.op, &f, &params, p, &pol, quad)?;
        let fv = f.eval_at(p)?;
        rep.rows.push(vec![
            args.op.to_string(),
            params.m().to_string(),
            params.n().to_string(),
            fmt_f64(params.a()),
            fmt_f64(p.x()),
            fmt_f64(p.y()),
            fmt_f64(value),
            fmt_f64(fv),
            fmt_f64((value - fv).abs()),
        ]);
        out.push(json!({
            "op": args.op.as_str(), "m": params.m(), "n": params.n(), "a": params.a(),
            "x": p.x(), "y": p.y(), "value": value, "f": fv, "abs_err": (value - fv).abs(),
        }));
    }
    rep.records = Value::Array(out);
    Ok(rep)
}

/// Every order with a closed form: raw up to (2, 2), central over {0, 1, 2, 4}².
pub fn moment_orders() -> Vec<MomentOrder> {
    let mut orders = Vec::new();
    for i in 0..=2 {
        for j in 0..=2 {
            orders.push(MomentOrder::raw(i, j));
        }
    }
    for i in [0, 1, 2, 4] {
        for j in [0, 1, 2, 4] {
            orders.push(MomentOrder::central(i, j));
        }
    }
    orders
}

fn cmd_moments(args: &MomentsArgs, tail_tol: f64) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let n = args.params.n.unwrap_or(args.params.m);
    let params = OperatorParams::new(args.params.m, n, args.params.a)?;
    let point = Point2::new(args.point.x, args.point.y)?;

    let mut rep = Report::new(
        "moments",
        &[
            "i",
            "j",
            "centered",
            "closed_form",
            "numeric",
            "abs_diff",
            "rel_diff",
        ],
    );
    rep.param("m", params.m());
    rep.param("n", params.n());
    rep.param_f64("a", params.a());
    rep.param_f64("x", point.x());
    rep.param_f64("y", point.y());
    rep.param_f64("tail_tol", tail_tol);

    let reports = moment_orders()
        .into_iter()
        .map(|o| moment_report(&params, point, o, &pol))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for r in &reports {
        worst = worst.max(r.rel_diff);
        rep.rows.push(vec![
            r.order.i.to_string(),
            r.order.j.to_string(),
            r.order.centered.to_string(),
            fmt_f64(r.closed_form),
            fmt_f64(r.numeric),
            fmt_f64(r.abs_diff),
            fmt_f64(r.rel_diff),
        ]);
    }
    rep.records = records(&reports);
    rep.summary.push(("max_rel_diff", json!(worst)));
    Ok(rep)
}

fn cmd_gbs_check(args: &GbsCheckArgs, tail_tol: f64) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let n = args.params.n.unwrap_or(args.params.m);
    let params = OperatorParams::new(args.params.m, n, args.params.a)?;
    let point = Point2::new(args.point.x, args.point.y)?;
    let f = match (&args.function.expr, &args.function.catalog) {
        (None, None) => BivariateFunction::parse("sin(x) + y^2")?,
        _ => load_function(&args.function, "")?,
    };

    let mut rep = Report::new("gbs-check", &["check", "value", "tolerance", "pass"]);
    rep.param_function(&f);
    rep.param("m", params.m());
    rep.param("n", params.n());
    rep.param_f64("a", params.a());
    rep.param_f64("x", point.x());
    rep.param_f64("y", point.y());
    rep.param_f64("tail_tol", tail_tol);

    let (x, y) = (point.x(), point.y());
    let shift_t = BivariateFunction::from_fn("t - x", move |t, _| Ok(t - x));
    let shift_s = BivariateFunction::from_fn("s - y", move |_, s| Ok(s - y));
    let tol = 3.0 * tail_tol;
    let checks = [
        (
            "separable_exactness",
            (eval_gbs(&f, &params, point, &pol)? - f.eval_at(point)?).abs(),
        ),
        (
            "first_moment_t",
            eval_gbs(&shift_t, &params, point, &pol)?.abs(),
        ),
        (
            "first_moment_s",
            eval_gbs(&shift_s, &params, point, &pol)?.abs(),
        ),
        (
            "normalization",
            (expectation(&BivariateFunction::constant(1.0), &params, point, &pol)? - 1.0).abs(),
        ),
    ];
    let mut out = Vec::new();
    for (name, value) in checks {
        let pass = value <= tol;
        rep.rows.push(vec![
            name.into(),
            fmt_f64(value),
            fmt_f64(tol),
            pass.to_string(),
        ]);
        out.push(json!({"check": name, "value": value, "tolerance": tol, "pass": pass}));
    }
    rep.records = Value::Array(out);
    Ok(rep)
}

enum TableFlavor {
    Table,
    Mfs,
    Sweep,
}

fn cmd_table(args: &TableArgs, tail_tol: f64, flavor: TableFlavor) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let probe = resolve_probe(args)?;
    let (command, default_f, default_ms, columns): (_, _, &[u32], &[&str]) = match flavor {
        TableFlavor::Table => (
            "table",
            "x_sin_pi_y",
            &[10, 20, 40, 80, 160, 320, 640],
            &["m", "n", "err_bivariate", "err_gbs"],
        ),
        TableFlavor::Mfs => (
            "compare-mfs",
            "exp_x_plus_y",
            &[10, 20, 50, 100],
            &["m", "n", "err_mfs_gbs", "err_gbs"],
        ),
        TableFlavor::Sweep => (
            "sweep",
            "x_sin_pi_y",
            &[10, 20, 40, 80, 160, 320, 640],
            &["m", "n", "err_bivariate", "err_gbs"],
        ),
    };
    let ms = args.m_list.clone().unwrap_or_else(|| default_ms.to_vec());
    let f = load_function(&args.function, default_f)?;

    let mut rep = Report::new(command, columns);
    rep.param_function(&f);
    rep.param_f64("a", args.a);
    rep.param("m_list", join_list(&ms));
    rep.param("probe", probe.describe());
    rep.param_f64("tail_tol", tail_tol);

    let rows = match flavor {
        TableFlavor::Table => run_error_table(&f, args.a, &ms, probe, &pol)?,
        TableFlavor::Mfs => run_mfs_comparison(&f, args.a, &ms, probe, &pol)?,
        TableFlavor::Sweep => {
            let sweep = run_convergence_sweep(&f, args.a, &ms, probe, &pol)?;
            rep.summary
                .push(("slope_bivariate", json!(sweep.slope_bivariate)));
            rep.summary.push(("slope_gbs", json!(sweep.slope_gbs)));
            rep.summary.push(("noise_floor", json!(sweep.noise_floor)));
            sweep.rows
        }
    };
    for r in &rows {
        let mut row = vec![r.m.to_string(), r.n.to_string()];
        match flavor {
            TableFlavor::Mfs => {
                let mfs = r.err_mfs_gbs.unwrap_or(f64::NAN);
                row.push(fmt_f64(mfs));
                row.push(fmt_f64(r.err_gbs));
            }
            _ => {
                row.push(fmt_f64(r.err_bivariate));
                row.push(fmt_f64(r.err_gbs));
            }
        }
        rep.rows.push(row);
    }
    if let TableFlavor::Mfs = flavor {
        let ratios: Vec<Option<f64>> = rows
            .iter()
            .map(|r| r.err_mfs_gbs.map(|e| e / r.err_gbs))
            .collect();
        rep.summary.push(("ratio_mfs_gbs_over_gbs", json!(ratios)));
    }
    rep.records = records(&rows);
    Ok(rep)
}

fn cmd_kantorovich(args: &KantorovichArgs, tail_tol: f64) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let quad = QuadratureSpec::new(args.quad_order)?;
    let (rect, step) = resolve_grid(&args.grid, 2.0, 0.1)?;
    OperatorParams::new(args.m, args.m, args.a)?;
    let f = load_function(&args.function, "x2y_xm1_sin2piy")?;

    let mut rep = Report::new(
        "compare-kantorovich",
        &[
            "x",
            "y",
            "f",
            "bivariate",
            "kantorovich",
            "err_bivariate",
            "err_kantorovich",
        ],
    );
    rep.param_function(&f);
    rep.param("m", args.m);
    rep.param("n", args.m);
    rep.param_f64("a", args.a);
    rep.param("rect", format!("{},{}", rect.c(), rect.d()));
    rep.param_f64("step", step);
    rep.param("quad_order", quad.order());
    rep.param_f64("tail_tol", tail_tol);

    let cmp = run_kantorovich_comparison(&f, args.a, args.m, rect, step, quad, &pol)?;
    for p in &cmp.points {
        rep.rows.push(
            [
                p.x,
                p.y,
                p.f,
                p.bivariate,
                p.kantorovich,
                p.err_bivariate,
                p.err_kantorovich,
            ]
            .into_iter()
            .map(fmt_f64)
            .collect(),
        );
    }
    rep.records = records(&cmp.points);
    rep.summary
        .push(("mean_err_bivariate", json!(cmp.mean_err_bivariate)));
    rep.summary
        .push(("mean_err_kantorovich", json!(cmp.mean_err_kantorovich)));
    rep.summary
        .push(("max_err_bivariate", json!(cmp.max_err_bivariate)));
    rep.summary
        .push(("max_err_kantorovich", json!(cmp.max_err_kantorovich)));
    Ok(rep)
}

fn cmd_bounds(args: &BoundsArgs, tail_tol: f64) -> Result<Report> {
    let pol = policy(tail_tol)?;
    let (rect, step) = resolve_grid(&args.grid, 1.0, 0.25)?;
    let ms = args.m_list.clone().unwrap_or_else(|| vec![10, 50, 100]);
    let f = load_function(&args.function, "x_sin_pi_y")?;

    let mut rep = Report::new(
        "bounds",
        &[
            "m",
            "n",
            "x",
            "y",
            "err",
            "bound_name",
            "bound_value",
            "holds",
        ],
    );
    rep.param_function(&f);
    rep.param_f64("a", args.a);
    rep.param("m_list", join_list(&ms));
    rep.param("rect", format!("{},{}", rect.c(), rect.d()));
    rep.param_f64("step", step);
    rep.param_f64("tail_tol", tail_tol);

    let report = run_bound_report(&f, args.a, &ms, rect, step, &pol)?;
    for r in &report.rows {
        rep.rows.push(vec![
            r.m.to_string(),
            r.n.to_string(),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.err),
            r.bound_name.as_str().into(),
            fmt_f64(r.bound_value),
            r.holds.to_string(),
        ]);
    }
    rep.records = records(&report.rows);
    rep.summary.push(("all_hold", json!(report.all_hold)));
    rep.summary.push((
        "violations",
        json!(report.rows.iter().filter(|r| !r.holds).count()),
    ));
    Ok(rep)
}

fn cmd_modulus(args: &ModulusArgs, _tail_tol: f64) -> Result<Report> {
    let f = load_function(&args.function, "x_sin_pi_y")?;
    let rect = match args.grid.rect {
        Some(r) => r,
        None => f.domain().map_or_else(|| Rect::square(1.0), Ok)?,
    };
    let step = args.grid.step.unwrap_or_else(|| default_grid_step(rect));
    let (d1, d2) = (args.delta, args.delta2.unwrap_or(args.delta));

    let mut rep = Report::new(
        "modulus",
        &[
            "kind",
            "source",
            "delta1",
            "delta2",
            "value",
            "grid_step",
            "is_lower_bound",
        ],
    );
    rep.param_function(&f);
    rep.param("rect", format!("{},{}", rect.c(), rect.d()));
    rep.param_f64("step", step);
    rep.param_f64("delta", d1);
    rep.param_f64("delta2", d2);

    let estimates: Vec<ModulusEstimate> = vec![
        total_modulus(&f, rect, d1, step)?,
        partial_modulus(&f, rect, Axis::X, d1, step)?,
        partial_modulus(&f, rect, Axis::Y, d1, step)?,
        mixed_modulus(&f, rect, d1, d2, step)?,
    ];
    let mut out = Vec::new();
    let kind_name = |e: &ModulusEstimate| {
        serde_json::to_value(e.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    };
    for e in &estimates {
        let kind = kind_name(e);
        rep.rows.push(vec![
            kind.clone(),
            "grid".into(),
            fmt_f64(e.delta1),
            fmt_f64(e.delta2),
            fmt_f64(e.value),
            fmt_f64(e.grid_step),
            e.is_lower_bound.to_string(),
        ]);
        out.push(json!({
            "kind": kind, "source": "grid", "delta1": e.delta1, "delta2": e.delta2,
            "value": e.value, "grid_step": e.grid_step, "is_lower_bound": e.is_lower_bound,
        }));
    }
    if let Ok(analytic) = AnalyticModulus::for_function(&f) {
        let values = [
            ("total", d1, 0.0, analytic.total(d1)?),
            ("partial_x", d1, 0.0, analytic.partial(Axis::X, d1)?),
            ("partial_y", d1, 0.0, analytic.partial(Axis::Y, d1)?),
            ("mixed", d1, d2, analytic.mixed(d1, d2)?),
        ];
        for (kind, a1, a2, value) in values {
            rep.rows.push(vec![
                kind.into(),
                "analytic".into(),
                fmt_f64(a1),
                fmt_f64(a2),
                fmt_f64(value),
                String::new(),
                "false".into(),
            ]);
            out.push(json!({
                "kind": kind, "source": "analytic", "delta1": a1, "delta2": a2,
                "value": value, "grid_step": null, "is_lower_bound": false,
            }));
        }
    }
    rep.records = Value::Array(out);
    Ok(rep)
}

fn execute(cli: &Cli) -> Result<Report> {
    let tol = cli.tail_tol;
    match &cli.command {
        Command::Eval(a) => cmd_eval(a, tol),
        Command::Moments(a) => cmd_moments(a, tol),
        Command::GbsCheck(a) => cmd_gbs_check(a, tol),
        Command::Table(a) => cmd_table(a, tol, TableFlavor::Table),
        Command::CompareMfs(a) => cmd_table(a, tol, TableFlavor::Mfs),
        Command::CompareKantorovich(a) => cmd_kantorovich(a, tol),
        Command::Sweep(a) => cmd_table(a, tol, TableFlavor::Sweep),
        Command::Bounds(a) => cmd_bounds(a, tol),
        Command::Modulus(a) => cmd_modulus(a, tol),
    }
}

fn write_csv(rep: &Report, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{}", rep.header_line())?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&rep.columns)?;
    for row in &rep.rows {
        w.write_record(row)?;
    }
    w.flush()
}

fn write_report(rep: &Report, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(rep, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rep.to_json())?;
            writeln!(out)
        }
    }
}

fn write_summary(rep: &Report, err: &mut dyn Write) -> io::Result<()> {
    for (k, v) in &rep.summary {
        let text = match v {
            Value::Number(n) if n.is_f64() => n.as_f64().map_or_else(|| n.to_string(), fmt_short),
            Value::Array(items) => items
                .iter()
                .map(|i| i.as_f64().map_or_else(|| i.to_string(), fmt_short))
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        writeln!(err, "{k}: {text}")?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_evaluation_error() {
        EXIT_EVAL
    } else {
        EXIT_USAGE
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|file| {
            let mut w = BufWriter::new(file);
            write_report(&report, cli.format, &mut w)?;
            w.flush()
        }),
        None => write_report(&report, cli.format, stdout),
    };
    if let Err(e) = written {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return EXIT_OK;
        }
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_EVAL;
    }
    let _ = write_summary(&report, stderr);
    EXIT_OK
}
