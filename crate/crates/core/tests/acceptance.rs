//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL` line
//! before asserting, so `cargo test --test acceptance -- --nocapture` gives a
//! complete summary even when some criteria fail.

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use szasz_core::experiments::{
    run_bound_report, run_convergence_sweep, run_kantorovich_comparison, run_mfs_comparison,
    BoundName, ProbeMode,
};
use szasz_core::funcparser::{BinOp, Constant, Func, Var, CATALOG_NAMES};
use szasz_core::moments::{central_moment_closed, closed_moment, numeric_moment, MomentOrder};
use szasz_core::{
    catalog, eval_bivariate, eval_gbs, eval_mfs, evaluate, expectation, parse, BivariateFunction,
    Expr, Growth, OperatorKind, OperatorParams, Point2, QuadratureSpec, Rect, TruncationPolicy,
};

const MS: [u32; 5] = [1, 2, 5, 10, 50];
const AS: [f64; 4] = [0.5, 2.0, E, 10.0];
const COORDS: [f64; 5] = [0.0, 0.25, 1.0, 2.0, 3.7];

fn verdict(n: u32, pass: bool, detail: impl AsRef<str>) {
    println!(
        "criterion {n}: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(pass, "criterion {n} failed: {}", detail.as_ref());
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default().with_tail_tol(1e-12).unwrap()
}

fn pt(x: f64, y: f64) -> Point2 {
    Point2::new(x, y).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn grid_combos() -> Vec<(OperatorParams, Point2)> {
    let mut out = Vec::new();
    for &m in &MS {
        for &n in &MS {
            for &a in &AS {
                for &x in &COORDS {
                    for &y in &COORDS {
                        out.push((OperatorParams::new(m, n, a).unwrap(), pt(x, y)));
                    }
                }
            }
        }
    }
    out
}

fn moment_orders() -> Vec<MomentOrder> {
    let mut o = Vec::new();
    for i in 0..=2 {
        for j in 0..=2 {
            o.push(MomentOrder::raw(i, j));
        }
    }
    for i in [0, 1, 2, 4] {
        for j in [0, 1, 2, 4] {
            o.push(MomentOrder::central(i, j));
        }
    }
    o
}

#[test]
fn criterion_01_moment_oracle_equivalence() {
    let start = Instant::now();
    let pol = policy();
    let orders = moment_orders();
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    let mut checked = 0usize;
    for (params, p) in grid_combos() {
        for &o in &orders {
            let closed = closed_moment(&params, p, o).unwrap();
            let numeric = numeric_moment(&params, p, o, &pol).unwrap();
            let rel = if closed == 0.0 {
                numeric.abs()
            } else {
                ((numeric - closed) / closed).abs()
            };
            checked += 1;
            if rel > worst {
                worst = rel;
                worst_case = format!(
                    "m={} n={} a={} ({},{}) {:?}",
                    params.m(),
                    params.n(),
                    params.a(),
                    p.x(),
                    p.y(),
                    o
                );
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(60);
    verdict(
        1,
        pass,
        format!(
            "{checked} moments, max relative error {worst:.3e} at {worst_case}, runtime {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_02_normalization_and_interpolation() {
    let pol = policy();
    let one = BivariateFunction::constant(1.0);
    let mut worst_norm = 0.0f64;
    for (params, p) in grid_combos() {
        let e = expectation(&one, &params, p, &pol).unwrap();
        worst_norm = worst_norm.max((e - 1.0).abs());
    }

    let quad = QuadratureSpec::default();
    let origin = Point2::ORIGIN;
    let mut worst_by_op = Vec::new();
    for op in OperatorKind::ALL {
        let mut worst = 0.0f64;
        for name in CATALOG_NAMES {
            let f = catalog(name).unwrap();
            let f0 = f.eval_at(origin).unwrap();
            for &m in &MS {
                for &a in &AS {
                    let params = OperatorParams::new(m, m, a).unwrap();
                    let v = evaluate(op, &f, &params, origin, &pol, quad).unwrap();
                    worst = worst.max((v - f0).abs());
                }
            }
        }
        worst_by_op.push((op, worst));
    }
    let interp_ok = worst_by_op.iter().all(|&(_, w)| w <= 1e-10);
    let detail = format!(
        "max |E[1]-1| = {worst_norm:.2e}; max |L f(0,0) - f(0,0)|: {}",
        worst_by_op
            .iter()
            .map(|(op, w)| format!("{op} {w:.2e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    verdict(2, worst_norm <= 1e-10 && interp_ok, detail);
}

#[test]
fn criterion_03_bound_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sides = [1.0, 2.0, 4.0];
    let mut violations = 0usize;
    let mut samples = 0usize;
    let mut first = String::new();
    for &c in &sides {
        for &d in &sides {
            let lam = |s: f64| s * (s + 1.0);
            let quartic = |s: f64| s.powi(4) + 6.0 * s.powi(3) + 10.0 * s * s + s;
            for _ in 0..1000 {
                let m = rng.gen_range(1..=1000u32);
                let n = rng.gen_range(1..=1000u32);
                let a = rng.gen_range(1.0f64..=10.0);
                if a == 1.0 {
                    continue;
                }
                let x = rng.gen_range(0.0..=c);
                let y = rng.gen_range(0.0..=d);
                let params = OperatorParams::new(m, n, a).unwrap();
                let p = pt(x, y);
                let (mf, nf) = (f64::from(m), f64::from(n));
                let c2x = central_moment_closed(&params, p, 2, 0).unwrap();
                let c2y = central_moment_closed(&params, p, 0, 2).unwrap();
                let c4x = central_moment_closed(&params, p, 4, 0).unwrap();
                let c4y = central_moment_closed(&params, p, 0, 4).unwrap();
                let checks = [
                    c2x <= x * (x + 1.0) / mf,
                    c2y <= y * (y + 1.0) / nf,
                    c2x <= lam(c) / mf,
                    c2y <= lam(d) / nf,
                    c4x <= quartic(c) / (mf * mf),
                    c4y <= quartic(d) / (nf * nf),
                ];
                samples += 1;
                if let Some(k) = checks.iter().position(|ok| !ok) {
                    violations += 1;
                    if first.is_empty() {
                        first = format!("check {k} at m={m} n={n} a={a} ({x},{y}) c={c} d={d}");
                    }
                }
            }
        }
    }
    let detail = if violations == 0 {
        format!("{samples} samples over 9 rectangles, a in (1,10], zero violations")
    } else {
        format!("{violations} violations in {samples} samples, first: {first}")
    };
    verdict(3, violations == 0, detail);
}

/// Sections `x -> F(x, y0)` and `y -> G(x0, y)` of catalog functions.
fn separable(fx: &str, gy: &str, x0: f64, y0: f64) -> BivariateFunction {
    let f = catalog(fx).unwrap();
    let g = catalog(gy).unwrap();
    let growth =
        if f.growth() == Some(Growth::Exponential) || g.growth() == Some(Growth::Exponential) {
            Growth::Exponential
        } else {
            Growth::Polynomial
        };
    BivariateFunction::from_fn(format!("{fx}(x,{y0}) + {gy}({x0},y)"), move |x, y| {
        Ok(f.eval(x, y0)? + g.eval(x0, y)?)
    })
    .with_growth(growth)
}

#[test]
fn criterion_04_gbs_structure() {
    let pol = policy();
    let tol = 3.0 * pol.tail_tol();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_exact = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut combos = 0usize;
    let mut probes = Vec::new();
    for _ in 0..100 {
        let m = rng.gen_range(1..=100u32);
        let n = rng.gen_range(1..=100u32);
        let a = if rng.gen_bool(0.5) {
            rng.gen_range(0.2..0.95)
        } else {
            rng.gen_range(1.05..10.0)
        };
        let x = rng.gen_range(0.0..2.0);
        let y = rng.gen_range(0.0..2.0);
        probes.push((OperatorParams::new(m, n, a).unwrap(), pt(x, y)));
    }
    for fx in CATALOG_NAMES {
        for gy in CATALOG_NAMES {
            let f = separable(fx, gy, 0.3, 0.7);
            combos += 1;
            for (params, p) in &probes {
                let g = eval_gbs(&f, params, *p, &pol).unwrap();
                worst_exact = worst_exact.max((g - f.eval_at(*p).unwrap()).abs());
            }
        }
    }
    for (params, p) in &probes {
        let (x, y) = (p.x(), p.y());
        let dt = BivariateFunction::from_fn("t-x", move |t, _| Ok(t - x));
        let ds = BivariateFunction::from_fn("s-y", move |_, s| Ok(s - y));
        worst_moment = worst_moment.max(eval_gbs(&dt, params, *p, &pol).unwrap().abs());
        worst_moment = worst_moment.max(eval_gbs(&ds, params, *p, &pol).unwrap().abs());
    }
    let pass = worst_exact <= tol && worst_moment <= pol.tail_tol();
    verdict(
        4,
        pass,
        format!(
            "{combos} separable combinations x 100 probes: max error {worst_exact:.2e}; \
             max |GBS(t-x)|, |GBS(s-y)| = {worst_moment:.2e}"
        ),
    );
}

#[test]
fn criterion_05_convergence_orders() {
    let start = Instant::now();
    let f = catalog("x_sin_pi_y").unwrap();
    let ms = [10, 20, 40, 80, 160, 320, 640];
    let probe = ProbeMode::SinglePoint(pt(0.5, 0.5));
    let sweep = run_convergence_sweep(&f, 2.0, &ms, probe, &policy()).unwrap();
    let elapsed = start.elapsed();
    let sb = sweep.slope_bivariate.unwrap_or(f64::NAN);
    let sg = sweep.slope_gbs.unwrap_or(f64::NAN);
    let ordered = sweep.rows.iter().all(|r| r.err_gbs < r.err_bivariate);
    for r in &sweep.rows {
        println!(
            "  m={:4} err_bivariate={:.6e} err_gbs={:.6e}",
            r.m, r.err_bivariate, r.err_gbs
        );
    }
    let pass = (-1.3..=-0.7).contains(&sb)
        && (-2.3..=-1.7).contains(&sg)
        && ordered
        && elapsed < Duration::from_secs(120);
    verdict(
        5,
        pass,
        format!(
            "slope_bivariate {sb:.4}, slope_gbs {sg:.4}, gbs below bivariate in every row: {ordered}, runtime {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_06_mfs_comparison() {
    let f = catalog("exp_x_plus_y").unwrap();
    let ms = [10, 20, 50, 100];
    let rows = run_mfs_comparison(
        &f,
        2.0,
        &ms,
        ProbeMode::SinglePoint(pt(0.5, 0.5)),
        &policy(),
    )
    .unwrap();
    let mut ratios_ok = true;
    for r in &rows {
        let mfs = r.err_mfs_gbs.unwrap();
        println!(
            "  m={:3} err_mfs_gbs={mfs:.6e} err_gbs={:.6e} ratio={:.4}",
            r.m,
            r.err_gbs,
            mfs / r.err_gbs
        );
        ratios_ok &= mfs / r.err_gbs > 1.0;
    }
    let mut factors = Vec::new();
    for lo in &rows {
        if let Some(hi) = rows.iter().find(|r| r.m == 2 * lo.m) {
            factors.push((
                lo.m,
                lo.err_mfs_gbs.unwrap() / hi.err_mfs_gbs.unwrap(),
                lo.err_gbs / hi.err_gbs,
            ));
        }
    }
    let factors_ok = !factors.is_empty()
        && factors
            .iter()
            .all(|&(_, a, b)| (3.0..=6.0).contains(&a) && (3.0..=6.0).contains(&b));
    verdict(
        6,
        ratios_ok && factors_ok,
        format!(
            "ratio > 1 in every row: {ratios_ok}; doubling factors (m, mfs_gbs, gbs): {}",
            factors
                .iter()
                .map(|(m, a, b)| format!("({m}, {a:.3}, {b:.3})"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    );
}

#[test]
fn criterion_07_error_bound_inequalities() {
    let rect = Rect::square(1.0).unwrap();
    let mut checked = 0usize;
    let mut violations = Vec::new();
    let mut functions = Vec::new();
    for name in CATALOG_NAMES {
        let f = catalog(name).unwrap();
        if f.smoothness().is_none() {
            continue;
        }
        functions.push(name);
        let report = run_bound_report(&f, 2.0, &[10, 50, 100], rect, 0.25, &policy()).unwrap();
        for r in &report.rows {
            if matches!(
                r.bound_name,
                BoundName::Total | BoundName::Gbs | BoundName::LipschitzGbs
            ) {
                checked += 1;
                if !r.holds {
                    violations.push(format!(
                        "{name} {} m={} ({},{}) err={:.3e} bound={:.3e}",
                        r.bound_name.as_str(),
                        r.m,
                        r.x,
                        r.y,
                        r.err,
                        r.bound_value
                    ));
                }
            }
        }
    }
    verdict(
        7,
        violations.is_empty() && checked > 0,
        format!(
            "{checked} inequalities for {}: {} violations{}",
            functions.join(", "),
            violations.len(),
            violations
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_08_kantorovich_comparison() {
    let start = Instant::now();
    let f = catalog("x2y_xm1_sin2piy").unwrap();
    let rect = Rect::square(2.0).unwrap();
    let cmp =
        run_kantorovich_comparison(&f, 2.0, 10, rect, 0.1, QuadratureSpec::default(), &policy())
            .unwrap();
    verdict(
        8,
        cmp.points.len() == 441 && cmp.mean_err_bivariate < cmp.mean_err_kantorovich,
        format!(
            "{} grid points: mean |Y f - f| = {:.6e}, mean |K f - f| = {:.6e}, runtime {}",
            cmp.points.len(),
            cmp.mean_err_bivariate,
            cmp.mean_err_kantorovich,
            secs(start.elapsed())
        ),
    );
}

#[test]
fn criterion_09_classical_limit() {
    let pol = policy();
    let near = OperatorParams::new(10, 10, 1.0 + 1e-6).unwrap();
    let classical = OperatorParams::new(10, 10, 2.0).unwrap();
    let grid = Rect::square(2.0).unwrap().grid(0.5).unwrap();
    let mut worst = 0.0f64;
    for name in CATALOG_NAMES {
        let f = catalog(name).unwrap();
        for &p in &grid {
            let b = eval_bivariate(&f, &near, p, &pol).unwrap();
            let c = eval_mfs(&f, &classical, p, &pol).unwrap();
            worst = worst.max((b - c).abs());
        }
    }
    verdict(
        9,
        worst <= 1e-4,
        format!(
            "max |Y(a=1+1e-6) f - MFS f| = {worst:.3e} over 6 functions x {} points",
            grid.len()
        ),
    );
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => Expr::Var(Var::X),
            1 => Expr::Var(Var::Y),
            2 => Expr::Const(if rng.gen_bool(0.5) {
                Constant::Pi
            } else {
                Constant::E
            }),
            3 => Expr::Num(f64::from(rng.gen_range(0..100u32))),
            4 => Expr::Num(rng.gen_range(0.0..10.0)),
            _ => Expr::Num(10f64.powi(rng.gen_range(-8..8)) * rng.gen_range(1.0..2.0)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..7) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Call(Func::ALL[rng.gen_range(0..Func::ALL.len())], sub(rng)),
        k => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][(k - 2) as usize];
            Expr::Binary(op, sub(rng), sub(rng))
        }
    }
}

type Hand = fn(f64, f64) -> f64;

#[test]
fn criterion_10_parser_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut round_trip_failures = Vec::new();
    for _ in 0..1000 {
        let e = random_expr(&mut rng, 6);
        let text = e.to_string();
        match parse(&text) {
            Ok(back) if back == e => {}
            Ok(back) => round_trip_failures.push(format!("{text} reparsed as {back}")),
            Err(err) => round_trip_failures.push(format!("{text}: {err}")),
        }
    }

    let hand: [(&str, Hand); 6] = [
        ("x_sin_pi_y", |x, y| x * (PI * y).sin()),
        ("sin_x_plus_y", |x, y| (x + y).sin()),
        ("x2y_xm1_sin2piy", |x, y| {
            x * x * y * (x - 1.0) * (2.0 * PI * y).sin()
        }),
        ("x2y_cos_piy", |x, y| x * x * y * (PI * y).cos()),
        ("y2_cos_2pix", |x, y| y * y * (2.0 * PI * x).cos()),
        ("exp_x_plus_y", |x, y| (x + y).exp()),
    ];
    let mut worst = 0.0f64;
    for (name, h) in hand {
        let f = catalog(name).unwrap();
        let side = f.domain().map_or(1.0, |r| r.c());
        for _ in 0..100 {
            let x = rng.gen_range(0.0..=side);
            let y = rng.gen_range(0.0..=side);
            worst = worst.max((f.eval(x, y).unwrap() - h(x, y)).abs());
        }
    }
    verdict(
        10,
        round_trip_failures.is_empty() && worst <= 1e-14,
        format!(
            "1000 fuzzed expressions, {} round-trip failures{}; catalog max deviation {worst:.2e}",
            round_trip_failures.len(),
            round_trip_failures
                .first()
                .map(|s| format!(", first: {s}"))
                .unwrap_or_default()
        ),
    );
}
