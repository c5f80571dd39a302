use super::*;
use proptest::prelude::*;
use std::f64::consts::E;

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y).unwrap()
}

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

// Printed forms in terms of q = a^{1/d} - 1, kept literal as oracles.
fn q(a: f64, d: f64) -> f64 {
    (a.ln() / d).exp_m1()
}

fn printed_raw2(a: f64, d: f64, u: f64) -> f64 {
    let (q, l) = (q(a, d), a.ln());
    u * l * (q + 1.0 + u * l - 1.0) / (d * d * q * q)
}

fn printed_central2(a: f64, d: f64, u: f64) -> f64 {
    let (q, l) = (q(a, d), a.ln());
    u * (d * d * u * q * q - q * l * (2.0 * d * u - 1.0) + u * l * l) / (d * d * q * q)
}

fn printed_central4(a: f64, d: f64, u: f64) -> f64 {
    let (q, l) = (q(a, d), a.ln());
    let brace = d.powi(4) * u.powi(3) * q.powi(4)
        - q.powi(3) * (-1.0 + 4.0 * d * u - 6.0 * d * d * u * u + 4.0 * d.powi(3) * u.powi(3)) * l
        + q * q * u * (7.0 - 12.0 * d * u + 6.0 * d * d * u * u) * l * l
        - 2.0 * q * u * u * (-3.0 + 2.0 * d * u) * l.powi(3)
        + u.powi(3) * l.powi(4);
    u * brace / (d.powi(4) * q.powi(4))
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs().max(1.0)
}

#[test]
fn raw_examples() {
    let pr = OperatorParams::new(1, 1, E).unwrap();
    assert_eq!(raw_moment_closed(&pr, p(0.0, 2.0), 1, 0).unwrap(), 0.0);
    let v = raw_moment_closed(&pr, p(1.0, 3.0), 1, 0).unwrap();
    assert!((v - 0.581_976_706_869_326_5).abs() < 1e-15);
    assert_eq!(raw_moment_closed(&pr, p(1.0, 3.0), 0, 0).unwrap(), 1.0);
}

#[test]
fn central_examples() {
    let pr = OperatorParams::new(10, 10, 2.0).unwrap();
    assert_eq!(central_moment_closed(&pr, p(0.0, 1.0), 1, 0).unwrap(), 0.0);
    for x in [0.1, 1.0, 3.7] {
        let pt = p(x, 0.5);
        let c2 = central_moment_closed(&pr, pt, 2, 0).unwrap();
        let via_raw = raw_moment_closed(&pr, pt, 2, 0).unwrap()
            - 2.0 * x * raw_moment_closed(&pr, pt, 1, 0).unwrap()
            + x * x;
        assert!(((c2 - via_raw) / c2).abs() < 1e-12, "x={x}");
    }
    let pt = p(1.0, 1.0);
    let c4 = central_moment_closed(&pr, pt, 4, 0).unwrap();
    let num = numeric_moment(&pr, pt, MomentOrder::central(4, 0), &pol()).unwrap();
    assert!(((c4 - num) / c4).abs() < 1e-8, "{c4} vs {num}");
}

#[test]
fn unsupported_orders() {
    let pr = OperatorParams::new(3, 3, 2.0).unwrap();
    assert!(matches!(
        raw_moment_closed(&pr, p(1.0, 1.0), 3, 0),
        Err(Error::UnsupportedOrder {
            i: 3,
            j: 0,
            centered: false
        })
    ));
    assert!(matches!(
        central_moment_closed(&pr, p(1.0, 1.0), 0, 3),
        Err(Error::UnsupportedOrder {
            i: 0,
            j: 3,
            centered: true
        })
    ));
    let bound = central_moment_bound(&pr, BoundTarget::Pointwise(p(1.0, 1.0)), 2, 2);
    assert!(matches!(bound, Err(Error::UnsupportedOrder { .. })));
}

#[test]
fn closed_forms_match_printed_forms() {
    for &a in &[0.5, 2.0, E, 10.0] {
        for &d in &[1.0, 2.0, 5.0, 10.0, 50.0] {
            let pr = OperatorParams::new(d as u32, 1, a).unwrap();
            for &x in &[0.0, 0.25, 1.0, 2.0, 3.7] {
                let pt = p(x, 0.0);
                let r2 = raw_moment_closed(&pr, pt, 2, 0).unwrap();
                let c2 = central_moment_closed(&pr, pt, 2, 0).unwrap();
                let c4 = central_moment_closed(&pr, pt, 4, 0).unwrap();
                assert!(
                    close(r2, printed_raw2(a, d, x), 1e-12),
                    "raw2 a={a} d={d} x={x}"
                );
                assert!(
                    close(c2, printed_central2(a, d, x), 1e-9),
                    "c2 a={a} d={d} x={x}"
                );
                assert!(
                    close(c4, printed_central4(a, d, x), 1e-7),
                    "c4 a={a} d={d} x={x}"
                );
            }
        }
    }
}

#[test]
fn oracle_equivalence_on_grid() {
    let orders = [
        MomentOrder::raw(1, 0),
        MomentOrder::raw(0, 1),
        MomentOrder::raw(2, 0),
        MomentOrder::raw(0, 2),
        MomentOrder::central(1, 0),
        MomentOrder::central(0, 1),
        MomentOrder::central(2, 0),
        MomentOrder::central(0, 2),
        MomentOrder::central(4, 0),
        MomentOrder::central(0, 4),
        MomentOrder::central(2, 2),
    ];
    let coords = [0.0, 0.25, 1.0, 2.0, 3.7];
    let mut worst: f64 = 0.0;
    for &m in &[1u32, 2, 5, 10, 50] {
        for &n in &[1u32, 2, 5, 10, 50] {
            for &a in &[0.5, 2.0, E, 10.0] {
                let pr = OperatorParams::new(m, n, a).unwrap();
                for &x in &coords {
                    for &y in &coords {
                        for order in orders {
                            let r = moment_report(&pr, p(x, y), order, &pol()).unwrap();
                            assert!(r.rel_diff <= 1e-9, "{r:?} m={m} n={n} a={a} ({x},{y})");
                            worst = worst.max(r.rel_diff);
                        }
                    }
                }
            }
        }
    }
    assert!(worst < 1e-9);
}

#[test]
fn transposition_symmetry() {
    let a = OperatorParams::new(7, 13, 3.0).unwrap();
    let b = OperatorParams::new(13, 7, 3.0).unwrap();
    let (pa, pb) = (p(0.4, 2.1), p(2.1, 0.4));
    for (i, j) in [(1, 0), (2, 0), (4, 0), (2, 4), (1, 2)] {
        let l = central_moment_closed(&a, pa, i, j).unwrap();
        let r = central_moment_closed(&b, pb, j, i).unwrap();
        assert_eq!(l, r, "({i},{j})");
    }
    for (i, j) in [(1, 0), (2, 0), (2, 1)] {
        assert_eq!(
            raw_moment_closed(&a, pa, i, j).unwrap(),
            raw_moment_closed(&b, pb, j, i).unwrap()
        );
    }
}

#[test]
fn bound_examples() {
    let pr = OperatorParams::new(10, 10, 2.0).unwrap();
    let at = |x, y| BoundTarget::Pointwise(p(x, y));
    assert_eq!(central_moment_bound(&pr, at(0.0, 0.0), 2, 0).unwrap(), 0.0);
    assert!((central_moment_bound(&pr, at(1.0, 0.0), 2, 0).unwrap() - 0.2).abs() < 1e-15);
    let rect = BoundTarget::Rectangle(Rect::new(1.0, 2.0).unwrap());
    assert!((central_moment_bound(&pr, rect, 2, 0).unwrap() - 0.2).abs() < 1e-15);
    assert!((central_moment_bound(&pr, rect, 0, 2).unwrap() - 0.6).abs() < 1e-15);
    assert!((central_moment_bound(&pr, rect, 4, 0).unwrap() - 0.18).abs() < 1e-15);
}

#[test]
fn bound_constants_arithmetic() {
    let k = BoundConstants::new(1.0, 2.0).unwrap();
    assert_eq!(k.lambda_x, 2.0);
    assert_eq!(k.lambda_y, 6.0);
    assert_eq!(k.m_x, 18.0);
    assert_eq!(k.m_y, 16.0 + 48.0 + 40.0 + 2.0);
    assert!(BoundConstants::new(0.0, 1.0).is_err());
}

#[test]
fn bound_dominance_on_rectangles() {
    for &c in &[1.0, 2.0, 4.0] {
        let rect = Rect::new(c, c).unwrap();
        for &m in &[1u32, 2, 5, 10, 50, 200] {
            for &a in &[1.5, 2.0, E, 5.0, 10.0] {
                let pr = OperatorParams::new(m, m, a).unwrap();
                let b2 = central_moment_bound(&pr, BoundTarget::Rectangle(rect), 2, 0).unwrap();
                let b4 = central_moment_bound(&pr, BoundTarget::Rectangle(rect), 4, 0).unwrap();
                for i in 0..=40 {
                    let x = c * f64::from(i) / 40.0;
                    let pt = p(x, x);
                    let c2 = central_moment_closed(&pr, pt, 2, 0).unwrap();
                    let c4 = central_moment_closed(&pr, pt, 4, 0).unwrap();
                    let pw = central_moment_bound(&pr, BoundTarget::Pointwise(pt), 2, 0).unwrap();
                    assert!(
                        c2 <= pw * (1.0 + 1e-12),
                        "pointwise c={c} m={m} a={a} x={x}"
                    );
                    assert!(c2 <= b2 * (1.0 + 1e-12), "rect2 c={c} m={m} a={a} x={x}");
                    assert!(c4 <= b4 * (1.0 + 1e-12), "rect4 c={c} m={m} a={a} x={x}");
                }
            }
        }
    }
}

#[test]
fn second_moment_bound_fails_below_one() {
    // r = ln(a)/(m(a^{1/m}-1)) > 1 when a < 1, and x r/m exceeds x(x+1)/m for x < r - 1.
    let pr = OperatorParams::new(1, 1, 0.5).unwrap();
    let pt = p(0.1, 0.1);
    let c2 = central_moment_closed(&pr, pt, 2, 0).unwrap();
    let bound = central_moment_bound(&pr, BoundTarget::Pointwise(pt), 2, 0).unwrap();
    assert!(c2 > bound);
}

#[test]
fn decay_slopes() {
    let pt = p(1.3, 0.8);
    let ms: Vec<u32> = (0..7).map(|k| 10 << k).collect();
    let slope = |i: u32| {
        let pts: Vec<(f64, f64)> = ms
            .iter()
            .map(|&m| {
                let pr = OperatorParams::new(m, m, 2.0).unwrap();
                let v = central_moment_closed(&pr, pt, i, 0).unwrap();
                (f64::from(m).ln(), v.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        num / den
    };
    assert!((slope(2) + 1.0).abs() < 0.1, "{}", slope(2));
    assert!((slope(4) + 2.0).abs() < 0.1, "{}", slope(4));
}

fn direct_mixed(pr: &OperatorParams, pt: Point2, i: u32, j: u32) -> f64 {
    let (m, n) = (f64::from(pr.m()), f64::from(pr.n()));
    let (x, y) = (pt.x(), pt.y());
    weighted_sum(
        PoissonPair::for_params(pr, pt),
        &pol(),
        Some(Growth::Polynomial),
        |k1, k2| Ok((k1 as f64 / m - x).powi(2 * i as i32) * (k2 as f64 / n - y).powi(2 * j as i32)),
    )
    .unwrap()
    .value
}

#[test]
fn mixed_moment_examples() {
    let pr = OperatorParams::new(6, 4, 2.0).unwrap();
    let pt = p(0.9, 1.4);
    assert_eq!(mixed_central_moment(&pr, pt, 0, 0, &pol()).unwrap(), 1.0);
    for (i, j) in [(1, 1), (2, 1), (1, 2), (3, 1), (2, 3)] {
        let prod = mixed_central_moment(&pr, pt, i, j, &pol()).unwrap();
        let direct = direct_mixed(&pr, pt, i, j);
        assert!(
            ((prod - direct) / direct).abs() < 1e-9,
            "({i},{j}) {prod} vs {direct}"
        );
    }
    let c22 = central_moment_closed(&pr, pt, 2, 0).unwrap()
        * central_moment_closed(&pr, pt, 0, 2).unwrap();
    assert_eq!(mixed_central_moment(&pr, pt, 1, 1, &pol()).unwrap(), c22);
}

#[test]
fn delta_examples() {
    let pr = OperatorParams::new(10, 10, 2.0).unwrap();
    assert_eq!(delta_mn(&pr, Point2::ORIGIN), 0.0);
    let pt = p(1.0, 1.0);
    let num = numeric_moment(&pr, pt, MomentOrder::central(2, 0), &pol()).unwrap()
        + numeric_moment(&pr, pt, MomentOrder::central(0, 2), &pol()).unwrap();
    assert!((delta_mn(&pr, pt) / num.sqrt() - 1.0).abs() < 1e-9);
    let seq: Vec<f64> = [10u32, 20, 40, 80]
        .iter()
        .map(|&m| delta_mn(&OperatorParams::new(m, m, 2.0).unwrap(), p(0.7, 1.9)))
        .collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    assert!((delta_prime(10, 1.0) - 0.2f64.sqrt()).abs() < 1e-16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn second_moment_dominated_for_a_above_one(m in 1u32..=1000, a in 1.0001f64..=10.0, x in 0.0f64..=4.0) {
        let pr = OperatorParams::new(m, m, a).unwrap();
        let pt = p(x, x);
        let c2 = central_moment_closed(&pr, pt, 2, 0).unwrap();
        let b = central_moment_bound(&pr, BoundTarget::Pointwise(pt), 2, 0).unwrap();
        prop_assert!(c2 <= b * (1.0 + 1e-12) + 1e-300);
    }
}
