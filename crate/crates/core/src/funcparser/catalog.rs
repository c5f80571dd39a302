use std::f64::consts::PI;

use super::{parse, BivariateFunction, Growth, Smoothness};
use crate::error::{Error, Result};
use crate::kernel::Rect;

pub const CATALOG_NAMES: [&str; 6] = [
    "x_sin_pi_y",
    "sin_x_plus_y",
    "x2y_xm1_sin2piy",
    "x2y_cos_piy",
    "y2_cos_2pix",
    "exp_x_plus_y",
];

struct Entry {
    name: &'static str,
    source: &'static str,
    domain: f64,
    growth: Growth,
    smoothness: Option<Smoothness>,
}

fn entry(name: &str) -> Option<Entry> {
    let e = match name {
        // f = x sin(πy), f_x = sin(πy), f_y = πx cos(πy), f_xy = π cos(πy).
        // Δf = (x2 - x1)(sin πy2 - sin πy1), so |Δf| <= π|Δx||Δy| everywhere;
        // f_xy does not depend on x, so its mixed difference vanishes.
        "x_sin_pi_y" => Entry {
            name: "x_sin_pi_y",
            source: "x*sin(pi*y)",
            domain: 1.0,
            growth: Growth::Polynomial,
            smoothness: Some(Smoothness {
                lipschitz_total: (1.0 + PI * PI).sqrt(),
                lipschitz_x: 1.0,
                lipschitz_y: PI,
                mixed_derivative_bound: PI,
                dbf_mixed_bound: 0.0,
            }),
        },
        // All first and second derivatives of sin(x + y) are bounded by 1.
        "sin_x_plus_y" => Entry {
            name: "sin_x_plus_y",
            source: "sin(x+y)",
            domain: 1.0,
            growth: Growth::Bounded,
            smoothness: Some(Smoothness {
                lipschitz_total: 2f64.sqrt(),
                lipschitz_x: 1.0,
                lipschitz_y: 1.0,
                mixed_derivative_bound: 1.0,
                dbf_mixed_bound: 1.0,
            }),
        },
        "x2y_xm1_sin2piy" => Entry {
            name: "x2y_xm1_sin2piy",
            source: "x^2*y*(x-1)*sin(2*pi*y)",
            domain: 2.0,
            growth: Growth::Polynomial,
            smoothness: None,
        },
        "x2y_cos_piy" => Entry {
            name: "x2y_cos_piy",
            source: "x^2*y*cos(pi*y)",
            domain: 4.0,
            growth: Growth::Polynomial,
            smoothness: None,
        },
        "y2_cos_2pix" => Entry {
            name: "y2_cos_2pix",
            source: "y^2*cos(2*pi*x)",
            domain: 4.0,
            growth: Growth::Polynomial,
            smoothness: None,
        },
        "exp_x_plus_y" => Entry {
            name: "exp_x_plus_y",
            source: "exp(x+y)",
            domain: 2.0,
            growth: Growth::Exponential,
            smoothness: None,
        },
        _ => return None,
    };
    Some(e)
}

/// Look up one of the named example functions.
///
/// Smoothness constants, where present, are valid for a base point in the
/// declared domain and a second point anywhere in the closed first quadrant.
pub fn catalog(name: &str) -> Result<BivariateFunction> {
    let e = entry(name).ok_or_else(|| Error::UnknownFunction(name.to_string()))?;
    let expr = parse(e.source).expect("catalog sources are well-formed");
    let mut f = BivariateFunction::from_expr(e.name, expr)
        .with_growth(e.growth)
        .with_domain(Rect::square(e.domain)?);
    if let Some(s) = e.smoothness {
        f = f.with_smoothness(s);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(catalog("x_sin_pi_y").unwrap().eval(0.5, 0.5).unwrap(), 0.5);
        assert_eq!(
            catalog("exp_x_plus_y").unwrap().eval(0.0, 0.0).unwrap(),
            1.0
        );
        let f = catalog("x2y_xm1_sin2piy").unwrap();
        for i in 0..50 {
            assert_eq!(f.eval(1.0, f64::from(i) * 0.13).unwrap(), 0.0);
        }
        assert_eq!(
            catalog("exp_x_plus_y").unwrap().growth(),
            Some(Growth::Exponential)
        );
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(catalog("nope"), Err(Error::UnknownFunction(n)) if n == "nope"));
    }

    #[test]
    fn all_names_resolve() {
        for name in CATALOG_NAMES {
            let f = catalog(name).unwrap();
            assert_eq!(f.name(), name);
            assert!(f.domain().is_some());
            assert!(f.eval(0.3, 0.7).unwrap().is_finite());
        }
    }

    type Hand = fn(f64, f64) -> f64;

    #[test]
    fn hand_coded_values_match() {
        let cases: [(&str, Hand); 5] = [
            ("x_sin_pi_y", |x, y| x * (PI * y).sin()),
            ("sin_x_plus_y", |x, y| (x + y).sin()),
            ("x2y_cos_piy", |x, y| x * x * y * (PI * y).cos()),
            ("y2_cos_2pix", |x, y| y * y * (2.0 * PI * x).cos()),
            ("exp_x_plus_y", |x, y| (x + y).exp()),
        ];
        for (name, g) in cases {
            let f = catalog(name).unwrap();
            for i in 0..20 {
                let (x, y) = (0.17 * f64::from(i), 0.11 * f64::from(i));
                assert_eq!(f.eval(x, y).unwrap(), g(x, y), "{name} at ({x}, {y})");
            }
        }
    }

    #[test]
    fn smoothness_metadata_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in CATALOG_NAMES {
            let f = catalog(name).unwrap();
            let Some(s) = f.smoothness().copied() else {
                continue;
            };
            let d = f.domain().unwrap();
            let tol = 1e-12;
            for _ in 0..10_000 {
                let (x1, y1) = (rng.gen_range(0.0..=d.c()), rng.gen_range(0.0..=d.d()));
                let (x2, y2) = (
                    rng.gen_range(0.0..3.0 * d.c()),
                    rng.gen_range(0.0..3.0 * d.d()),
                );
                let f = |x, y| f.eval(x, y).unwrap();
                let (dx, dy) = ((x2 - x1).abs(), (y2 - y1).abs());
                assert!((f(x1, y1) - f(x2, y1)).abs() <= s.lipschitz_x * dx + tol);
                assert!((f(x1, y1) - f(x1, y2)).abs() <= s.lipschitz_y * dy + tol);
                assert!((f(x1, y1) - f(x2, y2)).abs() <= s.lipschitz_total * dx.hypot(dy) + tol);
                let mixed = f(x2, y2) - f(x2, y1) - f(x1, y2) + f(x1, y1);
                assert!(
                    mixed.abs() <= s.mixed_derivative_bound * dx * dy + tol,
                    "{name}"
                );
            }
        }
    }
}
