use crate::error::{Error, Result};

/// Nodes per axis for the tensor Gauss-Legendre rule used on Kantorovich cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    order: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_ORDER: usize = 8;

    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "quadrature order must be at least 1".into(),
            ));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.order)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: Self::DEFAULT_ORDER,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_q` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(q: usize) -> Self {
        assert!(q >= 1);
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let qf = q as f64;
        for i in 0..q.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[q - 1 - i] = z;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// `(1/|[lo,hi]|) ∫ g` over `[lo, hi]`, i.e. the average of `g`.
    pub fn average<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut g: F) -> f64 {
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * g(mid + half * t))
            .sum::<f64>()
            / 2.0
    }
}

/// `(P_q(z), P_q'(z))` via the three-term recurrence.
fn legendre(q: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if q == 0 {
        return (1.0, 0.0);
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
