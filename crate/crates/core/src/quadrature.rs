//! Gauss-Legendre rules and a small adaptive integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gauss(n: usize) -> &'static GaussLegendre {
    static G5: OnceLock<GaussLegendre> = OnceLock::new();
    static G10: OnceLock<GaussLegendre> = OnceLock::new();
    static G20: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        5 => G5.get_or_init(|| GaussLegendre::new(5)),
        10 => G10.get_or_init(|| GaussLegendre::new(10)),
        20 => G20.get_or_init(|| GaussLegendre::new(20)),
        _ => panic!("no cached Gauss-Legendre rule with {n} points"),
    }
}

/// Adaptive 5/10-point Gauss-Legendre bisection.
///
/// A panel is accepted once the two rules agree to
/// `max(abs_tol, rel_tol * |I|)`; panels are split at most `max_depth` times.
pub fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_depth: u32) -> f64 {
    let coarse = gauss(5).integrate(f, a, b);
    let fine = gauss(10).integrate(f, a, b);
    if (fine - coarse).abs() <= abs_tol.max(rel_tol * fine.abs()) || max_depth == 0 {
        return fine;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, rel_tol, 0.5 * abs_tol, max_depth - 1)
        + adaptive(f, mid, b, rel_tol, 0.5 * abs_tol, max_depth - 1)
}

/// `b^e - a^e` for `0 < a <= b` without cancellation; `e = 0` gives `ln(b/a)`.
pub fn power_difference(a: f64, b: f64, e: f64) -> f64 {
    debug_assert!(a > 0.0 && b >= a);
    let l = ((b - a) / a).ln_1p();
    if e == 0.0 {
        l
    } else {
        a.powf(e) * (e * l).exp_m1()
    }
}
