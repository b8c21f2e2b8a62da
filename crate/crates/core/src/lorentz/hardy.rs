//! Hardy's inequalities for step functions on `(0, inf)`.
//!
//! For `phi >= 0`, `p > 0`, `q >= 1`:
//!
//! ```text
//! ( int_0^inf [ t^{-1/p} int_0^t phi(s) ds/s ]^q dt/t )^{1/q} <= p ( int_0^inf [ s^{-1/p} phi(s) ]^q ds/s )^{1/q}
//! ( int_0^inf [ t^{ 1/p} int_t^inf phi(s) ds/s ]^q dt/t )^{1/q} <= p ( int_0^inf [ s^{ 1/p} phi(s) ]^q ds/s )^{1/q}
//! ```
//!
//! The inner integrals of a step function are logarithms, so both inner
//! functions are known exactly. The outer integrals over each step use
//! adaptive Gauss-Legendre in `ln t`; the unbounded tails and both right
//! sides are power integrals done in closed form.

use crate::error::{domain, Result};
use crate::quadrature::{adaptive, power_difference};

/// `phi = values[i]` on `(breaks[i], breaks[i + 1])`, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return domain("a step function needs one more breakpoint than values");
        }
        if breaks.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return domain("breakpoints must be finite and non-negative");
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return domain("breakpoints must be strictly increasing");
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return domain(format!("step values must be finite and non-negative, got {v}"));
        }
        // drop zero levels at either end so the support is explicit
        let first = values.iter().position(|&v| v > 0.0);
        let last = values.iter().rposition(|&v| v > 0.0);
        let (breaks, values) = match (first, last) {
            (Some(i), Some(j)) => (breaks[i..=j + 1].to_vec(), values[i..=j].to_vec()),
            _ => (Vec::new(), Vec::new()),
        };
        if breaks.first() == Some(&0.0) {
            return domain("phi must vanish near 0, otherwise int_0^t phi ds/s diverges");
        }
        Ok(StepFunction { breaks, values })
    }

    /// `phi = 1` on `(a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![1.0])
    }

    /// Sample `f` at the left end of `steps` equal cells of `(0, s)`.
    pub fn sampled(s: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = s / steps as f64;
        let breaks = (0..=steps).map(|i| i as f64 * h).collect();
        let values = (0..steps).map(|i| f(i as f64 * h)).collect();
        Self::new(breaks, values)
    }

    /// Sample `f` at the geometric midpoints of `steps` cells of `(a, b)`
    /// that are equal in `ln s`.
    pub fn geometric(a: f64, b: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(a > 0.0 && b > a && steps > 0) {
            return domain(format!("geometric cells need 0 < a < b and steps > 0, got ({a}, {b}), {steps}"));
        }
        let ratio = (b / a).ln() / steps as f64;
        let mut breaks: Vec<f64> = (0..=steps).map(|i| a * (i as f64 * ratio).exp()).collect();
        breaks[steps] = b;
        let values = (0..steps).map(|i| f(a * ((i as f64 + 0.5) * ratio).exp())).collect();
        Self::new(breaks, values)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, s: f64) -> f64 {
        let j = self.breaks.partition_point(|&b| b <= s);
        if j == 0 || j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }
}

/// The fixed test family for the Hardy inequalities: indicators of a short
/// and a long interval, a ramp, two power laws, a log-normal bump and an
/// oscillating profile.
pub fn hardy_family() -> Vec<(&'static str, StepFunction)> {
    let family = [
        ("indicator_short", StepFunction::indicator(1.0, 2.0)),
        ("indicator_long", StepFunction::indicator(1e-3, 1e3)),
        ("ramp", StepFunction::sampled(1.0, 256, |s| s)),
        ("power_up", StepFunction::geometric(1e-2, 1e2, 64, |s| s.powf(1.0 / 3.0))),
        ("power_down", StepFunction::geometric(1e-2, 1e2, 64, |s| s.powf(-0.5))),
        ("lognormal", StepFunction::geometric(1e-3, 1e3, 128, |s| (-s.ln().powi(2)).exp())),
        ("oscillating", StepFunction::geometric(1.0, 1e4, 40, |s| 1.0 + (3.0 * s.ln()).sin())),
    ];
    family.into_iter().map(|(name, phi)| (name, phi.expect("family members are valid"))).collect()
}

/// Both sides of both inequalities, without the constant `p`.
///
/// The inequalities hold when `lhs_lower <= p * rhs_lower` and
/// `lhs_upper <= p * rhs_upper`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HardyReport {
    pub lhs_lower: f64,
    pub rhs_lower: f64,
    pub lhs_upper: f64,
    pub rhs_upper: f64,
}

impl HardyReport {
    /// `p * rhs - lhs` for the two inequalities.
    pub fn defects(&self, p: f64) -> (f64, f64) {
        (p * self.rhs_lower - self.lhs_lower, p * self.rhs_upper - self.lhs_upper)
    }

    /// [`HardyReport::defects`] divided by `p * rhs`. For `q = 1` both
    /// inequalities are equalities, so these sit at rounding level.
    pub fn relative_defects(&self, p: f64) -> (f64, f64) {
        let (d1, d2) = self.defects(p);
        let rel = |d: f64, r: f64| if r > 0.0 { d / (p * r) } else { d };
        (rel(d1, self.rhs_lower), rel(d2, self.rhs_upper))
    }
}

pub fn hardy_check(phi: &StepFunction, p: f64, q: f64) -> Result<HardyReport> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("Hardy exponent p must be positive and finite, got {p}"));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return domain(format!("Hardy exponent q must be in [1, inf), got {q}"));
    }
    if phi.is_zero() {
        return Ok(HardyReport { lhs_lower: 0.0, rhs_lower: 0.0, lhs_upper: 0.0, rhs_upper: 0.0 });
    }
    let a = &phi.breaks;
    let c = &phi.values;
    let k = c.len();
    let r = q / p;
    let logs: Vec<f64> = (0..k).map(|i| power_difference(a[i], a[i + 1], 0.0)).collect();

    // lower[i] = int_0^{a_i} phi ds/s, upper[i] = int_{a_i}^inf phi ds/s
    let mut lower = vec![0.0; k + 1];
    for i in 0..k {
        lower[i + 1] = lower[i] + c[i] * logs[i];
    }
    let mut upper = vec![0.0; k + 1];
    for i in (0..k).rev() {
        upper[i] = upper[i + 1] + c[i] * logs[i];
    }

    let mut lhs1 = 0.0;
    let mut lhs2 = 0.0;
    let mut rhs1 = 0.0;
    let mut rhs2 = 0.0;
    for i in 0..k {
        let (lo, hi, ci) = (a[i], a[i + 1], c[i]);
        let (al, bu) = (lower[i], upper[i + 1]);
        let width = logs[i];
        // u = ln(t / a_i) in [0, width]
        let g1 = |u: f64| (-r * u).exp() * (al + ci * u).powf(q);
        let g2 = |u: f64| (r * (u - width)).exp() * (bu + ci * (width - u)).powf(q);
        lhs1 += lo.powf(-r) * adaptive(&g1, 0.0, width, 1e-13, 0.0, 40);
        lhs2 += hi.powf(r) * adaptive(&g2, 0.0, width, 1e-13, 0.0, 40);
        rhs1 += ci.powf(q) * (-power_difference(lo, hi, -r)) / r;
        rhs2 += ci.powf(q) * power_difference(lo, hi, r) / r;
    }
    lhs1 += lower[k].powf(q) * a[k].powf(-r) / r;
    lhs2 += upper[0].powf(q) * a[0].powf(r) / r;

    let root = |x: f64| x.powf(1.0 / q);
    Ok(HardyReport { lhs_lower: root(lhs1), rhs_lower: root(rhs1), lhs_upper: root(lhs2), rhs_upper: root(rhs2) })
}
