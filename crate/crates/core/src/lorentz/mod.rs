//! Lorentz quasinorms and norms of grid fields.
//!
//! A grid function takes finitely many values, so its decreasing
//! rearrangement `f*` is a step function and every quantity here is
//! evaluated on that exact step structure. The quasinorm integrates powers
//! of `f*` in closed form. The norm uses the running average `f**`, which on
//! each step is `a + b / tau`; integer `q` is integrated by binomial
//! expansion, other `q` by adaptive Gauss-Legendre per segment.

mod hardy;
mod inequalities;

pub use hardy::{hardy_check, hardy_family, HardyReport, StepFunction};
pub use inequalities::{holder_rearranged, interpolation_check, sobolev_ratio};

use crate::error::{domain, Result};
use crate::grid::{ScalarField, VectorField};
use crate::quadrature::{adaptive, power_difference};

/// An admissible Lorentz index `(p, q)` with `p` in `(1, inf]`, `q` in
/// `[1, inf]`, and `q = inf` whenever `p = inf`.
///
/// The quasinorm is also meaningful for `p = 1`, which the constructor
/// [`LorentzIndex::quasi`] allows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzIndex {
    p: f64,
    q: f64,
}

impl LorentzIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if p.is_nan() || p <= 1.0 {
            return domain(format!("Lorentz exponent p must exceed 1, got {p}"));
        }
        Self::quasi(p, q)
    }

    /// Index for quasinorm-only use, allowing `p = 1`.
    pub fn quasi(p: f64, q: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return domain(format!("Lorentz exponent p must be at least 1, got {p}"));
        }
        if q.is_nan() || q < 1.0 {
            return domain(format!("Lorentz exponent q must be at least 1, got {q}"));
        }
        if p.is_infinite() && q.is_finite() {
            return domain("p = inf requires q = inf");
        }
        Ok(LorentzIndex { p, q })
    }

    /// The weak space `L^{p, inf}`.
    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Hoelder conjugate `p' = p / (p - 1)`; 1 when `p` is infinite.
    pub fn conjugate_p(&self) -> f64 {
        conjugate(self.p)
    }
}

pub(crate) fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// One level of a decreasing rearrangement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub value: f64,
    pub measure: f64,
}

/// The rearrangement `f*` of a grid function as strictly decreasing positive
/// levels with the measure each level occupies.
///
/// Level `j` covers `[m_j, m_{j+1})` where `m_j` is the sum of the earlier
/// measures; `f*` vanishes beyond the total measure.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StepRearrangement {
    steps: Vec<Step>,
    /// `m_0 = 0, m_1, ..., m_J`.
    breaks: Vec<f64>,
    /// `S_j = integral_0^{m_j} f*`.
    partial: Vec<f64>,
}

impl StepRearrangement {
    /// Rearrange `|values|`, each sample carrying `cell_volume`.
    pub fn from_samples(values: &[f64], cell_volume: f64) -> Self {
        let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
        crate::par::sort_descending(&mut abs);
        let mut counted: Vec<(f64, usize)> = Vec::new();
        for v in abs {
            match counted.last_mut() {
                Some((last, count)) if *last == v => *count += 1,
                _ => counted.push((v, 1)),
            }
        }
        let mut steps = Vec::with_capacity(counted.len());
        let mut breaks = Vec::with_capacity(counted.len() + 1);
        breaks.push(0.0);
        let mut cells = 0usize;
        for (value, count) in counted {
            cells += count;
            steps.push(Step { value, measure: count as f64 * cell_volume });
            // cumulative measure from an integer count keeps breaks exact
            breaks.push(cells as f64 * cell_volume);
        }
        Self::finish(steps, breaks)
    }

    /// Build from explicit `(value, measure)` levels.
    pub fn from_steps(levels: &[(f64, f64)]) -> Result<Self> {
        let mut steps = Vec::with_capacity(levels.len());
        let mut breaks = vec![0.0];
        let mut total = 0.0;
        for (i, &(value, measure)) in levels.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) || !(measure > 0.0 && measure.is_finite()) {
                return domain(format!("level {i}: value and measure must be positive and finite"));
            }
            if i > 0 && value >= levels[i - 1].0 {
                return domain("rearrangement levels must be strictly decreasing");
            }
            total += measure;
            steps.push(Step { value, measure });
            breaks.push(total);
        }
        Ok(Self::finish(steps, breaks))
    }

    fn finish(steps: Vec<Step>, breaks: Vec<f64>) -> Self {
        let mut partial = Vec::with_capacity(breaks.len());
        partial.push(0.0);
        let mut acc = 0.0;
        for s in &steps {
            acc += s.value * s.measure;
            partial.push(acc);
        }
        StepRearrangement { steps, breaks, partial }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_zero(&self) -> bool {
        self.steps.is_empty()
    }

    /// Measure of the support.
    pub fn total_measure(&self) -> f64 {
        *self.breaks.last().unwrap_or(&0.0)
    }

    /// `integral f* = ||f||_1`.
    pub fn integral(&self) -> f64 {
        *self.partial.last().unwrap_or(&0.0)
    }

    pub fn sup(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.value)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Index of the level containing `tau`, or `None` past the support.
    fn level(&self, tau: f64) -> Option<usize> {
        // breaks[j] <= tau < breaks[j + 1]
        let j = self.breaks.partition_point(|&m| m <= tau);
        (j >= 1 && j <= self.steps.len()).then(|| j - 1)
    }

    /// `f*(tau)`, right-continuous.
    pub fn star(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return self.sup();
        }
        self.level(tau).map_or(0.0, |j| self.steps[j].value)
    }

    /// `f**(tau) = (1/tau) integral_0^tau f*`.
    pub fn double_star(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return domain(format!("f** needs tau > 0, got {tau}"));
        }
        Ok(match self.level(tau) {
            Some(j) => (self.partial[j] + self.steps[j].value * (tau - self.breaks[j])) / tau,
            None => self.integral() / tau,
        })
    }

    /// `(integral (f*)^p)^{1/p}`, the Lebesgue norm recovered from levels.
    pub fn lebesgue_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup();
        }
        self.steps.iter().map(|s| s.value.powf(p) * s.measure).sum::<f64>().powf(1.0 / p)
    }

    /// `||f||*_{L^{p,q}}`: `(integral (tau^{1/p} f*)^q dtau/tau)^{1/q}`, or
    /// `sup tau^{1/p} f*(tau)` for `q = inf`.
    pub fn quasinorm(&self, idx: LorentzIndex) -> f64 {
        let (p, q) = (idx.p, idx.q);
        if self.is_zero() {
            return 0.0;
        }
        if p.is_infinite() {
            return self.sup();
        }
        if q.is_infinite() {
            // the sup over each level is approached at its right end
            return self
                .steps
                .iter()
                .zip(&self.breaks[1..])
                .map(|(s, &m)| s.value * m.powf(1.0 / p))
                .fold(0.0, f64::max);
        }
        let r = q / p;
        let mut sum = self.steps[0].value.powf(q) * self.breaks[1].powf(r);
        for j in 1..self.steps.len() {
            sum += self.steps[j].value.powf(q) * power_difference(self.breaks[j], self.breaks[j + 1], r);
        }
        sum.powf(1.0 / q)
    }

    /// `||f||_{L^{p,q}}`, the same functional with `f**` in place of `f*`.
    pub fn norm(&self, idx: LorentzIndex) -> Result<f64> {
        let (p, q) = (idx.p, idx.q);
        if p <= 1.0 {
            return domain("the f**-based norm needs p > 1");
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        if p.is_infinite() {
            return Ok(self.sup());
        }
        let total = self.total_measure();
        let s_total = self.integral();
        if q.is_infinite() {
            // on each level tau^{1/p} (a + b/tau) is convex in log tau with
            // no interior maximum, so breakpoints suffice
            let best = (1..self.breaks.len())
                .map(|j| self.breaks[j].powf(1.0 / p) * self.partial[j] / self.breaks[j])
                .fold(0.0, f64::max);
            return Ok(best);
        }
        let e = q / p;
        let mut sum = self.steps[0].value.powf(q) * self.breaks[1].powf(e);
        for j in 1..self.steps.len() {
            let a = self.steps[j].value;
            let b = (self.partial[j] - a * self.breaks[j]).max(0.0);
            sum += segment(a, b, self.breaks[j], self.breaks[j + 1], p, q);
        }
        // beyond the support f** = S / tau
        sum += s_total.powf(q) * total.powf(e - q) / (p - 1.0);
        Ok(sum.powf(1.0 / q))
    }

    /// `integral_0^inf f*(tau) g*(tau) dtau`, exact on the merged breakpoints.
    pub fn product_integral(&self, other: &StepRearrangement) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut lo = 0.0;
        let mut acc = 0.0;
        while i < self.steps.len() && j < other.steps.len() {
            let hi = self.breaks[i + 1].min(other.breaks[j + 1]);
            acc += self.steps[i].value * other.steps[j].value * (hi - lo);
            lo = hi;
            if self.breaks[i + 1] <= hi {
                i += 1;
            }
            if other.breaks[j + 1] <= hi {
                j += 1;
            }
        }
        acc
    }
}

/// `integral_{m0}^{m1} (q/p) tau^{q/p - 1} (a + b/tau)^q dtau`.
fn segment(a: f64, b: f64, m0: f64, m1: f64, p: f64, q: f64) -> f64 {
    let e = q / p;
    if q.fract() == 0.0 && q <= 64.0 {
        // binomial expansion: sum_k C(q,k) a^{q-k} b^k (q/p) int tau^{e-1-k}
        let qi = q as i32;
        let mut binom = 1.0;
        let mut acc = 0.0;
        for k in 0..=qi {
            if k > 0 {
                binom *= (qi - k + 1) as f64 / k as f64;
            }
            let coeff = binom * a.powi(qi - k) * b.powi(k);
            if coeff == 0.0 {
                continue;
            }
            let ex = e - k as f64;
            let integral = if ex == 0.0 { power_difference(m0, m1, 0.0) } else { power_difference(m0, m1, ex) / ex };
            acc += coeff * e * integral;
        }
        return acc;
    }
    let f = |tau: f64| e * tau.powf(e - 1.0) * (a + b / tau).powf(q);
    // substitute tau = m0 * exp(u) so wide segments stay well resolved
    let g = |u: f64| {
        let tau = m0 * u.exp();
        f(tau) * tau
    };
    let upper = power_difference(m0, m1, 0.0);
    adaptive(&g, 0.0, upper, 1e-13, 0.0, 30)
}

pub fn distribution_function(f: &ScalarField, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return domain(format!("distribution function needs y > 0, got {y}"));
    }
    let count = f.values().iter().filter(|v| v.abs() > y).count();
    Ok(count as f64 * f.grid().cell_volume())
}

pub fn rearrangement(f: &ScalarField) -> StepRearrangement {
    StepRearrangement::from_samples(f.values(), f.grid().cell_volume())
}

pub fn double_star(r: &StepRearrangement, tau: f64) -> Result<f64> {
    r.double_star(tau)
}

pub fn quasinorm(f: &ScalarField, idx: LorentzIndex) -> f64 {
    rearrangement(f).quasinorm(idx)
}

pub fn norm(f: &ScalarField, idx: LorentzIndex) -> Result<f64> {
    rearrangement(f).norm(idx)
}

/// Lorentz norm of the pointwise magnitude `|u|`.
pub fn vector_norm(u: &VectorField, idx: LorentzIndex) -> Result<f64> {
    norm(&u.magnitude(), idx)
}

pub fn vector_quasinorm(u: &VectorField, idx: LorentzIndex) -> f64 {
    quasinorm(&u.magnitude(), idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn idx(p: f64, q: f64) -> LorentzIndex {
        LorentzIndex::new(p, q).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(LorentzIndex::new(1.0, 2.0).is_err());
        assert!(LorentzIndex::new(f64::INFINITY, 2.0).is_err());
        assert!(LorentzIndex::new(2.0, 0.5).is_err());
        assert!(LorentzIndex::new(f64::INFINITY, f64::INFINITY).is_ok());
        assert!(LorentzIndex::quasi(1.0, 1.0).is_ok());
        assert_eq!(idx(3.0, 1.0).conjugate_p(), 1.5);
    }

    #[test]
    fn disc_distribution() {
        let grid = Grid::new(2, 256, 4.0).unwrap();
        let f = ScalarField::from_fn(grid, |x| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 });
        let area = distribution_function(&f, 0.5).unwrap();
        // one cell layer around the circle
        let layer = 2.0 * std::f64::consts::PI * grid.spacing();
        assert!((area - std::f64::consts::PI).abs() < layer);
        assert_eq!(distribution_function(&f, 1.5).unwrap(), 0.0);
        assert!(distribution_function(&f, 0.0).is_err());
    }

    #[test]
    fn two_level_rearrangement() {
        let grid = Grid::new(2, 8, 8.0).unwrap();
        let f = ScalarField::from_fn(grid, |x| {
            if x[0] < -2.0 {
                3.0
            } else if x[0] > 1.0 {
                -1.0
            } else {
                0.0
            }
        });
        let r = rearrangement(&f);
        assert_eq!(r.steps(), &[Step { value: 3.0, measure: 16.0 }, Step { value: 1.0, measure: 16.0 }]);
    }

    #[test]
    fn single_step_double_star() {
        let r = StepRearrangement::from_steps(&[(1.0, 2.0)]).unwrap();
        assert_eq!(r.double_star(1.5).unwrap(), 1.0);
        assert_eq!(r.double_star(4.0).unwrap(), 0.5);
        assert!(r.double_star(0.0).is_err());
        let z = StepRearrangement::default();
        assert_eq!(z.double_star(3.0).unwrap(), 0.0);
        assert_eq!(z.quasinorm(idx(2.0, 2.0)), 0.0);
    }

    #[test]
    fn star_matches_sup_definition() {
        // f*(tau) = inf { y : lambda(y) <= tau }
        let grid = Grid::new(2, 8, 1.0).unwrap();
        let vals: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let f = ScalarField::from_values(grid, vals.clone()).unwrap();
        let r = rearrangement(&f);
        let mut levels: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        levels.push(0.0);
        for t in 0..80 {
            let tau = t as f64 / 64.0 + 1e-9;
            let lambda = |y: f64| vals.iter().filter(|v| v.abs() > y).count() as f64 / 64.0;
            let oracle = levels.iter().copied().filter(|&y| lambda(y) <= tau).fold(f64::INFINITY, f64::min);
            assert_eq!(r.star(tau), oracle, "tau={tau}");
        }
    }

    #[test]
    fn indicator_norms() {
        let r = StepRearrangement::from_steps(&[(1.0, 0.7)]).unwrap();
        for &(p, q) in &[(1.5, 1.0), (2.0, 3.0), (4.0, f64::INFINITY)] {
            let got = r.quasinorm(idx(p, q));
            assert!((got - 0.7f64.powf(1.0 / p)).abs() < 1e-14);
        }
    }

    #[test]
    fn integer_q_closed_form_matches_quadrature() {
        let r = StepRearrangement::from_steps(&[(5.0, 0.1), (3.0, 0.3), (1.0, 2.0), (0.2, 5.0)]).unwrap();
        for &p in &[1.5, 2.0, 3.0] {
            for &q in &[1.0, 2.0, 3.0] {
                let closed = r.norm(idx(p, q)).unwrap();
                let nudged = r.norm(idx(p, q + 1e-9)).unwrap();
                assert!((closed - nudged).abs() < 1e-7 * closed, "p={p} q={q}: {closed} vs {nudged}");
            }
        }
    }

    #[test]
    fn norm_against_brute_force() {
        let r = StepRearrangement::from_steps(&[(2.0, 0.5), (1.0, 1.0), (0.5, 1.5)]).unwrap();
        let (p, q) = (3.0, 2.5);
        // midpoint sum in log tau of (q/p) (tau^{1/p} f**)^q
        let (lo, hi) = (-30.0f64, 30.0f64);
        let n = 600_000;
        let h = (hi - lo) / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let tau = (lo + (i as f64 + 0.5) * h).exp();
                (tau.powf(1.0 / p) * r.double_star(tau).unwrap()).powf(q) * h
            })
            .sum::<f64>();
        let brute = (q / p * brute).powf(1.0 / q);
        let got = r.norm(idx(p, q)).unwrap();
        assert!((got - brute).abs() < 1e-6 * got, "{got} vs {brute}");
    }

    #[test]
    fn weak_norm_against_brute_force() {
        let r = StepRearrangement::from_steps(&[(2.0, 0.5), (1.0, 1.0), (0.5, 1.5)]).unwrap();
        let p = 2.0;
        let brute = (1..200_000)
            .map(|i| {
                let tau = i as f64 * 1e-4;
                tau.powf(1.0 / p) * r.double_star(tau).unwrap()
            })
            .fold(0.0, f64::max);
        let got = r.norm(idx(p, f64::INFINITY)).unwrap();
        assert!(got >= brute && got - brute < 1e-6);
    }

    #[test]
    fn product_integral_of_steps() {
        let a = StepRearrangement::from_steps(&[(2.0, 1.0), (1.0, 1.0)]).unwrap();
        let b = StepRearrangement::from_steps(&[(3.0, 0.5)]).unwrap();
        assert_eq!(a.product_integral(&b), 3.0);
        assert_eq!(a.product_integral(&a), 5.0);
    }

    proptest! {
        #[test]
        fn permutation_invariance(vals in prop::collection::vec(-10.0f64..10.0, 64), shift in 0usize..64) {
            let grid = Grid::new(2, 8, 1.0).unwrap();
            let mut rotated = vals.clone();
            rotated.rotate_left(shift);
            let f = ScalarField::from_values(grid, vals).unwrap();
            let g = ScalarField::from_values(grid, rotated).unwrap();
            for &(p, q) in &[(1.5, 1.0), (2.0, 2.0), (3.0, f64::INFINITY)] {
                prop_assert_eq!(quasinorm(&f, idx(p, q)), quasinorm(&g, idx(p, q)));
            }
        }

        #[test]
        fn sandwich_and_monotonicity(vals in prop::collection::vec(-5.0f64..5.0, 64)) {
            let grid = Grid::new(2, 8, 2.0).unwrap();
            let f = ScalarField::from_values(grid, vals).unwrap();
            let r = rearrangement(&f);
            prop_assume!(!r.is_zero());
            for &p in &[1.5, 2.0, 4.0] {
                let mut prev = f64::INFINITY;
                for &q in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                    let i = idx(p, q);
                    let star = r.quasinorm(i);
                    let full = r.norm(i).unwrap();
                    prop_assert!(star <= prev * (1.0 + 1e-12));
                    prev = star;
                    prop_assert!(star <= full * (1.0 + 1e-10));
                    prop_assert!(full <= i.conjugate_p() * star * (1.0 + 1e-10));
                }
            }
        }
    }
}
