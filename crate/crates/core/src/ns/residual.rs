//! Space-time residuals of the weak, projected and very weak formulations.
//!
//! For a test `phi(t, x) = theta(t) phi(x)` the weak residual is
//!
//! ```text
//! theta(0) <f, phi> + int_0^T theta' <u, phi> + theta ( <u, Lap phi> + <F_jk, d_k phi_j> + <P, div phi> ) dt
//! ```
//!
//! The projected residual replaces the last two pairings by
//! `<F_jk, [P d_k phi]_j>`, and the very weak residual is the weak one
//! restricted to solenoidal `phi` (where the pressure pairing vanishes).
//! Time integrals use the trajectory grid.

use std::f64::consts::PI;

use super::flux::{nonlinear_flux, pressure_from_flux};
use super::mild::Model;
use super::trajectory::Trajectory;
use crate::error::{domain, Error, Result};
use crate::grid::{
    divergence, gradient_norm_squared, inner_product, laplacian, vector_gradient, Grid, ScalarField, TensorField,
    VectorField,
};
use crate::singular::leray_project;
use crate::timeint::integral;

/// Smooth temporal factor with compact support in `[0, T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TemporalProfile {
    /// `exp(1 - 1/(1 - (t/end)^2))` on `[0, end)`: equals 1 with zero slope at 0.
    HalfBump { end: f64 },
    /// The same bump rescaled to `(start, end)`; vanishes near 0.
    Bump { start: f64, end: f64 },
}

impl TemporalProfile {
    fn local(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            TemporalProfile::HalfBump { end } => Some((t / end, 1.0 / end)),
            TemporalProfile::Bump { start, end } => {
                let w = 0.5 * (end - start);
                Some(((t - start - w) / w, 1.0 / w))
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.local(t) {
            Some((s, _)) if s.abs() < 1.0 => (1.0 - 1.0 / (1.0 - s * s)).exp(),
            _ => 0.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.local(t) {
            Some((s, ds)) if s.abs() < 1.0 => {
                let q = 1.0 - s * s;
                (1.0 - 1.0 / q).exp() * (-2.0 * s / (q * q)) * ds
            }
            _ => 0.0,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            TemporalProfile::HalfBump { end } | TemporalProfile::Bump { end, .. } => end,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TemporalProfile::HalfBump { end } if end > 0.0 => Ok(()),
            TemporalProfile::Bump { start, end } if start >= 0.0 && end > start => Ok(()),
            _ => domain(format!("invalid temporal profile {self:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub spatial: VectorField,
    pub temporal: TemporalProfile,
    pub solenoidal: bool,
}

impl TestFunction {
    pub fn new(spatial: VectorField, temporal: TemporalProfile, solenoidal: bool) -> Result<Self> {
        temporal.validate()?;
        if solenoidal {
            let scale = gradient_norm_squared(&spatial).sqrt().max(spatial.l2_norm());
            let div = divergence(&spatial).l2_norm();
            if div > 1e-10 * scale {
                return Err(Error::Precondition(format!("test field flagged solenoidal has divergence {div:e}")));
            }
        }
        Ok(TestFunction { spatial, temporal, solenoidal })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Weak,
    Projected,
    VeryWeak,
}

/// A defect together with the sum of the magnitudes of the terms that
/// produced it.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Residual {
    pub defect: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.defect.abs()
        } else {
            self.defect.abs() / self.scale
        }
    }
}

/// Spatial pieces of one test, computed once.
struct Prepared {
    phi: VectorField,
    lap: VectorField,
    /// `[j][k] = d_k phi_j`, or `[P d_k phi]_j` for the projected form.
    grad: TensorField,
    div: ScalarField,
}

fn prepare(test: &TestFunction, form: Formulation) -> Prepared {
    let phi = test.spatial.clone();
    let lap = phi.map_components(laplacian);
    let raw = vector_gradient(&phi);
    let grid = *phi.grid();
    let n = grid.dim();
    let grad = match form {
        Formulation::Projected => {
            let columns: Vec<VectorField> = (0..n)
                .map(|k| {
                    let col = VectorField::from_components((0..n).map(|j| raw.get(j, k).clone()).collect())
                        .expect("same grid");
                    leray_project(&col)
                })
                .collect();
            TensorField::from_fn(grid, |j, k| columns[k].component(j).clone())
        }
        _ => raw,
    };
    Prepared { div: divergence(&phi), phi, lap, grad }
}

/// Residuals of one formulation for a batch of tests.
///
/// `pressure` is used by the weak form only; when absent it is recovered
/// from the flux. The flux is `u (x) u` for Navier-Stokes trajectories and 0
/// for the heat model.
pub fn residuals(
    traj: &Trajectory,
    pressure: Option<&[ScalarField]>,
    tests: &[TestFunction],
    form: Formulation,
) -> Result<Vec<Residual>> {
    let horizon = traj.horizon();
    for t in tests {
        traj.grid().ensure_same(t.spatial.grid())?;
        if t.temporal.end() > horizon * (1.0 + 1e-12) {
            return domain(format!(
                "test support ends at {} beyond the trajectory horizon {horizon}",
                t.temporal.end()
            ));
        }
        if form == Formulation::VeryWeak && !t.solenoidal {
            return domain("the very weak formulation only admits solenoidal tests");
        }
    }
    if let Some(p) = pressure {
        if p.len() != traj.len() {
            return Err(Error::Mismatch(format!("{} pressure samples for {} states", p.len(), traj.len())));
        }
    }
    let prepared: Vec<Prepared> = tests.iter().map(|t| prepare(t, form)).collect();
    let model = traj.model();
    let indices: Vec<usize> = (0..traj.len()).collect();
    // per time and test: <u, phi>, <u, Lap phi>, flux pairing, pressure pairing
    let samples: Vec<Vec<[f64; 4]>> = crate::par::map_slice(&indices, |&i| {
        let u = traj.state(i);
        let flux = match model {
            Model::Heat => None,
            Model::NavierStokes { dealias } => Some(nonlinear_flux(u, dealias)),
        };
        let p_owned;
        let p = match (form, pressure, &flux) {
            (Formulation::Weak, Some(ps), _) => Some(&ps[i]),
            (Formulation::Weak, None, Some(f)) => {
                p_owned = pressure_from_flux(f);
                Some(&p_owned)
            }
            _ => None,
        };
        prepared
            .iter()
            .map(|t| {
                let a = inner_product(u, &t.phi).expect("same grid");
                let b = inner_product(u, &t.lap).expect("same grid");
                let c = flux.as_ref().map_or(0.0, |f| inner_product(f, &t.grad).expect("same grid"));
                let d = p.map_or(0.0, |p| inner_product(p, &t.div).expect("same grid"));
                [a, b, c, d]
            })
            .collect()
    });
    let times = traj.times();
    let f = traj.initial();
    Ok(tests
        .iter()
        .enumerate()
        .map(|(j, test)| {
            let th = &test.temporal;
            let start = th.value(0.0) * inner_product(f, &test.spatial).expect("same grid");
            let term = |which: usize, deriv: bool| -> Vec<f64> {
                times
                    .iter()
                    .zip(&samples)
                    .map(|(&t, s)| s[j][which] * if deriv { th.derivative(t) } else { th.value(t) })
                    .collect()
            };
            let parts = [term(0, true), term(1, false), term(2, false), term(3, false)];
            let total: Vec<f64> = (0..times.len()).map(|i| parts.iter().map(|p| p[i]).sum()).collect();
            let defect = start + integral(times, &total);
            let scale = start.abs()
                + parts.iter().map(|p| integral(times, &p.iter().map(|v| v.abs()).collect::<Vec<_>>())).sum::<f64>();
            Residual { defect, scale }
        })
        .collect())
}

pub fn weak_residual(traj: &Trajectory, pressure: Option<&[ScalarField]>, test: &TestFunction) -> Result<Residual> {
    Ok(residuals(traj, pressure, std::slice::from_ref(test), Formulation::Weak)?[0])
}

pub fn projected_residual(traj: &Trajectory, test: &TestFunction) -> Result<Residual> {
    Ok(residuals(traj, None, std::slice::from_ref(test), Formulation::Projected)?[0])
}

pub fn very_weak_residual(traj: &Trajectory, test: &TestFunction) -> Result<Residual> {
    Ok(residuals(traj, None, std::slice::from_ref(test), Formulation::VeryWeak)?[0])
}

fn profiles(horizon: f64) -> [TemporalProfile; 3] {
    [
        TemporalProfile::HalfBump { end: horizon },
        TemporalProfile::Bump { start: 0.1 * horizon, end: 0.9 * horizon },
        TemporalProfile::HalfBump { end: 0.6 * horizon },
    ]
}

/// Twenty solenoidal tests: stream-function modes `cos`/`sin` of `k . x`
/// for `k` in `{(1,0), (0,1), (1,1), (1,-1)}` (in units of `2 pi / L`),
/// each paired with the three temporal profiles, in a fixed order.
pub fn solenoidal_battery(grid: &Grid, horizon: f64) -> Vec<TestFunction> {
    let w = 2.0 * PI / grid.length();
    let modes: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]];
    let mut out = Vec::new();
    for profile in profiles(horizon) {
        for k in modes {
            for cosine in [true, false] {
                let norm = (k[0] * k[0] + k[1] * k[1]).sqrt();
                // phi = (d_2 psi, -d_1 psi) / (w |k|) for psi = cos or sin of w k.x
                let field = VectorField::from_fn(*grid, |x| {
                    let arg = w * (k[0] * x[0] + k[1] * x[1]);
                    let d = if cosine { -arg.sin() } else { arg.cos() };
                    [k[1] * d / norm, -k[0] * d / norm, 0.0]
                });
                out.push(TestFunction::new(field, profile, true).expect("stream-function modes are solenoidal"));
            }
        }
    }
    out.truncate(20);
    out
}

/// Twenty general tests `e_a cos(k . x)` / `e_a sin(k . x)` for `a` in
/// `{1, 2}` and `k` in `{(1,0), (0,1), (1,1), (1,-1), (2,1)}`, with the
/// temporal profiles used cyclically.
pub fn general_battery(grid: &Grid, horizon: f64) -> Vec<TestFunction> {
    let w = 2.0 * PI / grid.length();
    let modes = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [2.0, 1.0]];
    let profiles = profiles(horizon);
    let mut out = Vec::new();
    for k in modes {
        for a in 0..2 {
            for cosine in [true, false] {
                let field = VectorField::from_fn(*grid, |x| {
                    let arg = w * (k[0] * x[0] + k[1] * x[1]);
                    let mut v = [0.0; 3];
                    v[a] = if cosine { arg.cos() } else { arg.sin() };
                    v
                });
                let profile = profiles[out.len() % 3];
                out.push(TestFunction::new(field, profile, false).expect("valid profile"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ns::{solve_mild, SolverConfig};
    use crate::rng::{random_solenoidal, seeded};

    #[test]
    fn profiles_are_smooth_bumps() {
        let p = TemporalProfile::HalfBump { end: 2.0 };
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.derivative(0.0), 0.0);
        assert_eq!(p.value(2.0), 0.0);
        let b = TemporalProfile::Bump { start: 0.5, end: 1.5 };
        assert_eq!(b.value(0.0), 0.0);
        assert_eq!(b.value(1.0), 1.0);
        let h = 1e-6;
        for t in [0.3, 0.7, 1.2] {
            let fd = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            assert!((fd - b.derivative(t)).abs() < 1e-6);
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivative(t)).abs() < 1e-6);
        }
        assert!(TestFunction::new(
            VectorField::zeros(Grid::new(2, 8, 1.0).unwrap()),
            TemporalProfile::Bump { start: 1.0, end: 0.5 },
            false
        )
        .is_err());
    }

    #[test]
    fn batteries_have_twenty_tests() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let s = solenoidal_battery(&g, 1.0);
        assert_eq!(s.len(), 20);
        assert!(s.iter().all(|t| divergence(&t.spatial).max_abs() < 1e-12));
        assert_eq!(general_battery(&g, 1.0).len(), 20);
    }

    #[test]
    fn heat_flow_residuals_vanish() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_solenoidal(g, 2, 1.0, &mut seeded(4));
        let cfg = SolverConfig::new(2.5e-3, 0.5).with_model(Model::Heat);
        let traj = solve_mild(&f, &cfg).unwrap();
        let tests = solenoidal_battery(&g, 0.5);
        for form in [Formulation::Weak, Formulation::Projected, Formulation::VeryWeak] {
            for r in residuals(&traj, None, &tests, form).unwrap() {
                assert!(r.relative() < 1e-8, "{form:?}: {r:?}");
            }
        }
    }

    #[test]
    fn support_and_solenoidality_checked() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_solenoidal(g, 2, 1.0, &mut seeded(4));
        let traj = solve_mild(&f, &SolverConfig::new(0.05, 0.5)).unwrap();
        let late = solenoidal_battery(&g, 1.0);
        assert!(projected_residual(&traj, &late[0]).is_err());
        let general = general_battery(&g, 0.5);
        assert!(very_weak_residual(&traj, &general[0]).is_err());
        assert!(weak_residual(&traj, None, &general[0]).is_ok());
    }
}
