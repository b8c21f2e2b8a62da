use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flux::{flux_divergence_projected, nonlinear_flux};
use super::trajectory::Trajectory;
use crate::error::{domain, Error, Result};
use crate::grid::{divergence, gradient_norm_squared, transform, Grid, SpectralField, TensorField, VectorField};
use crate::singular::leray_project_spectral;

/// Which flux drives the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Model {
    /// `F = 0`: the heat equation on solenoidal fields.
    Heat,
    /// `F = u (x) u`, optionally with 2/3-rule dealiasing.
    NavierStokes { dealias: bool },
}

impl Model {
    pub fn dealias(&self) -> bool {
        matches!(self, Model::NavierStokes { dealias: true })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub horizon: f64,
    pub model: Model,
    pub picard_tol: f64,
    pub picard_max: usize,
}

impl SolverConfig {
    /// Navier-Stokes with dealiasing and the default Picard settings.
    pub fn new(dt: f64, horizon: f64) -> Self {
        SolverConfig { dt, horizon, model: Model::NavierStokes { dealias: true }, picard_tol: 1e-12, picard_max: 50 }
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return domain(format!("horizon {} must be at least one time step", self.horizon));
        }
        if !(self.picard_tol > 0.0) {
            return domain("Picard tolerance must be positive");
        }
        if self.picard_max == 0 {
            return domain("Picard iteration cap must be positive");
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return domain(format!("horizon {} is not a whole number of steps of {}", self.horizon, self.dt));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

fn heat_factors(grid: &Grid, t: f64) -> Vec<f64> {
    let table = grid.frequency_table();
    (0..grid.len())
        .map(|m| {
            let idx = grid.axis_indices(m);
            let k2: f64 = (0..grid.dim()).map(|a| table[idx[a]] * table[idx[a]]).sum();
            (-t * k2).exp()
        })
        .collect()
}

fn scale_by(spec: &SpectralField, factors: &[f64]) -> SpectralField {
    let coeffs = spec.coefficients().iter().zip(factors).map(|(c, f)| c * f).collect();
    SpectralField::from_coefficients(*spec.grid(), coeffs).expect("length matches grid")
}

/// `a + s b`, component-wise.
fn axpy(a: &[SpectralField], s: f64, b: &[SpectralField]) -> Vec<SpectralField> {
    a.iter().zip(b).map(|(x, y)| x.add(&y.scale(s))).collect()
}

fn spectral_norm_sq(a: &[SpectralField]) -> f64 {
    a.iter().map(|s| s.coefficients().iter().map(Complex64::norm_sqr).sum::<f64>()).sum()
}

fn to_field(specs: &[SpectralField]) -> VectorField {
    VectorField::from_components(specs.iter().map(SpectralField::inverse).collect()).expect("same grid")
}

/// Projected flux divergence of the field with the given spectra.
fn forcing(specs: &[SpectralField], model: Model) -> Vec<SpectralField> {
    match model {
        Model::Heat => specs.iter().map(|s| SpectralField::zeros(*s.grid())).collect(),
        Model::NavierStokes { dealias } => {
            let u = to_field(specs);
            flux_divergence_projected(&nonlinear_flux(&u, dealias), dealias)
        }
    }
}

fn check_solenoidal(f: &VectorField) -> Result<()> {
    let scale = gradient_norm_squared(f).sqrt().max(f.l2_norm());
    let div = divergence(f).l2_norm();
    if div > 1e-8 * scale {
        return Err(Error::Precondition(format!("initial data is not divergence-free: ||div f||_2 = {div:e}")));
    }
    Ok(())
}

/// Exponential trapezoid integration of the mild formulation.
///
/// Each step solves
/// `u_{n+1} = E u_n - (dt/2) [E G(u_n) + G(u_{n+1})]` with `E = e^{dt Delta}`
/// and `G = P div F`, starting Picard iteration from the exponential Euler
/// predictor. The new state is re-projected afterwards.
pub fn solve_mild(f: &VectorField, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    check_solenoidal(f)?;
    let grid = *f.grid();
    let dt = config.dt;
    let e = heat_factors(&grid, dt);
    let mut u: Vec<SpectralField> = f.components().iter().map(transform).collect();
    let mut times = vec![0.0];
    let mut states = vec![f.clone()];
    let linear = config.model == Model::Heat;
    let mut g = forcing(&u, config.model);
    for step in 1..=config.steps() {
        let next = if linear {
            u.iter().map(|s| scale_by(s, &e)).collect()
        } else {
            let base: Vec<SpectralField> = axpy(&u, -0.5 * dt, &g).iter().map(|s| scale_by(s, &e)).collect();
            let mut guess: Vec<SpectralField> = axpy(&u, -dt, &g).iter().map(|s| scale_by(s, &e)).collect();
            let mut converged = false;
            let mut residual = f64::INFINITY;
            for _ in 0..config.picard_max {
                let candidate = axpy(&base, -0.5 * dt, &forcing(&guess, config.model));
                let diff: Vec<SpectralField> = candidate.iter().zip(&guess).map(|(a, b)| a.sub(b)).collect();
                let size = spectral_norm_sq(&candidate).sqrt();
                residual = if size == 0.0 { 0.0 } else { spectral_norm_sq(&diff).sqrt() / size };
                guess = candidate;
                if !residual.is_finite() {
                    break;
                }
                if residual <= config.picard_tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::PicardDivergence { step, iterations: config.picard_max, residual });
            }
            leray_project_spectral(&guess)
        };
        u = next;
        if !linear {
            g = forcing(&u, config.model);
        }
        times.push(step as f64 * dt);
        states.push(to_field(&u));
    }
    Trajectory::new(times, states, config.model)
}

/// Flux samples `F(s_i)` on a time grid.
#[derive(Clone, Debug)]
pub struct FluxHistory {
    pub times: Vec<f64>,
    pub fluxes: Vec<TensorField>,
    pub dealias: bool,
}

/// `F = u (x) u` along a trajectory, or zero for the heat model.
pub fn flux_history(traj: &Trajectory) -> FluxHistory {
    let model = traj.model();
    let fluxes = crate::par::map_slice(traj.states(), |u| match model {
        Model::Heat => TensorField::zeros(*u.grid()),
        Model::NavierStokes { dealias } => nonlinear_flux(u, dealias),
    });
    FluxHistory { times: traj.times().to_vec(), fluxes, dealias: model.dealias() }
}

/// `e^{t Delta} f - int_0^t div e^{(t-s) Delta} P F(s) ds`, with the
/// Duhamel integral by the trapezoid rule on the stored times. A final
/// partial panel uses `F` linearly interpolated between its neighbours.
pub fn mild_rhs(f: &VectorField, history: &FluxHistory, t: f64) -> Result<VectorField> {
    let times = &history.times;
    if times.is_empty() || times.len() != history.fluxes.len() {
        return Err(Error::Mismatch("flux history is empty or inconsistent".into()));
    }
    let last = *times.last().expect("non-empty");
    if !(t >= 0.0) || t > last * (1.0 + 1e-12) + 1e-15 {
        return domain(format!("t = {t} lies outside the stored history [0, {last}]"));
    }
    let grid = *f.grid();
    for flux in &history.fluxes {
        grid.ensure_same(flux.grid())?;
    }
    let mut out: Vec<SpectralField> =
        f.components().iter().map(|c| scale_by(&transform(c), &heat_factors(&grid, t))).collect();
    let forcing_at = |i: usize| flux_divergence_projected(&history.fluxes[i], history.dealias);
    let mut nodes: Vec<(f64, Vec<SpectralField>, f64)> = Vec::new();
    let full = times.partition_point(|&s| s <= t).saturating_sub(1);
    for i in 0..=full {
        let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
        let right = if i < full { times[i + 1] - times[i] } else { 0.0 };
        nodes.push((times[i], forcing_at(i), 0.5 * (left + right)));
    }
    if t > times[full] && full + 1 < times.len() {
        let h = t - times[full];
        let lam = h / (times[full + 1] - times[full]);
        let g0 = forcing_at(full);
        let g1 = forcing_at(full + 1);
        let gt: Vec<SpectralField> = g0.iter().zip(&g1).map(|(a, b)| a.scale(1.0 - lam).add(&b.scale(lam))).collect();
        nodes.last_mut().expect("at least one node").2 += 0.5 * h;
        nodes.push((t, gt, 0.5 * h));
    }
    for (s, g, w) in nodes {
        if w == 0.0 {
            continue;
        }
        let decay = heat_factors(&grid, t - s);
        for (o, gi) in out.iter_mut().zip(&g) {
            *o = o.sub(&scale_by(gi, &decay).scale(w));
        }
    }
    Ok(to_field(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use crate::rng::{random_solenoidal, seeded};
    use crate::singular::heat_semigroup;
    use std::f64::consts::PI;

    fn tg(g: Grid) -> VectorField {
        VectorField::from_fn(g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0])
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(0.1, 0.05).validate().is_err());
        assert!(SolverConfig::new(0.3, 1.0).validate().is_err());
        assert!(SolverConfig::new(1e-3, 1.0).validate().is_ok());
        assert_eq!(SolverConfig::new(1e-3, 1.0).steps(), 1000);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let traj = solve_mild(&VectorField::zeros(g), &SolverConfig::new(0.1, 0.5)).unwrap();
        assert_eq!(traj.len(), 6);
        assert!(traj.states().iter().all(|s| s.max_magnitude() == 0.0));
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = tg(g);
        let traj = solve_mild(&f, &SolverConfig::new(0.01, 0.5)).unwrap();
        for (t, s) in traj.times().iter().zip(traj.states()) {
            assert!(s.sub(&f.scale((-2.0 * t).exp())).l2_norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_compressible_data() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = VectorField::from_fn(g, |x| [x[0].sin(), 0.0, 0.0]);
        assert!(matches!(solve_mild(&f, &SolverConfig::new(0.1, 0.5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn picard_failure_is_reported() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_solenoidal(g, 3, 400.0, &mut seeded(3));
        let mut cfg = SolverConfig::new(0.5, 0.5);
        cfg.picard_max = 5;
        assert!(matches!(solve_mild(&f, &cfg), Err(Error::PicardDivergence { step: 1, .. })));
    }

    #[test]
    fn mild_rhs_trivial_cases() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = tg(g);
        let hist = FluxHistory { times: vec![0.0, 0.1, 0.2], fluxes: vec![TensorField::zeros(g); 3], dealias: true };
        assert!(mild_rhs(&f, &hist, 0.0).unwrap().sub(&f).max_magnitude() < 1e-14);
        let at = mild_rhs(&f, &hist, 0.15).unwrap();
        assert!(at.sub(&heat_semigroup(&f, 0.15).unwrap()).max_magnitude() < 1e-15);
        assert!(mild_rhs(&f, &hist, 0.3).is_err());
    }

    /// `F(s) = e^{beta s} A` with `A` on the single wavevector `k0`.
    #[test]
    fn manufactured_duhamel_is_second_order() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let k0: [f64; 2] = [1.0, 2.0];
        let a = [[0.7, 0.5], [0.5, -0.4]];
        let beta: f64 = 1.3;
        let t_end: f64 = 0.8;
        let amp = |x: [f64; 3]| (k0[0] * x[0] + k0[1] * x[1]).cos();
        // P div A: d_k A_jk = -(A k0)_j sin, minus its k0 component
        let ak = [a[0][0] * k0[0] + a[0][1] * k0[1], a[1][0] * k0[0] + a[1][1] * k0[1]];
        let k2 = k0[0] * k0[0] + k0[1] * k0[1];
        let along = (k0[0] * ak[0] + k0[1] * ak[1]) / k2;
        let proj = [ak[0] - along * k0[0], ak[1] - along * k0[1]];
        let weight = ((beta * t_end).exp() - (-k2 * t_end).exp()) / (beta + k2);
        let exact = VectorField::from_fn(g, |x| {
            let s = (k0[0] * x[0] + k0[1] * x[1]).sin();
            [weight * proj[0] * s, weight * proj[1] * s, 0.0]
        });
        let err = |steps: usize| {
            let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
            let fluxes = times
                .iter()
                .map(|&s| {
                    TensorField::from_fn(g, |j, k| ScalarField::from_fn(g, amp).scale(a[j][k] * (beta * s).exp()))
                })
                .collect();
            let hist = FluxHistory { times, fluxes, dealias: false };
            mild_rhs(&VectorField::zeros(g), &hist, t_end).unwrap().sub(&exact).l2_norm()
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e1 < 1e-2);
        let ratio = e1 / e2;
        assert!(ratio > 3.8 && ratio < 4.2, "ratio {ratio} {e1} {e2} {}", exact.l2_norm());
    }

    #[test]
    fn mild_rhs_reproduces_solver_output() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_solenoidal(g, 3, 0.5, &mut seeded(5));
        let traj = solve_mild(&f, &SolverConfig::new(0.01, 0.2)).unwrap();
        let hist = flux_history(&traj);
        let v = mild_rhs(&f, &hist, 0.2).unwrap();
        let u = traj.state(traj.len() - 1);
        assert!(v.sub(u).l2_norm() < 1e-4 * f.l2_norm());
    }

    #[test]
    fn trajectory_helpers() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_solenoidal(g, 3, 0.5, &mut seeded(9));
        let traj = solve_mild(&f, &SolverConfig::new(0.05, 0.5)).unwrap();
        assert!(traj.max_divergence_ratio() < 1e-12);
        assert!(traj.mean_drift() < 1e-14);
        let sub = traj.subsample(2).unwrap();
        assert_eq!(sub.times(), &[0.0, 0.1, 0.2, 0.30000000000000004, 0.4, 0.5][..]);
        assert_eq!(traj.weak_norms(4.0).unwrap(), traj.weak_norms(4.0).unwrap());
        let e = traj.energies();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        assert!(Trajectory::new(vec![0.0, 0.0], vec![f.clone(), f.clone()], traj.model()).is_err());
    }
}
