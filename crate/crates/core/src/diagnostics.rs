//! Energy bookkeeping and weak-strong comparison of trajectories.
//!
//! Time integrals use [`crate::timeint`], which is the trapezoid rule with
//! Gregory end corrections on uniform time grids. All series are indexed
//! like the trajectory's time grid.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{
    advect, gradient_norm_squared, inner_product, laplacian, transform, vector_gradient, ScalarField, VectorField,
};
use crate::lorentz::{vector_norm, LorentzIndex};
use crate::ns::Trajectory;
use crate::singular::leray_project;
use crate::timeint::cumulative;

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// `||u(t)||_2^2`
    pub energy: Vec<f64>,
    /// `2 int_0^t ||grad u||_2^2`
    pub dissipation: Vec<f64>,
    /// `||f||^2 - ||u(t)||^2 - 2 int_0^t ||grad u||^2`
    pub defect: Vec<f64>,
}

impl EnergyReport {
    pub fn initial_energy(&self) -> f64 {
        self.energy[0]
    }

    /// `max_t |defect(t)| / ||f||^2`, or the absolute value for zero data.
    pub fn max_relative_defect(&self) -> f64 {
        let worst = self.defect.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let e0 = self.initial_energy();
        if e0 > 0.0 {
            worst / e0
        } else {
            worst
        }
    }
}

pub fn energy_report(traj: &Trajectory) -> EnergyReport {
    let times = traj.times().to_vec();
    let energy = traj.energies().to_vec();
    let rates: Vec<f64> = traj.dissipation_rates().iter().map(|g| 2.0 * g).collect();
    let dissipation = cumulative(&times, &rates);
    let defect = energy.iter().zip(&dissipation).map(|(e, d)| energy[0] - e - d).collect();
    EnergyReport { times, energy, dissipation, defect }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyInequality {
    pub times: Vec<f64>,
    /// `||f||^2 - ||v(t)||^2 - 2 int_0^t ||grad v||^2`, non-negative when the
    /// inequality holds.
    pub defect: Vec<f64>,
    pub tolerance: f64,
    pub holds: Vec<bool>,
}

impl EnergyInequality {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

pub fn energy_inequality_check(traj: &Trajectory) -> EnergyInequality {
    let report = energy_report(traj);
    let tolerance = 1e-8 * report.initial_energy();
    let holds = report.defect.iter().map(|&d| d >= -tolerance).collect();
    EnergyInequality { times: report.times, defect: report.defect, tolerance, holds }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossEnergy {
    pub times: Vec<f64>,
    /// `<u(t), v(t)>`
    pub pairing: Vec<f64>,
    /// Right-hand side minus `pairing`; for `u = v` this is the energy defect.
    pub defect: Vec<f64>,
    /// Running sum of the magnitudes of every term.
    pub scale: Vec<f64>,
}

/// Defect of
/// `<u(t), v(t)> = <f, g> - 2 int <grad u, grad v> - int <(u.grad)u, v> - int <u, (v.grad)v>`.
pub fn cross_energy_defect(u: &Trajectory, v: &Trajectory) -> Result<CrossEnergy> {
    u.ensure_compatible(v)?;
    let rows = crate::par::map_range(u.len(), |i| -> Result<[f64; 4]> {
        let (a, b) = (u.state(i), v.state(i));
        let pairing = inner_product(a, b)?;
        let gradients = if std::ptr::eq(a, b) {
            gradient_norm_squared(a)
        } else {
            inner_product(&vector_gradient(a), &vector_gradient(b))?
        };
        let first = inner_product(&advect(a, a), b)?;
        let second = inner_product(a, &advect(b, b))?;
        Ok([pairing, gradients, first, second])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let times = u.times().to_vec();
    let column = |c: usize, f: &dyn Fn(f64) -> f64| rows.iter().map(|r| f(r[c])).collect::<Vec<f64>>();
    let grad = cumulative(&times, &column(1, &|x| 2.0 * x));
    let tri1 = cumulative(&times, &column(2, &|x| x));
    let tri2 = cumulative(&times, &column(3, &|x| x));
    let grad_abs = cumulative(&times, &column(1, &|x| 2.0 * x.abs()));
    let tri1_abs = cumulative(&times, &column(2, &f64::abs));
    let tri2_abs = cumulative(&times, &column(3, &f64::abs));
    let start = rows[0][0];
    let pairing = column(0, &|x| x);
    let defect = (0..times.len()).map(|i| start - grad[i] - tri1[i] - tri2[i] - pairing[i]).collect();
    let scale =
        (0..times.len()).map(|i| start.abs() + pairing[i].abs() + grad_abs[i] + tri1_abs[i] + tri2_abs[i]).collect();
    Ok(CrossEnergy { times, pairing, defect, scale })
}

/// Time exponent `2p / (p - n)` of the Prodi-Serrin class; 2 for `p = inf`.
pub fn prodi_serrin_exponent(p: f64, n: usize) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(2.0);
    }
    if !(p > n as f64) {
        return domain(format!("the Prodi-Serrin criterion needs p > n = {n}, got {p}"));
    }
    Ok(2.0 * p / (p - n as f64))
}

/// `A(t) = int_0^t ||u(s)||_{L^{p,inf}}^{2p/(p-n)} ds`; the sup norm with
/// exponent 2 for `p = inf`.
pub fn prodi_serrin_norm(traj: &Trajectory, p: f64) -> Result<Vec<f64>> {
    let exponent = prodi_serrin_exponent(p, traj.grid().dim())?;
    let norms = traj.weak_norms(p)?;
    let integrand: Vec<f64> = norms.iter().map(|v| v.powf(exponent)).collect();
    Ok(cumulative(traj.times(), &integrand))
}

/// `||u(t) - v(t)||_2^2` on a shared time grid.
pub fn gap_series(u: &Trajectory, v: &Trajectory) -> Result<Vec<f64>> {
    u.ensure_compatible(v)?;
    Ok(crate::par::map_range(u.len(), |i| u.state(i).sub(v.state(i)).l2_norm_squared()))
}

#[derive(Clone, Debug, Serialize)]
pub struct WSReport {
    pub p: f64,
    pub constant: f64,
    pub times: Vec<f64>,
    /// `||w(t)||_2^2` for `w = u - v`
    pub gap: Vec<f64>,
    /// Prodi-Serrin accumulator of `u`
    pub accumulator: Vec<f64>,
    /// `||w(0)||_2^2 exp(C A(t))`
    pub bound: Vec<f64>,
    pub holds: Vec<bool>,
}

impl WSReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }

    pub fn max_gap(&self) -> f64 {
        self.gap.iter().fold(0.0, |m: f64, g| m.max(*g))
    }
}

/// Compare `||w(t)||^2` with the Gronwall bound driven by the strong
/// solution `u`. Equality up to a relative `1e-9` counts as holding, as does
/// a gap at roundoff level when the bound is 0.
pub fn gronwall_bound(u: &Trajectory, v: &Trajectory, p: f64, constant: f64) -> Result<WSReport> {
    if !(constant >= 0.0 && constant.is_finite()) {
        return domain(format!("Gronwall constant must be finite and non-negative, got {constant}"));
    }
    let gap = gap_series(u, v)?;
    let accumulator = prodi_serrin_norm(u, p)?;
    let bound: Vec<f64> = accumulator.iter().map(|a| gap[0] * (constant * a).exp()).collect();
    let floor = 1e-24 * u.energies()[0].max(v.energies()[0]);
    let holds = gap.iter().zip(&bound).map(|(g, b)| *g <= b * (1.0 + 1e-9) + floor).collect();
    Ok(WSReport { p, constant, times: u.times().to_vec(), gap, accumulator, bound, holds })
}

/// Smallest `C` for which `||w(t)||^2 <= ||w(0)||^2 exp(C A(t))` on the
/// whole grid: `max_t ln(||w(t)||^2 / ||w(0)||^2) / A(t)`, floored at 0.
pub fn empirical_gronwall_constant(u: &Trajectory, v: &Trajectory, p: f64) -> Result<f64> {
    let gap = gap_series(u, v)?;
    if gap[0] == 0.0 {
        return domain("the empirical Gronwall constant needs distinct initial data");
    }
    let accumulator = prodi_serrin_norm(u, p)?;
    Ok(gap
        .iter()
        .zip(&accumulator)
        .skip(1)
        .filter(|(_, a)| **a > 0.0)
        .map(|(g, a)| (g / gap[0]).ln() / a)
        .fold(0.0, f64::max))
}

/// Keep the Fourier modes with `|k_a| <= band` on every axis.
fn band_truncate(u: &VectorField, band: i64) -> VectorField {
    let grid = *u.grid();
    u.map_components(|c| {
        transform(c)
            .apply_real(|idx| if (0..grid.dim()).all(|a| grid.wavenumber(idx[a]).abs() <= band) { 1.0 } else { 0.0 })
            .inverse()
    })
}

/// Solenoidal perturbation of norm `size`, band-limited to `band`, along
/// which `||w||_2^2` grows fastest at the instant `t = 0` when `w` evolves
/// by the equation linearised about `u`:
/// `d/dt ||w||^2 = 2 <w, M w>` with `M w = P_band P (Lap w - S w)` and
/// `S` the symmetric part of `grad u`. Returns the perturbation and the top
/// eigenvalue of `M`, found by shifted power iteration from a seeded start.
pub fn amplified_perturbation(u: &VectorField, band: i64, size: f64, seed: u64) -> Result<(VectorField, f64)> {
    if band < 1 || !(size > 0.0) {
        return domain("amplified perturbation needs band >= 1 and a positive size");
    }
    let grid = *u.grid();
    let n = grid.dim();
    let grad = vector_gradient(u);
    let strain: Vec<ScalarField> =
        (0..n * n).map(|m| grad.get(m / n, m % n).add(grad.get(m % n, m / n)).scale(0.5)).collect();
    let max_strain = strain.iter().map(ScalarField::max_abs).fold(0.0, f64::max);
    let reach = (band as f64) * 2.0 * std::f64::consts::PI / grid.length();
    let shift = n as f64 * reach * reach + n as f64 * max_strain;
    let apply = |w: &VectorField| -> VectorField {
        let comps = (0..n)
            .map(|i| {
                let mut acc = laplacian(w.component(i)).add(&w.component(i).scale(shift));
                for j in 0..n {
                    acc = acc.sub(&strain[i * n + j].mul(w.component(j)));
                }
                acc
            })
            .collect();
        band_truncate(&leray_project(&VectorField::from_components(comps).expect("same grid")), band)
    };
    let mut rng = crate::rng::seeded(seed);
    let mut w = band_truncate(&crate::rng::random_solenoidal(grid, band, 1.0, &mut rng), band);
    let mut rate = 0.0;
    for _ in 0..400 {
        let mw = apply(&w);
        let next_rate = inner_product(&mw, &w)? - shift;
        let norm = mw.l2_norm();
        if norm == 0.0 {
            return Err(Error::Precondition("power iteration collapsed to zero".into()));
        }
        w = mw.scale(1.0 / norm);
        let settled = (next_rate - rate).abs() <= 1e-13 * shift;
        rate = next_rate;
        if settled {
            break;
        }
    }
    Ok((w.scale(size), rate))
}

/// `<(a . grad) b, c>`.
pub fn trilinear(a: &VectorField, b: &VectorField, c: &VectorField) -> Result<f64> {
    inner_product(&advect(a, b), c)
}

/// `<(a . grad) b, b>`, which vanishes for divergence-free `a`, together
/// with the scale `||a||_inf ||grad b||_2 ||b||_2` it is measured against.
pub fn trilinear_antisymmetry(a: &VectorField, b: &VectorField) -> Result<(f64, f64)> {
    let value = trilinear(a, b, b)?;
    let scale = a.max_magnitude() * gradient_norm_squared(b).sqrt() * b.l2_norm();
    Ok((value, scale))
}

/// `|<u, (w . grad) w>| / (||u||_{L^{p,inf}} ||w||_2^{(p-n)/p} ||grad w||_2^{(p+n)/p})`.
pub fn holder_sobolev_ratio(u: &VectorField, w: &VectorField, p: f64) -> Result<f64> {
    u.grid().ensure_same(w.grid())?;
    let n = u.grid().dim() as f64;
    if !(p > n && p.is_finite()) {
        return domain(format!("the Holder-Sobolev chain needs n < p < inf, got p = {p}"));
    }
    let weak = vector_norm(u, LorentzIndex::weak(p)?)?;
    let denom = weak * w.l2_norm().powf((p - n) / p) * gradient_norm_squared(w).sqrt().powf((p + n) / p);
    if denom == 0.0 {
        return Err(Error::Precondition("the Holder-Sobolev ratio is undefined for vanishing fields".into()));
    }
    Ok(trilinear(w, w, u)?.abs() / denom)
}
