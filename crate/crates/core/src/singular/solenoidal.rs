//! Compactly supported divergence-free truncation `phi_R = rho_R phi - v_R`.
//!
//! `rho_R` is a smooth cutoff equal to 1 on `|x| < R` and 0 on `|x| > 2R`.
//! The correction `v_R` solves `div v_R = f_R := grad rho_R . phi` with
//! support in `B(0, 2R)` through the Bogovskii formula with weight
//! `omega_R`, a normalised `(1 - |x/2R|^2)^4` bump. Writing `y = x - rho
//! theta` turns the formula into ray integrals,
//!
//! ```text
//! v(x) = int_{S^{n-1}} theta sum_m C(n-1, m) M_m(x, theta) F_{n-1-m}(x, theta) dtheta
//! M_m  = int_0^inf omega_R(x + r theta) r^m dr
//! F_k  = int_0^inf f_R(x - rho theta) rho^k drho
//! ```
//!
//! in which the kernel singularity at `y = x` has been absorbed by the polar
//! Jacobian. `omega_R` is a degree-8 polynomial along each ray inside its
//! support, so `M_m` is exact under 10-point Gauss-Legendre. `F_k` uses
//! composite Gauss-Legendre with `f_R` interpolated from a spectrally
//! refined copy of `phi`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::{
    divergence, gradient_norm_squared, transform, Grid, ScalarField, SpectralField, VectorField, MAX_DIM,
};
use crate::quadrature::gauss;

/// Resolution of the ray quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationQuadrature {
    /// Azimuthal nodes; in 3-d the polar angle gets half as many
    /// Gauss-Legendre nodes.
    pub angular: usize,
    /// Radial panels per length `R` for the `f_R` integrals.
    pub panels_per_radius: usize,
    /// Refinement factor of the interpolation grid.
    pub upsample: usize,
}

impl Default for TruncationQuadrature {
    fn default() -> Self {
        TruncationQuadrature { angular: 64, panels_per_radius: 4, upsample: 4 }
    }
}

/// `S(s) = e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)})` and `S'(s)` on `(0, 1)`.
fn smoothstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    // S = 1 / (1 + e^{1/s - 1/(1-s)})
    let z = 1.0 / s - 1.0 / (1.0 - s);
    let e = z.exp();
    let value = 1.0 / (1.0 + e);
    let dz = -1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
    let deriv = if e.is_infinite() { 0.0 } else { -e * dz / ((1.0 + e) * (1.0 + e)) };
    (value, deriv)
}

fn norm(x: &[f64; MAX_DIM], n: usize) -> f64 {
    x[..n].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `rho_R(x) = 1 - S((|x| - R) / R)`.
fn cutoff(x: &[f64; MAX_DIM], n: usize, r: f64) -> f64 {
    1.0 - smoothstep((norm(x, n) - r) / r).0
}

fn cutoff_gradient(x: &[f64; MAX_DIM], n: usize, r: f64) -> [f64; MAX_DIM] {
    let len = norm(x, n);
    let (_, d) = smoothstep((len - r) / r);
    let mut g = [0.0; MAX_DIM];
    if d != 0.0 {
        for a in 0..n {
            g[a] = -d * x[a] / (len * r);
        }
    }
    g
}

/// Bump `omega_R` with unit integral, supported in `B(0, 2R)`.
struct Weight {
    n: usize,
    radius: f64,
    scale: f64,
}

impl Weight {
    fn new(n: usize, r: f64) -> Self {
        let radius = 2.0 * r;
        // integral of (1 - s^2)^4 over the unit ball
        let unit = if n == 2 { PI / 5.0 } else { 4.0 * PI * 128.0 / 3465.0 };
        Weight { n, radius, scale: 1.0 / (unit * radius.powi(n as i32)) }
    }

    fn eval(&self, z: &[f64; MAX_DIM]) -> f64 {
        let s2 = z[..self.n].iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            self.scale * (1.0 - s2).powi(4)
        }
    }
}

/// Periodic 6-point Lagrange interpolation of a refined scalar field.
struct Interpolant {
    grid: Grid,
    values: Vec<f64>,
}

const STENCIL: usize = 6;

impl Interpolant {
    fn eval(&self, z: &[f64; MAX_DIM]) -> f64 {
        let n = self.grid.dim();
        let pts = self.grid.points() as i64;
        let h = self.grid.spacing();
        let mut base = [0i64; MAX_DIM];
        let mut weights = [[0.0; STENCIL]; MAX_DIM];
        for a in 0..n {
            let s = (z[a] + 0.5 * self.grid.length()) / h;
            let b = s.floor() as i64 - (STENCIL as i64 / 2 - 1);
            base[a] = b;
            let t = s - b as f64;
            for (j, w) in weights[a].iter_mut().enumerate() {
                let mut l = 1.0;
                for m in 0..STENCIL {
                    if m != j {
                        l *= (t - m as f64) / (j as f64 - m as f64);
                    }
                }
                *w = l;
            }
        }
        let mut acc = 0.0;
        let count = STENCIL.pow(n as u32);
        for c in 0..count {
            let mut rem = c;
            let mut w = 1.0;
            let mut idx = [0usize; MAX_DIM];
            for a in (0..n).rev() {
                let j = rem % STENCIL;
                rem /= STENCIL;
                w *= weights[a][j];
                idx[a] = (base[a] + j as i64).rem_euclid(pts) as usize;
            }
            acc += w * self.values[self.grid.flat_index(idx)];
        }
        acc
    }
}

/// Zero-pad a spectrum onto a grid `factor` times finer. Nyquist modes of
/// the coarse grid are dropped.
fn refine(spec: &SpectralField, factor: usize) -> Result<ScalarField> {
    let coarse = *spec.grid();
    let fine = Grid::new(coarse.dim(), coarse.points() * factor, coarse.length())?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); fine.len()];
    let nf = fine.points() as i64;
    for (m, c) in spec.coefficients().iter().enumerate() {
        let idx = coarse.axis_indices(m);
        if (0..coarse.dim()).any(|a| coarse.is_nyquist(idx[a])) {
            continue;
        }
        let mut fidx = [0usize; MAX_DIM];
        for a in 0..coarse.dim() {
            fidx[a] = coarse.wavenumber(idx[a]).rem_euclid(nf) as usize;
        }
        coeffs[fine.flat_index(fidx)] = *c;
    }
    Ok(SpectralField::from_coefficients(fine, coeffs)?.inverse())
}

/// Angular nodes and weights on the unit sphere of dimension `n - 1`.
fn directions(n: usize, angular: usize) -> Vec<([f64; MAX_DIM], f64)> {
    let w_az = 2.0 * PI / angular as f64;
    if n == 2 {
        return (0..angular)
            .map(|j| {
                let t = j as f64 * w_az;
                ([t.cos(), t.sin(), 0.0], w_az)
            })
            .collect();
    }
    let polar = crate::quadrature::GaussLegendre::new((angular / 2).max(2));
    let mut out = Vec::new();
    for (&mu, &wm) in polar.nodes().iter().zip(polar.weights()) {
        let s = (1.0 - mu * mu).sqrt();
        for j in 0..angular {
            let t = j as f64 * w_az;
            out.push(([s * t.cos(), s * t.sin(), mu], wm * w_az));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn solenoidal_truncate(phi: &VectorField, r: f64) -> Result<VectorField> {
    solenoidal_truncate_with(phi, r, &TruncationQuadrature::default())
}

pub fn solenoidal_truncate_with(phi: &VectorField, r: f64, quad: &TruncationQuadrature) -> Result<VectorField> {
    let grid = *phi.grid();
    let n = grid.dim();
    if !(r > 0.0 && 4.0 * r < grid.length()) {
        return domain(format!("truncation radius must satisfy 0 < 2R < L/2, got R = {r}"));
    }
    if phi.max_magnitude() == 0.0 {
        return Ok(phi.clone());
    }
    let scale = gradient_norm_squared(phi).sqrt();
    let div = divergence(phi).l2_norm();
    if div > 1e-10 * scale.max(phi.l2_norm()) {
        return Err(Error::Precondition(format!("input is not divergence-free: ||div phi||_2 = {div:e}")));
    }

    // f_R = grad rho_R . phi on the refined grid
    let refined: Vec<ScalarField> =
        phi.components().iter().map(|c| refine(&transform(c), quad.upsample)).collect::<Result<_>>()?;
    let fine = *refined[0].grid();
    let source = crate::par::map_range(fine.len(), |m| {
        let x = fine.position(m);
        let g = cutoff_gradient(&x, n, r);
        (0..n).map(|a| g[a] * refined[a].values()[m]).sum::<f64>()
    });
    let source = Interpolant { grid: fine, values: source };
    let weight = Weight::new(n, r);
    let dirs = directions(n, quad.angular);
    let g10 = gauss(10);
    let outer = 2.0 * r;
    let panel = r / quad.panels_per_radius as f64;

    let inside: Vec<usize> = (0..grid.len()).filter(|&m| norm(&grid.position(m), n) < outer).collect();
    let corrections = crate::par::map_slice(&inside, |&m| {
        let x = grid.position(m);
        let x2 = norm(&x, n).powi(2);
        let mut v = [0.0; MAX_DIM];
        for (theta, w) in &dirs {
            let xt: f64 = (0..n).map(|a| x[a] * theta[a]).sum();
            let root = (xt * xt + outer * outer - x2).max(0.0).sqrt();
            let r_exit = -xt + root;
            let rho_exit = xt + root;

            let mut moments_w = [0.0; MAX_DIM];
            let half = 0.5 * r_exit;
            for (&node, &gw) in g10.nodes().iter().zip(g10.weights()) {
                let s = half * (1.0 + node);
                let mut z = [0.0; MAX_DIM];
                for a in 0..n {
                    z[a] = x[a] + s * theta[a];
                }
                let val = weight.eval(&z) * gw * half;
                let mut pw = 1.0;
                for mw in moments_w.iter_mut().take(n) {
                    *mw += val * pw;
                    pw *= s;
                }
            }

            // skip the chord through B(0, R), where f_R vanishes
            let inner = xt * xt + r * r - x2;
            let mut pieces = vec![(0.0, rho_exit)];
            if inner > 0.0 {
                let (c0, c1) = (xt - inner.sqrt(), xt + inner.sqrt());
                pieces = vec![(0.0, c0.max(0.0)), (c1.max(0.0), rho_exit)];
            }
            let mut moments_f = [0.0; MAX_DIM];
            for (lo, hi) in pieces {
                if hi <= lo {
                    continue;
                }
                let count = ((hi - lo) / panel).ceil().max(1.0) as usize;
                let hw = 0.5 * (hi - lo) / count as f64;
                for p in 0..count {
                    let mid = lo + (2 * p + 1) as f64 * hw;
                    for (&node, &gw) in g10.nodes().iter().zip(g10.weights()) {
                        let s = mid + hw * node;
                        let mut z = [0.0; MAX_DIM];
                        for a in 0..n {
                            z[a] = x[a] - s * theta[a];
                        }
                        let val = source.eval(&z) * gw * hw;
                        let mut pw = 1.0;
                        for mf in moments_f.iter_mut().take(n) {
                            *mf += val * pw;
                            pw *= s;
                        }
                    }
                }
            }
            let mut kernel = 0.0;
            for mm in 0..n {
                kernel += binomial(n - 1, mm) * moments_w[mm] * moments_f[n - 1 - mm];
            }
            for a in 0..n {
                v[a] += w * theta[a] * kernel;
            }
        }
        v
    });

    let mut comps: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            phi.component(a).values().iter().enumerate().map(|(m, &p)| cutoff(&grid.position(m), n, r) * p).collect()
        })
        .collect();
    for (&m, v) in inside.iter().zip(&corrections) {
        for a in 0..n {
            comps[a][m] -= v[a];
        }
    }
    VectorField::from_components(comps.into_iter().map(|c| ScalarField::from_values(grid, c)).collect::<Result<_>>()?)
}
