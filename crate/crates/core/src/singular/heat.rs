//! Heat semigroup as a multiplier, and the Gaussian kernel in real space.
//!
//! The real-space kernel is periodized: the box is a torus, so the kernel
//! that reproduces `e^{t Delta}` is the sum of the free-space Gaussian over
//! all lattice images. Images are added until the next shell is below
//! round-off relative to the peak.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::grid::{transform, Grid, ScalarField, VectorField, MAX_DIM};

/// Most lattice images per side before the kernel is declared too wide.
const MAX_IMAGES: i64 = 8;

/// Fields that a real even Fourier multiplier can act on component-wise.
pub trait Multiplied: Sized {
    fn grid_of(&self) -> &Grid;
    fn multiply(&self, m: &(dyn Fn([usize; MAX_DIM]) -> f64 + Sync + Send)) -> Self;
}

impl Multiplied for ScalarField {
    fn grid_of(&self) -> &Grid {
        self.grid()
    }

    fn multiply(&self, m: &(dyn Fn([usize; MAX_DIM]) -> f64 + Sync + Send)) -> Self {
        transform(self).apply_real(m).inverse()
    }
}

impl Multiplied for VectorField {
    fn grid_of(&self) -> &Grid {
        self.grid()
    }

    fn multiply(&self, m: &(dyn Fn([usize; MAX_DIM]) -> f64 + Sync + Send)) -> Self {
        self.map_components(|c| c.multiply(m))
    }
}

/// `e^{t Delta} f` with multiplier `exp(-t |xi|^2)`.
pub fn heat_semigroup<F: Multiplied + Clone>(f: &F, t: f64) -> Result<F> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("heat semigroup needs t >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid_of();
    let table = grid.frequency_table();
    let m = move |idx: [usize; MAX_DIM]| {
        let k2: f64 = (0..grid.dim()).map(|a| table[idx[a]] * table[idx[a]]).sum();
        (-t * k2).exp()
    };
    Ok(f.multiply(&m))
}

/// Free-space heat kernel `(4 pi t)^{-n/2} exp(-|x|^2 / 4t)` with `n = x.len()`.
pub fn heat_kernel(t: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// The periodized kernel sampled at the grid positions.
#[derive(Clone, Debug)]
pub struct HeatKernelSample {
    pub t: f64,
    pub values: ScalarField,
}

impl HeatKernelSample {
    /// `cell_volume * sum Phi`, which should be 1.
    pub fn total_integral(&self) -> f64 {
        self.values.sum() * self.values.grid().cell_volume()
    }
}

/// One-dimensional periodized Gaussian at the given offsets.
fn periodic_profile(grid: &Grid, t: f64, offsets: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    let l = grid.length();
    let h = grid.spacing();
    // cell sums differ from the integral by 2 exp(-t (2 pi / h)^2)
    if t * (2.0 * PI / h).powi(2) < 31.0 {
        return domain(format!("t = {t} is too small for the grid to resolve the Gaussian"));
    }
    let images = (((166.0 * t).sqrt() / l) - 0.5).ceil().max(1.0) as i64;
    if images > MAX_IMAGES {
        return Err(Error::TailTruncation(format!(
            "t = {t} needs {images} periodic images per side on a box of side {l}"
        )));
    }
    let norm = (4.0 * PI * t).sqrt();
    Ok(offsets
        .map(|s| (-images..=images).map(|m| (-(s + m as f64 * l).powi(2) / (4.0 * t)).exp()).sum::<f64>() / norm)
        .collect())
}

pub fn heat_kernel_sample(grid: &Grid, t: f64) -> Result<HeatKernelSample> {
    let profile = periodic_profile(grid, t, (0..grid.points()).map(|i| grid.coordinate(i)))?;
    let values = ScalarField::from_fn(*grid, |x| {
        let mut v = 1.0;
        for a in 0..grid.dim() {
            let i = ((x[a] / grid.spacing()) + grid.points() as f64 / 2.0).round() as usize;
            v *= profile[i];
        }
        v
    });
    Ok(HeatKernelSample { t, values })
}

/// `(Phi_t * f)(x) = sum_y Phi_t(y) f(x - y) dV` by direct circular sums.
///
/// The periodized Gaussian is a product of one-dimensional profiles, so the
/// n-dimensional sum is carried out one axis at a time.
pub fn kernel_convolve(f: &ScalarField, t: f64) -> Result<ScalarField> {
    let grid = *f.grid();
    let n = grid.points();
    let h = grid.spacing();
    let taps = periodic_profile(&grid, t, (0..n).map(|d| grid.min_image(d as i64) as f64 * h))?;
    let mut data = f.values().to_vec();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let src = data.clone();
        crate::par::fill(&mut data, |m| {
            let i = (m / stride) % n;
            let base = m - i * stride;
            let mut acc = 0.0;
            for d in 0..n {
                let j = (i + n - d) % n;
                acc += taps[d] * src[base + j * stride];
            }
            acc * h
        });
    }
    ScalarField::from_values(grid, data)
}
