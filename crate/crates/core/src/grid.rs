//! Periodic grids on the box `[-L/2, L/2)^n` and the fields that live on them.
//!
//! Samples are stored row-major with the last axis fastest. Spectral
//! coefficients are Fourier-series coefficients, i.e. the DFT divided by the
//! number of cells, stored in FFT order along every axis (index `i < N/2`
//! is wavenumber `i`, otherwise `i - N`).
//!
//! Odd multipliers (derivatives, Riesz transforms, the off-diagonal part of
//! the Leray projection) use the derivative frequency, which vanishes on the
//! Nyquist plane of the differentiated axis. Even multipliers (Laplacian,
//! heat semigroup) use the full frequency. This keeps every operator
//! real-valued on real input.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 8, got {points}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        Ok(Grid { dim, points, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Box volume `L^n`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of sample `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn axis_indices(&self, flat: usize) -> [usize; MAX_DIM] {
        let n = self.points;
        let mut out = [0; MAX_DIM];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    pub fn flat_index(&self, idx: [usize; MAX_DIM]) -> usize {
        let n = self.points;
        (0..self.dim).fold(0, |acc, a| acc * n + idx[a] % n)
    }

    /// Physical position of cell `flat`; unused trailing entries are 0.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.axis_indices(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Signed wavenumber of FFT index `i`, in `[-N/2, N/2)`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.points / 2
    }

    /// Physical frequency `2 pi k / L`.
    pub fn frequency(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.length
    }

    /// Frequency used by odd multipliers: zero on the Nyquist index.
    pub fn derivative_frequency(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            self.frequency(i)
        }
    }

    /// Wrap an integer displacement into `[-N/2, N/2)`.
    pub fn min_image(&self, d: i64) -> i64 {
        let n = self.points as i64;
        let r = d.rem_euclid(n);
        if r < n / 2 {
            r
        } else {
            r - n
        }
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Mismatch(format!("grids differ: {self:?} vs {other:?}")))
        }
    }

    /// Largest retained wavenumber under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.points as i64) - 1) / 3
    }

    pub(crate) fn frequency_table(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.frequency(i)).collect()
    }

    pub(crate) fn derivative_table(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.derivative_frequency(i)).collect()
    }
}

/// Anything made of real scalar components on one grid.
pub trait Field {
    fn grid(&self) -> &Grid;
    fn components(&self) -> &[ScalarField];
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(ScalarField { grid, values })
    }

    /// Sample `f(x)` at every cell position.
    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> f64 + Sync + Send>(grid: Grid, f: F) -> Self {
        let values = crate::par::map_range(grid.len(), |i| f(grid.position(i)));
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination. Panics if the grids differ.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "pointwise operation on different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `integral of |f|` over the box.
    pub fn l1_norm(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Lebesgue norm; `p = inf` is the maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.grid.cell_volume() * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn transform(&self) -> SpectralField {
        transform(self)
    }
}

impl Field for ScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn components(&self) -> &[ScalarField] {
        std::slice::from_ref(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField { grid, components: vec![ScalarField::zeros(grid); grid.dim()] }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components.first().ok_or_else(|| Error::Mismatch("vector field needs components".into()))?.grid();
        if components.len() != grid.dim() {
            return Err(Error::Mismatch(format!(
                "vector field on a {}-d grid needs {} components, got {}",
                grid.dim(),
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            grid.ensure_same(c.grid())?;
        }
        Ok(VectorField { grid, components })
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> [f64; MAX_DIM] + Sync + Send>(grid: Grid, f: F) -> Self {
        let samples = crate::par::map_range(grid.len(), |i| f(grid.position(i)));
        let components =
            (0..grid.dim()).map(|a| ScalarField { grid, values: samples.iter().map(|s| s[a]).collect() }).collect();
        VectorField { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut ScalarField {
        &mut self.components[a]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField { grid: self.grid, components: self.components.iter().map(f).collect() }
    }

    pub fn zip_components(&self, other: &VectorField, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        assert_eq!(self.grid, other.grid, "pointwise operation on different grids");
        let components = self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect();
        VectorField { grid: self.grid, components }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        self.zip_components(other, ScalarField::add)
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.zip_components(other, ScalarField::sub)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_components(|c| c.scale(a))
    }

    /// Pointwise Euclidean magnitude `|u(x)|`.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.components.iter().map(ScalarField::l2_norm_squared).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().max_abs()
    }

    /// Component means (the zero Fourier mode).
    pub fn mean(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::mean).collect()
    }
}

impl Field for VectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn components(&self) -> &[ScalarField] {
        &self.components
    }
}

/// Rank-two field `F_{jk}`, stored with `k` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.dim();
        TensorField { grid, components: vec![ScalarField::zeros(grid); n * n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize, usize) -> ScalarField) -> Self {
        let n = grid.dim();
        let components = (0..n * n).map(|jk| f(jk / n, jk % n)).collect::<Vec<_>>();
        for c in &components {
            assert_eq!(*c.grid(), grid, "tensor component on a different grid");
        }
        TensorField { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, j: usize, k: usize) -> &ScalarField {
        &self.components[j * self.grid.dim() + k]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn scale(&self, a: f64) -> Self {
        TensorField { grid: self.grid, components: self.components.iter().map(|c| c.scale(a)).collect() }
    }

    pub fn add(&self, other: &TensorField) -> Self {
        assert_eq!(self.grid, other.grid, "pointwise operation on different grids");
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect();
        TensorField { grid: self.grid, components }
    }
}

impl Field for TensorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn components(&self) -> &[ScalarField] {
        &self.components
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coefficients(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Mismatch(format!("expected {} coefficients, got {}", grid.len(), coeffs.len())));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the signed wavevector `k`.
    pub fn coefficient(&self, k: [i64; MAX_DIM]) -> Complex64 {
        let n = self.grid.points() as i64;
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.grid.dim() {
            idx[a] = k[a].rem_euclid(n) as usize;
        }
        self.coeffs[self.grid.flat_index(idx)]
    }

    /// `L^n * sum |c_k|^2`, equal to `integral |f|^2` by Parseval.
    pub fn energy(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Multiply every coefficient by `m(axis indices)`.
    pub fn apply(&self, m: impl Fn([usize; MAX_DIM]) -> Complex64 + Sync + Send) -> Self {
        let grid = self.grid;
        let coeffs = crate::par::map_range(grid.len(), |i| self.coeffs[i] * m(grid.axis_indices(i)));
        SpectralField { grid, coeffs }
    }

    /// Same as [`apply`](Self::apply) with a real multiplier.
    pub fn apply_real(&self, m: impl Fn([usize; MAX_DIM]) -> f64 + Sync + Send) -> Self {
        let grid = self.grid;
        let coeffs = crate::par::map_range(grid.len(), |i| self.coeffs[i] * m(grid.axis_indices(i)));
        SpectralField { grid, coeffs }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        assert_eq!(self.grid, other.grid, "spectral sum on different grids");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        assert_eq!(self.grid, other.grid, "spectral difference on different grids");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn scale(&self, a: f64) -> Self {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// Zero every mode with some `|k_a|` above the 2/3-rule cutoff.
    pub fn dealias(&self) -> Self {
        let cut = self.grid.dealias_cutoff();
        let grid = self.grid;
        self.apply_real(|idx| {
            let keep = (0..grid.dim()).all(|a| grid.wavenumber(idx[a]).abs() <= cut);
            if keep {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn inverse(&self) -> ScalarField {
        inverse_transform(self)
    }
}

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Unnormalised n-dimensional FFT in place.
fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points();
    let dim = grid.dim();
    let fft = plan(n, inverse);
    let total = data.len();
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let block = n * stride;
        // gather every line along `axis` contiguously, transform in one batch
        let mut line = 0;
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for j in 0..n {
                    lines[line * n + j] = data[base + j * stride];
                }
                line += 1;
            }
        }
        fft.process(&mut lines);
        let mut line = 0;
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for j in 0..n {
                    data[base + j * stride] = lines[line * n + j];
                }
                line += 1;
            }
        }
    }
}

pub fn transform(f: &ScalarField) -> SpectralField {
    let grid = *f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&grid, &mut data, false);
    let norm = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= norm;
    }
    SpectralField { grid, coeffs: data }
}

/// Real part of the inverse transform.
pub fn inverse_transform(spec: &SpectralField) -> ScalarField {
    let grid = *spec.grid();
    let mut data = spec.coeffs.clone();
    fft_nd(&grid, &mut data, true);
    ScalarField { grid, values: data.into_iter().map(|c| c.re).collect() }
}

/// Trigonometric interpolation onto another grid with the same dimension
/// and box. Modes that exist on both grids are copied; Nyquist modes of
/// either grid are dropped so the result stays real.
pub fn resample(f: &ScalarField, target: Grid) -> Result<ScalarField> {
    let source = *f.grid();
    if source.dim() != target.dim() || source.length() != target.length() {
        return Err(Error::Mismatch(format!(
            "cannot resample a {}-d box of side {} onto a {}-d box of side {}",
            source.dim(),
            source.length(),
            target.dim(),
            target.length()
        )));
    }
    let spec = transform(f);
    let half = (source.points().min(target.points()) / 2) as i64;
    let nt = target.points() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); target.len()];
    for (m, c) in spec.coefficients().iter().enumerate() {
        let idx = source.axis_indices(m);
        let mut tidx = [0usize; MAX_DIM];
        let mut keep = true;
        for a in 0..source.dim() {
            let k = source.wavenumber(idx[a]);
            keep &= k.abs() < half;
            tidx[a] = k.rem_euclid(nt) as usize;
        }
        if keep {
            coeffs[target.flat_index(tidx)] = *c;
        }
    }
    Ok(SpectralField { grid: target, coeffs }.inverse())
}

pub fn resample_vector(u: &VectorField, target: Grid) -> Result<VectorField> {
    VectorField::from_components(u.components().iter().map(|c| resample(c, target)).collect::<Result<_>>()?)
}

/// `i xi_a` applied to a spectrum.
pub(crate) fn spectral_derivative(spec: &SpectralField, axis: usize) -> SpectralField {
    let table = spec.grid().derivative_table();
    spec.apply(|idx| Complex64::new(0.0, table[idx[axis]]))
}

pub fn partial_derivative(f: &ScalarField, axis: usize) -> ScalarField {
    spectral_derivative(&transform(f), axis).inverse()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let spec = transform(f);
    let grid = *f.grid();
    let components = (0..grid.dim()).map(|a| spectral_derivative(&spec, a).inverse()).collect();
    VectorField { grid, components }
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let mut acc = SpectralField::zeros(grid);
    for (a, c) in u.components().iter().enumerate() {
        acc = acc.add(&spectral_derivative(&transform(c), a));
    }
    acc.inverse()
}

/// Spectral Laplacian, multiplier `-|xi|^2`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let table = grid.frequency_table();
    transform(f).apply_real(|idx| -(0..grid.dim()).map(|a| table[idx[a]] * table[idx[a]]).sum::<f64>()).inverse()
}

/// `[grad u]_{ak} = d_k u_a`, returned as a tensor with `k` fastest.
pub fn vector_gradient(u: &VectorField) -> TensorField {
    let grid = *u.grid();
    let n = grid.dim();
    let specs: Vec<SpectralField> = u.components().iter().map(transform).collect();
    let mut comps = Vec::with_capacity(n * n);
    for spec in &specs {
        for k in 0..n {
            comps.push(spectral_derivative(spec, k).inverse());
        }
    }
    TensorField { grid, components: comps }
}

/// `[(a . grad) b]_i = a_k d_k b_i`, products taken pointwise.
pub fn advect(a: &VectorField, b: &VectorField) -> VectorField {
    assert_eq!(a.grid(), b.grid(), "advection on different grids");
    let grid = *a.grid();
    let n = grid.dim();
    let grad_b = vector_gradient(b);
    let components = (0..n)
        .map(|i| {
            let mut acc = ScalarField::zeros(grid);
            for k in 0..n {
                acc = acc.add(&a.component(k).mul(grad_b.get(i, k)));
            }
            acc
        })
        .collect();
    VectorField { grid, components }
}

/// `||grad u||_2^2` summed over components.
pub fn gradient_norm_squared(u: &VectorField) -> f64 {
    let grid = *u.grid();
    let table = grid.derivative_table();
    u.components()
        .iter()
        .map(|c| {
            let spec = transform(c);
            grid.volume()
                * spec
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(i, z)| {
                        let idx = grid.axis_indices(i);
                        let k2: f64 = (0..grid.dim()).map(|a| table[idx[a]] * table[idx[a]]).sum();
                        k2 * z.norm_sqr()
                    })
                    .sum::<f64>()
        })
        .sum()
}

/// `<f, g> = cell_volume * sum f g`, summed over components.
pub fn inner_product<F: Field, G: Field>(f: &F, g: &G) -> Result<f64> {
    f.grid().ensure_same(g.grid())?;
    let (fc, gc) = (f.components(), g.components());
    if fc.len() != gc.len() {
        return Err(Error::Mismatch(format!("component counts differ: {} vs {}", fc.len(), gc.len())));
    }
    let sum: f64 =
        fc.iter().zip(gc).map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>()).sum();
    Ok(f.grid().cell_volume() * sum)
}
