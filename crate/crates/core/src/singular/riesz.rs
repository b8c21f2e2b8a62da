use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{domain, Result};
use crate::grid::{transform, Grid, ScalarField, SpectralField, VectorField, MAX_DIM};

/// Derivative frequency vector at an index and its squared length.
pub(crate) fn odd_frequency(grid: &Grid, table: &[f64], idx: [usize; MAX_DIM]) -> ([f64; MAX_DIM], f64) {
    let mut xi = [0.0; MAX_DIM];
    let mut k2 = 0.0;
    for a in 0..grid.dim() {
        xi[a] = table[idx[a]];
        k2 += xi[a] * xi[a];
    }
    (xi, k2)
}

/// `R_i f` with multiplier `-i xi_i / |xi|`; the zero mode maps to 0.
pub fn riesz(f: &ScalarField, i: usize) -> ScalarField {
    riesz_spectral(&transform(f), i).inverse()
}

fn riesz_spectral(spec: &SpectralField, i: usize) -> SpectralField {
    let grid = *spec.grid();
    let table = grid.derivative_table();
    spec.apply(|idx| {
        let (xi, k2) = odd_frequency(&grid, &table, idx);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi[i] / k2.sqrt())
        }
    })
}

/// `(R_1 f, ..., R_n f)`.
pub fn riesz_vector(f: &ScalarField) -> VectorField {
    let spec = transform(f);
    let n = f.grid().dim();
    VectorField::from_components((0..n).map(|i| riesz_spectral(&spec, i).inverse()).collect())
        .expect("components share the input grid")
}

/// `R_j R_k f`, multiplier `-xi_j xi_k / |xi|^2`.
pub fn riesz_pair(f: &ScalarField, j: usize, k: usize) -> ScalarField {
    let grid = *f.grid();
    let table = grid.derivative_table();
    transform(f)
        .apply_real(|idx| {
            let (xi, k2) = odd_frequency(&grid, &table, idx);
            if k2 == 0.0 {
                0.0
            } else {
                -xi[j] * xi[k] / k2
            }
        })
        .inverse()
}

/// Leray projection on spectra: `u_i - xi_i xi_j u_j / |xi|^2`, identity on
/// modes where the derivative frequency vanishes.
pub fn leray_project_spectral(specs: &[SpectralField]) -> Vec<SpectralField> {
    let grid = *specs[0].grid();
    let n = grid.dim();
    let table = grid.derivative_table();
    let len = grid.len();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); len]; n];
    let rows = crate::par::map_range(len, |m| {
        let (xi, k2) = odd_frequency(&grid, &table, grid.axis_indices(m));
        let mut row = [Complex64::new(0.0, 0.0); MAX_DIM];
        if k2 == 0.0 {
            for a in 0..n {
                row[a] = specs[a].coefficients()[m];
            }
            return row;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..n {
            dot += specs[a].coefficients()[m] * xi[a];
        }
        for a in 0..n {
            row[a] = specs[a].coefficients()[m] - dot * (xi[a] / k2);
        }
        row
    });
    for (m, row) in rows.iter().enumerate() {
        for a in 0..n {
            out[a][m] = row[a];
        }
    }
    out.into_iter().map(|c| SpectralField::from_coefficients(grid, c).expect("length matches grid")).collect()
}

pub fn leray_project(u: &VectorField) -> VectorField {
    let specs: Vec<SpectralField> = u.components().iter().map(transform).collect();
    VectorField::from_components(leray_project_spectral(&specs).iter().map(SpectralField::inverse).collect())
        .expect("components share the input grid")
}

/// Riesz kernel constant `Gamma((n+1)/2) / pi^{(n+1)/2}`.
fn kernel_constant(n: usize) -> f64 {
    match n {
        2 => 1.0 / (2.0 * PI),
        3 => 1.0 / (PI * PI),
        _ => unreachable!("grids are 2-d or 3-d"),
    }
}

/// Sampled truncated kernel `c_n y_i / |y|^{n+1}` on `eps < |y| < L/2`,
/// indexed by minimal-image displacement in FFT order.
fn truncated_kernel(grid: &Grid, eps: f64, i: usize) -> ScalarField {
    let n = grid.dim();
    let h = grid.spacing();
    let half = 0.5 * grid.length();
    let c = kernel_constant(n);
    let values = crate::par::map_range(grid.len(), |m| {
        let idx = grid.axis_indices(m);
        let mut y = [0.0; MAX_DIM];
        let mut r2 = 0.0;
        for a in 0..n {
            y[a] = grid.min_image(idx[a] as i64) as f64 * h;
            r2 += y[a] * y[a];
        }
        let r = r2.sqrt();
        if r > eps && r < half {
            c * y[i] / r.powi(n as i32 + 1)
        } else {
            0.0
        }
    });
    ScalarField::from_values(*grid, values).expect("length matches grid")
}

fn check_eps(grid: &Grid, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5 * grid.length()) {
        return domain(format!("truncation radius must lie in (0, L/2), got {eps}"));
    }
    Ok(())
}

/// `R_{i,eps} f(x) = sum_y K_eps(y) f(x - y) dV`, the Riemann sum of the
/// truncated kernel over minimal-image displacements.
///
/// The circular sum is evaluated through the convolution theorem; the result
/// equals [`truncated_riesz_direct`] to round-off.
pub fn truncated_riesz(f: &ScalarField, eps: f64, i: usize) -> Result<ScalarField> {
    let grid = *f.grid();
    check_eps(&grid, eps)?;
    let kernel = transform(&truncated_kernel(&grid, eps, i));
    let scale = grid.volume();
    let fs = transform(f);
    let coeffs = fs.coefficients().iter().zip(kernel.coefficients()).map(|(a, b)| a * b * scale).collect();
    Ok(SpectralField::from_coefficients(grid, coeffs)?.inverse())
}

/// Same sum as [`truncated_riesz`], evaluated cell by cell.
pub fn truncated_riesz_direct(f: &ScalarField, eps: f64, i: usize) -> Result<ScalarField> {
    let grid = *f.grid();
    check_eps(&grid, eps)?;
    let kernel = truncated_kernel(&grid, eps, i);
    let taps: Vec<(usize, f64)> = kernel.values().iter().copied().enumerate().filter(|(_, k)| *k != 0.0).collect();
    let n = grid.dim();
    let pts = grid.points();
    let dv = grid.cell_volume();
    let values = crate::par::map_range(grid.len(), |m| {
        let x = grid.axis_indices(m);
        let mut acc = 0.0;
        for &(d, k) in &taps {
            let dy = grid.axis_indices(d);
            let mut src = [0usize; MAX_DIM];
            for a in 0..n {
                src[a] = (x[a] + pts - dy[a]) % pts;
            }
            acc += k * f.values()[grid.flat_index(src)];
        }
        acc * dv
    });
    ScalarField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{divergence, gradient, inner_product};

    fn grid() -> Grid {
        Grid::new(2, 32, 2.0 * PI).unwrap()
    }

    fn smooth(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, |x| (x[0] + 0.3).sin() * (2.0 * x[1]).cos() + 0.4 * (3.0 * x[0] - x[1]).cos())
    }

    #[test]
    fn cosine_goes_to_sine() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x| x[0].cos());
        let r = riesz(&f, 0);
        let want = ScalarField::from_fn(g, |x| x[0].sin());
        assert!(r.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn riesz_square_sum_is_minus_identity() {
        let g = grid();
        let f = smooth(g).map(|v| v + 2.0);
        let mut acc = ScalarField::zeros(g);
        for j in 0..2 {
            acc = acc.add(&riesz(&riesz(&f, j), j));
        }
        let want = f.map(|v| -v).add(&ScalarField::constant(g, f.mean()));
        assert!(acc.sub(&want).max_abs() < 1e-10);
    }

    #[test]
    fn leray_kills_gradients_and_fixes_solenoidal() {
        let g = grid();
        let psi = smooth(g);
        let grad = gradient(&psi);
        assert!(leray_project(&grad).max_magnitude() < 1e-10);
        let sol = VectorField::from_fn(g, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
        assert!(leray_project(&sol).sub(&sol).max_magnitude() < 1e-12);
        let mixed = grad.add(&sol);
        let once = leray_project(&mixed);
        assert!(leray_project(&once).sub(&once).max_magnitude() < 1e-12);
        assert!(divergence(&once).max_abs() < 1e-10);
    }

    #[test]
    fn truncated_constant_vanishes_and_is_skew() {
        let g = grid();
        let c = ScalarField::constant(g, 2.0);
        assert!(truncated_riesz(&c, 0.5, 0).unwrap().max_abs() < 1e-12);
        let f = smooth(g);
        let h = ScalarField::from_fn(g, |x| (2.0 * x[0] - x[1]).sin());
        let a = inner_product(&truncated_riesz(&f, 0.4, 1).unwrap(), &h).unwrap();
        let b = inner_product(&f, &truncated_riesz(&h, 0.4, 1).unwrap()).unwrap();
        assert!((a + b).abs() < 1e-10 * a.abs().max(1.0));
        assert!(truncated_riesz(&f, 0.0, 0).is_err());
        assert!(truncated_riesz(&f, PI, 0).is_err());
    }

    #[test]
    fn fft_and_direct_sums_agree() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = smooth(g);
        let a = truncated_riesz(&f, 0.7, 0).unwrap();
        let b = truncated_riesz_direct(&f, 0.7, 0).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-12);
    }
}
