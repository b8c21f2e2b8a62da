use rustfft::num_complex::Complex64;

use crate::grid::{transform, ScalarField, SpectralField, TensorField, VectorField};
use crate::singular::leray_project_spectral;

/// `F_jk = u_j u_k`. With `dealias`, the factors are truncated by the 2/3
/// rule before multiplying.
pub fn nonlinear_flux(u: &VectorField, dealias: bool) -> TensorField {
    let grid = *u.grid();
    let n = grid.dim();
    let factors: Vec<ScalarField> = if dealias {
        u.components().iter().map(|c| transform(c).dealias().inverse()).collect()
    } else {
        u.components().to_vec()
    };
    let mut upper: Vec<Option<ScalarField>> = vec![None; n * n];
    for j in 0..n {
        for k in j..n {
            upper[j * n + k] = Some(factors[j].mul(&factors[k]));
        }
    }
    TensorField::from_fn(grid, |j, k| {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        upper[a * n + b].clone().expect("upper triangle filled")
    })
}

/// `P = R_j R_k F_jk`, multiplier `-xi_j xi_k / |xi|^2`, zero mode 0.
pub fn pressure_from_flux(flux: &TensorField) -> ScalarField {
    let grid = *flux.grid();
    let n = grid.dim();
    let table = grid.derivative_table();
    let mut acc = SpectralField::zeros(grid);
    for j in 0..n {
        for k in 0..n {
            let term = transform(flux.get(j, k)).apply_real(|idx| {
                let xi: Vec<f64> = (0..n).map(|a| table[idx[a]]).collect();
                let k2: f64 = xi.iter().map(|x| x * x).sum();
                if k2 == 0.0 {
                    0.0
                } else {
                    -xi[j] * xi[k] / k2
                }
            });
            acc = acc.add(&term);
        }
    }
    acc.inverse()
}

/// Spectra of `G_i = P_ij d_k F_jk`, the projected flux divergence.
pub fn flux_divergence_projected(flux: &TensorField, dealias: bool) -> Vec<SpectralField> {
    let grid = *flux.grid();
    let n = grid.dim();
    let table = grid.derivative_table();
    let specs: Vec<SpectralField> = flux.components().iter().map(transform).collect();
    let div: Vec<SpectralField> = (0..n)
        .map(|j| {
            let mut acc = SpectralField::zeros(grid);
            for k in 0..n {
                acc = acc.add(&specs[j * n + k].apply(|idx| Complex64::new(0.0, table[idx[k]])));
            }
            if dealias {
                acc.dealias()
            } else {
                acc
            }
        })
        .collect();
    leray_project_spectral(&div)
}
