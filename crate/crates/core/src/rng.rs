//! Seeded random fields. Every random quantity in the crate is drawn from a
//! ChaCha8 stream seeded by a single `u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::grid::{Grid, ScalarField, SpectralField, VectorField};
use crate::singular::leray_project;

pub type FieldRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator for `seed`. Stream 0 is
/// [`seeded`].
pub fn seeded_stream(seed: u64, stream: u64) -> FieldRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent samples uniform in `[-1, 1)` per cell.
pub fn white_noise(grid: Grid, rng: &mut FieldRng) -> ScalarField {
    use rand::Rng;
    let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScalarField::from_values(grid, values).expect("length matches grid")
}

/// Mean-zero real field with Gaussian coefficients on `1 <= |k_a| <= band`
/// per axis (at least one nonzero), no Nyquist content.
pub fn band_limited(grid: Grid, band: i64, rng: &mut FieldRng) -> ScalarField {
    let band = band.clamp(1, grid.points() as i64 / 2 - 1);
    let coeffs = (0..grid.len())
        .map(|m| {
            let idx = grid.axis_indices(m);
            let inside = (0..grid.dim()).all(|a| grid.wavenumber(idx[a]).abs() <= band);
            let zero = (0..grid.dim()).all(|a| idx[a] == 0);
            // draw for every cell so the stream does not depend on the band
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            if inside && !zero {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    // the real part of the inverse is the Hermitian symmetrisation
    SpectralField::from_coefficients(grid, coeffs).expect("length matches grid").inverse()
}

/// Divergence-free, mean-zero, band-limited vector field with
/// `||u||_2 = amplitude`.
pub fn random_solenoidal(grid: Grid, band: i64, amplitude: f64, rng: &mut FieldRng) -> VectorField {
    let comps = (0..grid.dim()).map(|_| band_limited(grid, band, rng)).collect();
    let u = leray_project(&VectorField::from_components(comps).expect("components share the grid"));
    let norm = u.l2_norm();
    if norm == 0.0 {
        u
    } else {
        u.scale(amplitude / norm)
    }
}
