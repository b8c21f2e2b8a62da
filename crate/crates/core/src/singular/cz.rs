//! Calderon-Zygmund decomposition over dyadic cubes of the grid, and the
//! empirical weak-(1,1) constant of the Riesz transform.

use crate::error::{domain, Error, Result};
use crate::grid::{Grid, ScalarField, MAX_DIM};
use crate::lorentz::distribution_function;

/// Dyadic cube of `side` cells starting at cell `corner`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Cube {
    pub corner: [usize; MAX_DIM],
    pub side: usize,
    /// Average of `|f|` over the cube.
    pub average: f64,
}

impl Cube {
    pub fn cells(&self, dim: usize) -> usize {
        self.side.pow(dim as u32)
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        self.cells(grid.dim()) as f64 * grid.cell_volume()
    }

    fn flat_indices(&self, grid: &Grid) -> Vec<usize> {
        let dim = grid.dim();
        let count = self.cells(dim);
        (0..count)
            .map(|c| {
                let mut idx = [0usize; MAX_DIM];
                let mut rem = c;
                for a in (0..dim).rev() {
                    idx[a] = self.corner[a] + rem % self.side;
                    rem /= self.side;
                }
                grid.flat_index(idx)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CZDecomposition {
    pub alpha: f64,
    pub cubes: Vec<Cube>,
    pub good: ScalarField,
    pub bad: ScalarField,
}

impl CZDecomposition {
    /// Total measure of the selected cubes.
    pub fn cube_measure(&self) -> f64 {
        let grid = self.good.grid();
        self.cubes.iter().map(|c| c.measure(grid)).sum()
    }

    /// Measure of the dilated cubes `Q*` with factor `2 sqrt(n)`, counted
    /// with overlap. Diagnostic only.
    pub fn dilated_measure(&self) -> f64 {
        let n = self.good.grid().dim() as f64;
        (2.0 * n.sqrt()).powf(n) * self.cube_measure()
    }

    /// Mask of cells covered by some cube.
    pub fn covered(&self) -> Vec<bool> {
        let grid = *self.good.grid();
        let mut mask = vec![false; grid.len()];
        for c in &self.cubes {
            for i in c.flat_indices(&grid) {
                mask[i] = true;
            }
        }
        mask
    }

    /// Mean of `b` on every cube.
    pub fn bad_means(&self) -> Vec<f64> {
        let grid = *self.good.grid();
        self.cubes
            .iter()
            .map(|c| {
                let idx = c.flat_indices(&grid);
                idx.iter().map(|&i| self.bad.values()[i]).sum::<f64>() / idx.len() as f64
            })
            .collect()
    }
}

/// Margins of the decomposition's defining properties. Each margin is
/// non-positive when its property holds.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CZCheck {
    /// `max |f| - alpha` over uncovered cells.
    pub off_cubes: f64,
    /// `max (alpha - average)` over cubes; the averages must exceed alpha.
    pub average_lower: f64,
    /// `max (average - 2^n alpha)` over cubes.
    pub average_upper: f64,
    /// `sum |Q_k| - ||f||_1 / alpha`.
    pub total_measure: f64,
    /// `max |f - g - b|`.
    pub reconstruction: f64,
    /// `max_k |mean_{Q_k} b| / max |f|`.
    pub bad_mean: f64,
}

impl CZCheck {
    /// All margins within `tol` relative to the natural scale of each.
    pub fn holds(&self, alpha: f64, f_max: f64, f_l1: f64, tol: f64) -> bool {
        self.off_cubes <= tol * alpha
            && self.average_lower < 0.0
            && self.average_upper <= tol * alpha
            && self.total_measure <= tol * f_l1 / alpha
            && self.reconstruction == 0.0
            && self.bad_mean <= tol
            && f_max.is_finite()
    }
}

impl CZDecomposition {
    pub fn check(&self, f: &ScalarField) -> Result<CZCheck> {
        let grid = *f.grid();
        grid.ensure_same(self.good.grid())?;
        let alpha = self.alpha;
        let covered = self.covered();
        let off_cubes = f
            .values()
            .iter()
            .zip(&covered)
            .filter(|(_, &c)| !c)
            .map(|(v, _)| v.abs() - alpha)
            .fold(f64::NEG_INFINITY, f64::max);
        let cap = (1u64 << grid.dim()) as f64 * alpha;
        let average_lower = self.cubes.iter().map(|c| alpha - c.average).fold(f64::NEG_INFINITY, f64::max);
        let average_upper = self.cubes.iter().map(|c| c.average - cap).fold(f64::NEG_INFINITY, f64::max);
        let total_measure = self.cube_measure() - f.l1_norm() / alpha;
        let reconstruction = f
            .values()
            .iter()
            .zip(self.good.values().iter().zip(self.bad.values()))
            .map(|(v, (g, b))| (v - g - b).abs())
            .fold(0.0, f64::max);
        let scale = f.max_abs();
        let bad_mean = self.bad_means().iter().map(|m| m.abs() / scale).fold(0.0, f64::max);
        Ok(CZCheck { off_cubes, average_lower, average_upper, total_measure, reconstruction, bad_mean })
    }
}

/// Stopping-time decomposition of `f` at height `alpha`.
///
/// Starting from the whole box, every cube whose `|f|`-average is at most
/// `alpha` is split into its `2^n` dyadic children; a child whose average
/// exceeds `alpha` is selected and not split further. Single cells are never
/// split. Cubes come out in depth-first order, which is deterministic.
pub fn cz_decompose(f: &ScalarField, alpha: f64) -> Result<CZDecomposition> {
    let grid = *f.grid();
    let mean = f.values().iter().map(|v| v.abs()).sum::<f64>() / grid.len() as f64;
    if !(alpha > mean) || !alpha.is_finite() {
        return Err(Error::Precondition(format!(
            "threshold {alpha} must exceed the mean of |f| over the box ({mean})"
        )));
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mut cubes = Vec::new();
    split(&grid, &abs, [0; MAX_DIM], grid.points(), alpha, &mut cubes);

    let mut good = f.values().to_vec();
    for c in &cubes {
        let idx = c.flat_indices(&grid);
        let avg = idx.iter().map(|&i| f.values()[i]).sum::<f64>() / idx.len() as f64;
        for i in idx {
            good[i] = avg;
        }
    }
    let good = ScalarField::from_values(grid, good)?;
    let bad = f.sub(&good);
    Ok(CZDecomposition { alpha, cubes, good, bad })
}

fn split(grid: &Grid, abs: &[f64], corner: [usize; MAX_DIM], side: usize, alpha: f64, out: &mut Vec<Cube>) {
    let dim = grid.dim();
    let half = side / 2;
    for child in 0..(1usize << dim) {
        let mut c = corner;
        for a in 0..dim {
            if child >> (dim - 1 - a) & 1 == 1 {
                c[a] += half;
            }
        }
        let mut cube = Cube { corner: c, side: half, average: 0.0 };
        let idx = cube.flat_indices(grid);
        cube.average = idx.iter().map(|&i| abs[i]).sum::<f64>() / idx.len() as f64;
        if cube.average > alpha {
            out.push(cube);
        } else if half > 1 {
            split(grid, abs, c, half, alpha, out);
        }
    }
}

/// Geometric sweep of 40 heights from `max/1000` to `max` of `|R f|`.
pub fn weak11_sweep(f: &ScalarField) -> Vec<f64> {
    let top = crate::singular::riesz_vector(f).max_magnitude();
    (0..40).map(|i| top * 10f64.powf(-3.0 + 3.0 * i as f64 / 39.0)).collect()
}

/// `max_alpha alpha * |{|R f| > alpha}| / ||f||_1` with `R f` the vector of
/// Riesz transforms.
pub fn weak11_constant(f: &ScalarField, alphas: &[f64]) -> Result<f64> {
    let l1 = f.l1_norm();
    if l1 == 0.0 {
        return domain("weak-(1,1) constant is undefined for f = 0");
    }
    let rf = crate::singular::riesz_vector(f).magnitude();
    let mut best: f64 = 0.0;
    for &a in alphas {
        best = best.max(a * distribution_function(&rf, a)? / l1);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(2, 16, 1.0).unwrap()
    }

    #[test]
    fn nothing_above_threshold() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        let d = cz_decompose(&f, 2.0).unwrap();
        assert!(d.cubes.is_empty());
        assert_eq!(d.good, f);
        assert!(d.bad.max_abs() == 0.0);
    }

    #[test]
    fn precondition() {
        let g = grid();
        let f = ScalarField::constant(g, 1.0);
        assert!(matches!(cz_decompose(&f, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn single_spike_stops_at_first_heavy_cube() {
        let g = grid();
        let mut f = ScalarField::zeros(g);
        let spike = g.flat_index([5, 9, 0]);
        f.values_mut()[spike] = 256.0;
        // averages along the chain: 256 / 4^k for side 2^k; alpha = 10 first exceeded at side 4
        let d = cz_decompose(&f, 10.0).unwrap();
        assert_eq!(d.cubes.len(), 1);
        assert_eq!(d.cubes[0].side, 4);
        assert_eq!(d.cubes[0].corner[..2], [4, 8]);
        assert_eq!(d.cubes[0].average, 16.0);
    }

    #[test]
    fn invariants_on_a_rough_field() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x| ((37.0 * x[0] * x[1]).sin() * 9.0).powi(3));
        let mean = f.l1_norm() / g.volume();
        for scale in [1.5, 3.0, 10.0] {
            let alpha = mean * scale;
            let d = cz_decompose(&f, alpha).unwrap();
            let cap = 4.0 * alpha;
            for c in &d.cubes {
                assert!(c.average > alpha && c.average <= cap * (1.0 + 1e-12));
            }
            let covered = d.covered();
            for (i, &v) in f.values().iter().enumerate() {
                if !covered[i] {
                    assert!(v.abs() <= alpha);
                }
            }
            assert!(d.cube_measure() <= f.l1_norm() / alpha);
            assert!(d.good.max_abs() <= cap * (1.0 + 1e-12));
            for m in d.bad_means() {
                assert!(m.abs() <= 1e-12 * f.max_abs());
            }
            let check = d.check(&f).unwrap();
            assert!(check.holds(alpha, f.max_abs(), f.l1_norm(), 1e-12), "{check:?}");
        }
    }

    #[test]
    fn weak11_finite_on_smooth_data() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) * 40.0).exp());
        let c = weak11_constant(&f, &weak11_sweep(&f)).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert!(weak11_constant(&ScalarField::zeros(g), &[1.0]).is_err());
    }
}
