//! Library of initial data. Every kind has a vector form (the initial
//! velocity) and a scalar form (the profile fed to `norms` and `cz`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{Grid, ScalarField, VectorField, MAX_DIM};
use crate::rng;
use crate::singular::leray_project;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disc,
    Box,
}

fn one() -> f64 {
    1.0
}

fn four() -> i64 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `A (sin x cos y, -cos x sin y)` with `x` rescaled by `2 pi / L`; in
    /// 3D each component carries an extra `cos z`.
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Seeded, band-limited, Leray-projected, `||u||_2 = amplitude`.
    RandomSolenoidal {
        #[serde(default = "four")]
        band: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Swirl `e_theta |x|_c^exponent chi(|x| / window)` where
    /// `|x|_c = sqrt(|x|^2 + core^2)` and `chi` is a smoothstep from 1 at
    /// one half to 0 at one. The scalar form is the magnitude.
    RadialPower {
        exponent: f64,
        window: f64,
        #[serde(default)]
        core: Option<f64>,
    },
    /// Indicator of a centred disc (ball) or cube of the given radius
    /// (half side). The vector form is the Leray projection of `1_A e_1`.
    Indicator {
        #[serde(default = "default_shape")]
        shape: Shape,
        radius: f64,
    },
    /// `height` on the cell nearest `position`, zero elsewhere. Vector form
    /// as for `Indicator`.
    Spike { position: Vec<f64>, height: f64 },
}

fn default_shape() -> Shape {
    Shape::Disc
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::TaylorGreen { amplitude: 1.0 }
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn radius(x: &[f64; MAX_DIM], n: usize) -> f64 {
    x[..n].iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::TaylorGreen { .. } => "taylor_green",
            InitialData::RandomSolenoidal { .. } => "random_solenoidal",
            InitialData::RadialPower { .. } => "radial_power",
            InitialData::Indicator { .. } => "indicator",
            InitialData::Spike { .. } => "spike",
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let half = grid.length() / 2.0;
        let finite = |v: f64, what: &str| if v.is_finite() { Ok(()) } else { domain(format!("{what} must be finite")) };
        match self {
            InitialData::TaylorGreen { amplitude } => finite(*amplitude, "amplitude"),
            InitialData::RandomSolenoidal { band, amplitude } => {
                finite(*amplitude, "amplitude")?;
                let max = grid.points() as i64 / 2 - 1;
                if *band < 1 || *band > max {
                    return domain(format!("band must lie in [1, {max}], got {band}"));
                }
                Ok(())
            }
            InitialData::RadialPower { exponent, window, core } => {
                finite(*exponent, "exponent")?;
                if !(*window > 0.0 && *window <= half) {
                    return domain(format!("window must lie in (0, L/2 = {half}], got {window}"));
                }
                if let Some(c) = core {
                    if !(*c > 0.0 && c.is_finite()) {
                        return domain(format!("core must be positive, got {c}"));
                    }
                }
                Ok(())
            }
            InitialData::Indicator { radius, .. } => {
                if !(*radius > 0.0 && *radius < half) {
                    return domain(format!("radius must lie in (0, L/2 = {half}), got {radius}"));
                }
                Ok(())
            }
            InitialData::Spike { position, height } => {
                finite(*height, "height")?;
                if position.len() != grid.dim() {
                    return domain(format!("position needs {} coordinates, got {}", grid.dim(), position.len()));
                }
                if position.iter().any(|x| !(*x >= -half && *x < half)) {
                    return domain(format!("position must lie in [-L/2, L/2)^n = [{}, {half})^n", -half));
                }
                Ok(())
            }
        }
    }

    fn radial_core(&self, grid: &Grid) -> f64 {
        match self {
            InitialData::RadialPower { core, .. } => core.unwrap_or(grid.spacing()),
            _ => 0.0,
        }
    }

    /// Scalar profile of the data.
    pub fn scalar(&self, grid: Grid, seed: u64) -> Result<ScalarField> {
        self.validate(&grid)?;
        let n = grid.dim();
        Ok(match self {
            InitialData::TaylorGreen { .. } | InitialData::RandomSolenoidal { .. } => {
                self.vector(grid, seed)?.component(0).clone()
            }
            InitialData::RadialPower { exponent, window, .. } => {
                let c = self.radial_core(&grid);
                let (e, w) = (*exponent, *window);
                ScalarField::from_fn(grid, move |x| {
                    let r = radius(&x, n);
                    (r * r + c * c).sqrt().powf(e) * (1.0 - smoothstep(2.0 * r / w - 1.0))
                })
            }
            InitialData::Indicator { shape, radius: rad } => {
                let (shape, rad) = (*shape, *rad);
                ScalarField::from_fn(grid, move |x| {
                    let inside = match shape {
                        Shape::Disc => radius(&x, n) < rad,
                        Shape::Box => x[..n].iter().all(|v| v.abs() < rad),
                    };
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })
            }
            InitialData::Spike { position, height } => {
                let mut idx = [0usize; MAX_DIM];
                for (a, &p) in position.iter().enumerate() {
                    let i = ((p + grid.length() / 2.0) / grid.spacing()).round() as usize;
                    idx[a] = i % grid.points();
                }
                let mut f = ScalarField::zeros(grid);
                f.values_mut()[grid.flat_index(idx)] = *height;
                f
            }
        })
    }

    /// Divergence-free initial velocity.
    pub fn vector(&self, grid: Grid, seed: u64) -> Result<VectorField> {
        self.validate(&grid)?;
        let n = grid.dim();
        let k = 2.0 * PI / grid.length();
        Ok(match self {
            InitialData::TaylorGreen { amplitude } => {
                let a = *amplitude;
                VectorField::from_fn(grid, move |x| {
                    let z = if n == 3 { (k * x[2]).cos() } else { 1.0 };
                    [a * (k * x[0]).sin() * (k * x[1]).cos() * z, -a * (k * x[0]).cos() * (k * x[1]).sin() * z, 0.0]
                })
            }
            InitialData::RandomSolenoidal { band, amplitude } => {
                let mut r = rng::seeded(seed);
                rng::random_solenoidal(grid, *band, *amplitude, &mut r)
            }
            InitialData::RadialPower { .. } => {
                let profile = self.scalar(grid, seed)?;
                let swirl = VectorField::from_fn(grid, move |x| {
                    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                    if r == 0.0 {
                        [0.0; MAX_DIM]
                    } else {
                        [-x[1] / r, x[0] / r, 0.0]
                    }
                });
                leray_project(&swirl.map_components(|c| c.mul(&profile)))
            }
            InitialData::Indicator { .. } | InitialData::Spike { .. } => {
                let s = self.scalar(grid, seed)?;
                let comps = (0..n).map(|a| if a == 0 { s.clone() } else { ScalarField::zeros(grid) }).collect();
                leray_project(&VectorField::from_components(comps)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::divergence;
    use crate::lorentz::{quasinorm, LorentzIndex};

    fn g(points: usize) -> Grid {
        Grid::new(2, points, 2.0 * PI).unwrap()
    }

    #[test]
    fn taylor_green_is_the_closed_form() {
        let u = InitialData::default().vector(g(32), 0).unwrap();
        let want = VectorField::from_fn(g(32), |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
        assert_eq!(u.sub(&want).max_magnitude(), 0.0);
    }

    #[test]
    fn every_vector_form_is_solenoidal() {
        let kinds = [
            InitialData::default(),
            InitialData::RandomSolenoidal { band: 4, amplitude: 2.0 },
            InitialData::RadialPower { exponent: -0.5, window: 2.0, core: None },
            InitialData::Indicator { shape: Shape::Box, radius: 1.0 },
            InitialData::Spike { position: vec![0.3, -1.0], height: 5.0 },
        ];
        for kind in kinds {
            let u = kind.vector(g(32), 7).unwrap();
            let div = divergence(&u).l2_norm();
            assert!(div <= 1e-10 * u.l2_norm().max(1.0), "{}: {div}", kind.name());
        }
        let u = InitialData::RandomSolenoidal { band: 4, amplitude: 2.0 }.vector(g(32), 7).unwrap();
        assert!((u.l2_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn seeds_fix_random_data() {
        let kind = InitialData::RandomSolenoidal { band: 3, amplitude: 1.0 };
        assert_eq!(kind.vector(g(16), 5).unwrap(), kind.vector(g(16), 5).unwrap());
        assert_ne!(kind.vector(g(16), 5).unwrap(), kind.vector(g(16), 6).unwrap());
    }

    #[test]
    fn radial_power_weak_quasinorm() {
        // |x|^{-n/p} has distribution function omega_n y^{-p}, so its weak
        // quasinorm is omega_n^{1/p} with omega_2 = pi
        let p = 4.0;
        let grid = Grid::new(2, 256, 2.0 * PI).unwrap();
        let f = InitialData::RadialPower { exponent: -2.0 / p, window: PI, core: None }.scalar(grid, 0).unwrap();
        let q = quasinorm(&f, LorentzIndex::weak(p).unwrap());
        let want = PI.powf(1.0 / p);
        assert!((q / want - 1.0).abs() < 0.05, "{q} vs {want}");
    }

    #[test]
    fn incompatible_specs_are_rejected() {
        let grid = g(32);
        assert!(InitialData::RadialPower { exponent: -1.0, window: 4.0, core: None }.validate(&grid).is_err());
        assert!(InitialData::Spike { position: vec![0.0], height: 1.0 }.validate(&grid).is_err());
        assert!(InitialData::Indicator { shape: Shape::Disc, radius: 3.5 }.validate(&grid).is_err());
        assert!(InitialData::RandomSolenoidal { band: 16, amplitude: 1.0 }.validate(&grid).is_err());
    }

    #[test]
    fn indicator_and_spike_profiles() {
        // grid points sit at multiples of pi/16, so |x_a| < pi/2 keeps 15 per axis
        let f = InitialData::Indicator { shape: Shape::Box, radius: PI / 2.0 }.scalar(g(32), 0).unwrap();
        assert_eq!(f.sum(), 225.0);
        let s = InitialData::Spike { position: vec![0.0, 0.0], height: 3.0 }.scalar(g(32), 0).unwrap();
        assert_eq!(s.sum(), 3.0);
        assert_eq!(s.max_abs(), 3.0);
    }
}
