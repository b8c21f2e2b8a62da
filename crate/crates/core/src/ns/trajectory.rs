use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use super::mild::Model;
use crate::error::{domain, Error, Result};
use crate::grid::{divergence, gradient_norm_squared, Grid, VectorField};
use crate::lorentz::{vector_norm, LorentzIndex};

/// Velocity states on a strictly increasing time grid starting at 0.
///
/// Per-time norms are computed on first use and cached; the cache never
/// changes an observable value.
#[derive(Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<VectorField>,
    model: Model,
    energy: OnceLock<Vec<f64>>,
    dissipation: OnceLock<Vec<f64>>,
    weak: Mutex<BTreeMap<u64, Vec<f64>>>,
}

impl Clone for Trajectory {
    fn clone(&self) -> Self {
        Trajectory {
            times: self.times.clone(),
            states: self.states.clone(),
            model: self.model,
            energy: self.energy.clone(),
            dissipation: self.dissipation.clone(),
            weak: Mutex::new(self.weak.lock().expect("cache poisoned").clone()),
        }
    }
}

/// Largest `||div u||_2 / ||grad u||_2` tolerated in a stored state.
const DIVERGENCE_TOL: f64 = 1e-8;

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<VectorField>, model: Model) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::Mismatch(format!("{} times for {} states", times.len(), states.len())));
        }
        if times[0] != 0.0 {
            return domain(format!("trajectories start at t = 0, got {}", times[0]));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("trajectory times must be strictly increasing");
        }
        let grid = *states[0].grid();
        for (i, s) in states.iter().enumerate() {
            grid.ensure_same(s.grid())?;
            let scale = gradient_norm_squared(s).sqrt().max(s.l2_norm());
            let div = divergence(s).l2_norm();
            if div > DIVERGENCE_TOL * scale {
                return Err(Error::Precondition(format!("state {i} has divergence {div:e}")));
            }
        }
        Ok(Trajectory {
            times,
            states,
            model,
            energy: OnceLock::new(),
            dissipation: OnceLock::new(),
            weak: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[VectorField] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &VectorField {
        &self.states[i]
    }

    pub fn initial(&self) -> &VectorField {
        &self.states[0]
    }

    pub fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// `||u(t)||_2^2` per time.
    pub fn energies(&self) -> &[f64] {
        self.energy.get_or_init(|| crate::par::map_slice(&self.states, VectorField::l2_norm_squared))
    }

    /// `||grad u(t)||_2^2` per time.
    pub fn dissipation_rates(&self) -> &[f64] {
        self.dissipation.get_or_init(|| crate::par::map_slice(&self.states, gradient_norm_squared))
    }

    /// `||u(t)||_{L^{p,inf}}` (the `f**` norm of `|u|`) per time; `p = inf`
    /// gives the maximum of `|u|`.
    pub fn weak_norms(&self, p: f64) -> Result<Vec<f64>> {
        let idx = LorentzIndex::weak(p)?;
        let key = p.to_bits();
        if let Some(v) = self.weak.lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let values = crate::par::map_slice(&self.states, |s| {
            if p.is_infinite() {
                Ok(s.max_magnitude())
            } else {
                vector_norm(s, idx)
            }
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        self.weak.lock().expect("cache poisoned").insert(key, values.clone());
        Ok(values)
    }

    /// Every `stride`-th state, always keeping the first.
    pub fn subsample(&self, stride: usize) -> Result<Trajectory> {
        if stride == 0 {
            return domain("subsample stride must be positive");
        }
        let keep: Vec<usize> = (0..self.len()).step_by(stride).collect();
        Trajectory::new(
            keep.iter().map(|&i| self.times[i]).collect(),
            keep.iter().map(|&i| self.states[i].clone()).collect(),
            self.model,
        )
    }

    /// Copy with state `i` replaced. Used for fault-injection checks.
    pub fn with_state(&self, i: usize, state: VectorField) -> Result<Trajectory> {
        let mut states = self.states.clone();
        if i >= states.len() {
            return domain(format!("state index {i} out of range"));
        }
        states[i] = state;
        Trajectory::new(self.times.clone(), states, self.model)
    }

    /// Copy with every state scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(|s| s.scale(factor)).collect(),
            model: self.model,
            energy: OnceLock::new(),
            dissipation: OnceLock::new(),
            weak: Mutex::new(BTreeMap::new()),
        }
    }

    /// Largest `||div u(t)||_2 / ||u(t)||_2` over the run.
    pub fn max_divergence_ratio(&self) -> f64 {
        self.states
            .iter()
            .map(|s| {
                let n = s.l2_norm();
                if n == 0.0 {
                    0.0
                } else {
                    divergence(s).l2_norm() / n
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest drift of the component means from their initial values.
    pub fn mean_drift(&self) -> f64 {
        let m0 = self.states[0].mean();
        self.states
            .iter()
            .map(|s| s.mean().iter().zip(&m0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn ensure_compatible(&self, other: &Trajectory) -> Result<()> {
        self.grid().ensure_same(other.grid())?;
        if self.times.len() != other.times.len()
            || self.times.iter().zip(&other.times).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::Mismatch("trajectories live on different time grids".into()));
        }
        Ok(())
    }
}
