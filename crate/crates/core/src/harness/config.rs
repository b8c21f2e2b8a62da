use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::ns::{Model, SolverConfig};

use super::initial::InitialData;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 2, points: 64, length: 2.0 * PI }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    NavierStokes,
    Heat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub model: ModelName,
    pub dealias: bool,
    pub picard_tol: f64,
    pub picard_max: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: 1e-3,
            horizon: 1.0,
            model: ModelName::NavierStokes,
            dealias: true,
            picard_tol: 1e-12,
            picard_max: 50,
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        let model = match self.model {
            ModelName::Heat => Model::Heat,
            ModelName::NavierStokes => Model::NavierStokes { dealias: self.dealias },
        };
        let mut cfg = SolverConfig::new(self.dt, self.horizon).with_model(model);
        cfg.picard_tol = self.picard_tol;
        cfg.picard_max = self.picard_max;
        cfg
    }
}

fn default_perturbation() -> f64 {
    1e-3
}

fn default_band() -> i64 {
    2
}

fn default_riesz_band() -> i64 {
    2
}

/// One entry of the `[[diagnostics]]` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diagnostic {
    Energy,
    CrossEnergy,
    ProdiSerrin {
        p: f64,
    },
    WeakStrong {
        p: f64,
        #[serde(rename = "C", default)]
        constant: Option<f64>,
        #[serde(default = "default_perturbation")]
        perturbation: f64,
        #[serde(default = "default_band")]
        band: i64,
        /// Use the most amplified band-limited direction instead of a
        /// random one.
        #[serde(default)]
        amplified: bool,
    },
    Residuals,
    Norms {
        p: Vec<f64>,
        q: Vec<f64>,
    },
    Riesz {
        #[serde(default = "default_riesz_band")]
        band: i64,
    },
    Cz {
        #[serde(default)]
        alpha: Vec<f64>,
    },
    Hardy {
        p: Vec<f64>,
        q: Vec<f64>,
    },
}

impl Diagnostic {
    pub fn name(&self) -> &'static str {
        match self {
            Diagnostic::Energy => "energy",
            Diagnostic::CrossEnergy => "cross_energy",
            Diagnostic::ProdiSerrin { .. } => "prodi_serrin",
            Diagnostic::WeakStrong { .. } => "weak_strong",
            Diagnostic::Residuals => "residuals",
            Diagnostic::Norms { .. } => "norms",
            Diagnostic::Riesz { .. } => "riesz",
            Diagnostic::Cz { .. } => "cz",
            Diagnostic::Hardy { .. } => "hardy",
        }
    }

    /// Whether the diagnostic needs a solved trajectory.
    pub fn uses_trajectory(&self) -> bool {
        matches!(
            self,
            Diagnostic::Energy
                | Diagnostic::CrossEnergy
                | Diagnostic::ProdiSerrin { .. }
                | Diagnostic::WeakStrong { .. }
                | Diagnostic::Residuals
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write the solved trajectory as `trajectory.lnst`.
    pub trajectory: bool,
    /// Write initial and final states as `.lnsf` fields.
    pub snapshots: bool,
    /// Exponents `p` of the `L^{p,inf}` columns in `trajectory.csv`.
    pub weak_norms: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), trajectory: false, snapshots: false, weak_norms: vec![4.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_name() -> String {
    "experiment".into()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: default_name(),
            seed: 0,
            grid: GridSection::default(),
            solver: SolverSection::default(),
            initial: InitialData::default(),
            diagnostics: Vec::new(),
            output: OutputSection::default(),
        }
    }
}

/// 1-based line of a byte offset.
fn line_at(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of `key = ...` inside `[section]` (or at top level for `""`), if any.
fn line_of(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_start_matches('[').trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn invalid(source: &str, section: &str, key: &str, message: String) -> Error {
    Error::Config { line: line_of(source, section, key), message }
}

impl ExperimentConfig {
    /// Parse and validate a TOML document.
    pub fn parse(source: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(source).map_err(|e| Error::Config {
            line: e.span().map(|s| line_at(source, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate_against(source)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let source = std::fs::read_to_string(path)?;
        Self::parse(&source)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.points, self.grid.length)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_against("")
    }

    /// Check every parameter before any computation. `source` only serves
    /// to attach line numbers to the messages.
    fn validate_against(&self, source: &str) -> Result<()> {
        let grid = self.grid().map_err(|e| invalid(source, "grid", "", e.to_string()))?;
        let n = grid.dim();
        self.solver.solver_config().validate().map_err(|e| invalid(source, "solver", "dt", e.to_string()))?;
        self.initial.validate(&grid).map_err(|e| invalid(source, "initial", "kind", e.to_string()))?;
        for &p in &self.output.weak_norms {
            if !(p > 1.0) {
                return Err(invalid(
                    source,
                    "output",
                    "weak_norms",
                    format!("weak-norm exponent must exceed 1, got {p}"),
                ));
            }
        }
        for d in &self.diagnostics {
            let bad = |msg: String| Err(invalid(source, "diagnostics", "kind", format!("{}: {msg}", d.name())));
            match d {
                Diagnostic::ProdiSerrin { p } | Diagnostic::WeakStrong { p, .. } if !(*p > n as f64) => {
                    return bad(format!("the Prodi-Serrin exponent needs p > n = {n}, got {p}"));
                }
                Diagnostic::WeakStrong { constant: Some(c), .. } if !(*c >= 0.0 && c.is_finite()) => {
                    return bad(format!("C must be finite and non-negative, got {c}"));
                }
                Diagnostic::WeakStrong { perturbation, band, .. } if !(*perturbation > 0.0) || *band < 1 => {
                    return bad("perturbation must be positive and band at least 1".into());
                }
                Diagnostic::Norms { p, q } => {
                    if p.is_empty() || q.is_empty() {
                        return bad("p and q lists must be non-empty".into());
                    }
                    for &pi in p {
                        for &qi in q {
                            crate::lorentz::LorentzIndex::new(pi, qi)
                                .map_err(|e| invalid(source, "diagnostics", "p", e.to_string()))?;
                        }
                    }
                }
                Diagnostic::Riesz { band } if *band < 1 => return bad(format!("band must be at least 1, got {band}")),
                Diagnostic::Cz { alpha } if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) => {
                    return bad("thresholds must be positive and finite".into());
                }
                Diagnostic::Hardy { p, q }
                    if p.iter().any(|v| !(*v > 0.0 && v.is_finite()))
                        || q.iter().any(|v| !(*v >= 1.0 && v.is_finite())) =>
                {
                    return bad("Hardy needs 0 < p < inf and 1 <= q < inf".into());
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Annotated example configuration printed by `print-schema`.
pub const SCHEMA: &str = r#"# lorentz-ns experiment configuration (TOML). Every key is optional
# unless marked required; the values shown are the defaults.

name = "experiment"            # used in summary.json
seed = 0                        # u64, fixes every random field (ChaCha8)

[grid]
n = 2                           # dimension, 2 or 3
N = 64                          # points per axis, even, >= 8
L = 6.283185307179586           # side of the box [-L/2, L/2)^n

[solver]
dt = 1e-3                       # time step
T = 1.0                         # horizon, an integer multiple of dt
model = "navier_stokes"         # or "heat"
dealias = true                  # 2/3 rule on the nonlinear term
picard_tol = 1e-12              # relative fixed-point tolerance per step
picard_max = 50                 # iteration cap per step

[initial]                       # one of the following kinds
kind = "taylor_green"           # amplitude = 1.0
# kind = "random_solenoidal"    # band = 4, amplitude = 1.0 (L2 norm)
# kind = "radial_power"         # exponent (required), window (required), core = grid spacing
# kind = "indicator"            # shape = "disc" | "box", radius (required)
# kind = "spike"                # position = [x, y(, z)] (required), height (required)

[output]
dir = "out"                     # overridden by --out
trajectory = false              # write trajectory.lnst
snapshots = false               # write initial.lnsf and final.lnsf
weak_norms = [4.0]              # L^{p,inf} columns of trajectory.csv

# Diagnostics run by `solve` (trajectory based) or by the matching
# subcommand. Repeat the table for several entries.
# [[diagnostics]]
# kind = "energy"
# kind = "cross_energy"
# kind = "prodi_serrin"         # p (required, p > n; inf allowed)
# kind = "weak_strong"          # p (required), C (optional), perturbation = 1e-3, band = 2,
#                               # amplified = false (true: fastest-growing direction)
# kind = "residuals"
# kind = "norms"                # p = [...], q = [...] (required)
# kind = "riesz"                # band = 2
# kind = "cz"                   # alpha = [...] (empty: geometric sweep)
# kind = "hardy"                # p = [...], q = [...] (required)
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn schema_example_parses() {
        let cfg = ExperimentConfig::parse(SCHEMA).unwrap();
        assert_eq!(cfg.grid.points, 64);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = ExperimentConfig::parse("name = \"x\"\n[grid]\nn = 2\nN = = 4\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(4), .. }), "{err}");
        let err = ExperimentConfig::parse("[grid]\nn = 2\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn validation_happens_before_compute() {
        let src = "[grid]\nn = 2\nN = 32\nL = 6.0\n\n[[diagnostics]]\nkind = \"prodi_serrin\"\np = 2.0\n";
        let err = ExperimentConfig::parse(src).unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(7), .. }), "{err}");
        assert!(ExperimentConfig::parse("[solver]\ndt = 0.3\nT = 1.0\n").is_err());
        assert!(ExperimentConfig::parse("[grid]\nn = 2\nN = 12\nL = 1.0\n").is_err());
        let ok = "[[diagnostics]]\nkind = \"weak_strong\"\np = inf\n";
        assert!(ExperimentConfig::parse(ok).is_ok());
    }
}
