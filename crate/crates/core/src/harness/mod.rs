//! Experiment runner behind the `lorentz-ns` binary.
//!
//! A run takes a validated [`ExperimentConfig`], computes one or more
//! sections (tables plus named invariants), writes every table as CSV into
//! the output directory and finishes with `summary.json`. Nothing in the
//! outputs depends on timing or thread count, so two runs with the same
//! config and seed produce identical files.

mod config;
mod initial;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{Diagnostic, ExperimentConfig, GridSection, ModelName, OutputSection, SolverSection, SCHEMA};
pub use initial::{InitialData, Shape};

use crate::diagnostics::{
    amplified_perturbation, cross_energy_defect, empirical_gronwall_constant, energy_inequality_check, energy_report,
    gronwall_bound, prodi_serrin_norm,
};
use crate::error::{Error, Result};
use crate::grid::{inner_product, ScalarField, VectorField};
use crate::io::{self, fmt_f64, Table};
use crate::lorentz::{self, hardy_check, hardy_family, LorentzIndex};
use crate::ns::{general_battery, residuals, solenoidal_battery, solve_mild, Formulation, Trajectory};
use crate::singular::{cz_decompose, riesz, riesz_pair, truncated_riesz, weak11_constant, weak11_sweep};

/// A checked property: `value` compared with `threshold` by `relation`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Invariant {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Invariant { name: name.into(), value, relation: "<=", threshold, passed: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Invariant { name: name.into(), value, relation: ">=", threshold, passed: value >= threshold }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Invariant { name: name.into(), value, relation: "<", threshold, passed: value < threshold }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub name: String,
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub invariants: Vec<Invariant>,
    /// Measured constants (empirical Gronwall and weak-(1,1) constants,
    /// accumulator end values and similar).
    pub constants: BTreeMap<String, f64>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &Invariant> {
        self.invariants.iter().filter(|i| !i.passed)
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    Norms { field: Option<PathBuf> },
    RieszCheck,
    Cz { field: Option<PathBuf> },
    Hardy,
    Solve,
    Energy,
    WeakStrong { u: Option<PathBuf>, v: Option<PathBuf> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norms { .. } => "norms",
            Command::RieszCheck => "riesz-check",
            Command::Cz { .. } => "cz",
            Command::Hardy => "hardy",
            Command::Solve => "solve",
            Command::Energy => "energy",
            Command::WeakStrong { .. } => "weak-strong",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.dir` when set.
    pub out: Option<PathBuf>,
    /// Overrides the config seed when set.
    pub seed: Option<u64>,
    /// Run independent diagnostics concurrently.
    pub parallel: bool,
}

/// Output of one diagnostic.
#[derive(Default)]
struct Section {
    tables: Vec<(String, Table)>,
    invariants: Vec<Invariant>,
    constants: Vec<(String, f64)>,
}

impl Section {
    fn table(&mut self, name: &str, t: Table) {
        self.tables.push((format!("{name}.csv"), t));
    }
}

fn label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn push_row(t: &mut Table, cells: impl IntoIterator<Item = String>) -> Result<()> {
    t.push(cells.into_iter().collect())
}

pub const DEFAULT_P: [f64; 4] = [1.5, 2.0, 3.0, 7.0];
pub const DEFAULT_Q: [f64; 4] = [1.0, 2.0, 4.0, f64::INFINITY];

/// Norm table and sandwich margins of a scalar field.
fn norms_section(f: &ScalarField, ps: &[f64], qs: &[f64]) -> Result<Section> {
    let mut s = Section::default();
    let mut t = Table::new(&["p", "q", "quasinorm", "norm", "pprime_quasinorm", "lower_margin", "upper_margin"]);
    let r = lorentz::rearrangement(f);
    let (mut lower, mut upper, mut monotone) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut qs = qs.to_vec();
    qs.sort_by(f64::total_cmp);
    for &p in ps {
        let mut prev: Option<f64> = None;
        for &q in &qs {
            let idx = LorentzIndex::new(p, q)?;
            let star = r.quasinorm(idx);
            let full = r.norm(idx)?;
            let bound = idx.conjugate_p() * star;
            let scale = if star > 0.0 { star } else { 1.0 };
            let (lo, up) = ((full - star) / scale, (bound - full) / scale);
            lower = lower.min(lo);
            upper = upper.min(up);
            if let Some(prev) = prev {
                monotone = monotone.max(star - prev);
            }
            prev = Some(star);
            push_row(
                &mut t,
                [label(p), label(q), fmt_f64(star), fmt_f64(full), fmt_f64(bound), fmt_f64(lo), fmt_f64(up)],
            )?;
        }
    }
    s.table("norms", t);
    s.invariants.push(Invariant::at_least("lorentz_sandwich_lower", lower, -1e-10));
    s.invariants.push(Invariant::at_least("lorentz_sandwich_upper", upper, -1e-10));
    if monotone.is_finite() {
        s.invariants.push(Invariant::at_most("lorentz_quasinorm_nonincreasing_in_q", monotone, 0.0));
    }
    Ok(s)
}

/// Truncation radii `L/4, L/8, L/16, L/32`.
pub fn riesz_radii(length: f64) -> [f64; 4] {
    [length / 4.0, length / 8.0, length / 16.0, length / 32.0]
}

fn riesz_section(cfg: &ExperimentConfig, band: i64, seed: u64) -> Result<Section> {
    let grid = cfg.grid()?;
    let n = grid.dim();
    let mut rng = crate::rng::seeded(seed);
    let f = crate::rng::band_limited(grid, band, &mut rng);
    let g = crate::rng::band_limited(grid, band, &mut rng);
    let mut s = Section::default();

    let mut sum = f.clone();
    for j in 0..n {
        sum = sum.add(&riesz_pair(&f, j, j));
    }
    s.invariants.push(Invariant::at_most("riesz_square_sum_identity", sum.l2_norm() / f.l2_norm(), 1e-10));

    let mut skew: f64 = 0.0;
    for i in 0..n {
        let d = inner_product(&riesz(&f, i), &g)? + inner_product(&f, &riesz(&g, i))?;
        skew = skew.max(d.abs() / (f.l2_norm() * g.l2_norm()));
    }
    s.invariants.push(Invariant::at_most("riesz_skew_adjoint", skew, 1e-10));

    let exact = riesz(&f, 0);
    let mut t = Table::new(&["eps", "relative_error"]);
    let mut errors = Vec::new();
    for eps in riesz_radii(grid.length()) {
        let e = truncated_riesz(&f, eps, 0)?.sub(&exact).l2_norm() / exact.l2_norm();
        t.push_numbers(&[eps, e])?;
        errors.push(e);
    }
    let worst = errors.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    s.invariants.push(Invariant::below("riesz_truncation_error_ratio", worst, 1.0));
    s.table("riesz", t);
    Ok(s)
}

/// Eight heights from twice the mean of `|f|` up to its maximum.
fn default_cz_heights(f: &ScalarField) -> Vec<f64> {
    let mean = f.l1_norm() / f.grid().volume();
    let top = f.max_abs();
    let lo = (2.0 * mean).min(top);
    (0..8).map(|i| lo * (top / lo).powf(i as f64 / 7.0)).collect()
}

fn cz_section(f: &ScalarField, alphas: &[f64]) -> Result<Section> {
    let alphas = if alphas.is_empty() { default_cz_heights(f) } else { alphas.to_vec() };
    let (f_max, f_l1) = (f.max_abs(), f.l1_norm());
    let mut s = Section::default();
    let mut t = Table::new(&[
        "alpha",
        "cubes",
        "cube_measure",
        "l1_over_alpha",
        "off_cubes",
        "average_lower",
        "average_upper",
        "total_measure",
        "reconstruction",
        "bad_mean",
        "ok",
    ]);
    let mut failures = 0usize;
    for &alpha in &alphas {
        let d = cz_decompose(f, alpha)?;
        let c = d.check(f)?;
        let ok = c.holds(alpha, f_max, f_l1, 1e-12);
        failures += usize::from(!ok);
        push_row(
            &mut t,
            [alpha, d.cubes.len() as f64, d.cube_measure(), f_l1 / alpha]
                .into_iter()
                .chain([c.off_cubes, c.average_lower, c.average_upper, c.total_measure, c.reconstruction, c.bad_mean])
                .map(fmt_f64)
                .chain([u8::from(ok).to_string()]),
        )?;
    }
    s.table("cz", t);
    s.invariants.push(Invariant::at_most("cz_property_failures", failures as f64, 0.0));
    if f_l1 > 0.0 {
        s.constants.push(("weak11_constant".into(), weak11_constant(f, &weak11_sweep(f))?));
    }
    Ok(s)
}

fn hardy_section(ps: &[f64], qs: &[f64]) -> Result<Section> {
    let mut s = Section::default();
    let mut t = Table::new(&[
        "phi",
        "p",
        "q",
        "lhs_lower",
        "rhs_lower",
        "lhs_upper",
        "rhs_upper",
        "relative_defect_lower",
        "relative_defect_upper",
    ]);
    let mut worst = f64::INFINITY;
    for (name, phi) in hardy_family() {
        for &p in ps {
            for &q in qs {
                let r = hardy_check(&phi, p, q)?;
                let (a, b) = r.relative_defects(p);
                worst = worst.min(a).min(b);
                push_row(
                    &mut t,
                    [name.to_string(), label(p), label(q)]
                        .into_iter()
                        .chain([r.lhs_lower, r.rhs_lower, r.lhs_upper, r.rhs_upper, a, b].map(fmt_f64)),
                )?;
            }
        }
    }
    s.table("hardy", t);
    s.invariants.push(Invariant::at_least("hardy_relative_defect", worst, -1e-10));
    Ok(s)
}

fn energy_section(traj: &Trajectory) -> Result<Section> {
    let report = energy_report(traj);
    let inequality = energy_inequality_check(traj);
    let mut t = Table::new(&["t", "energy", "dissipation", "defect", "inequality_ok"]);
    for i in 0..report.times.len() {
        push_row(
            &mut t,
            [report.times[i], report.energy[i], report.dissipation[i], report.defect[i]]
                .map(fmt_f64)
                .into_iter()
                .chain([u8::from(inequality.holds[i]).to_string()]),
        )?;
    }
    let e0 = report.initial_energy();
    let min_defect = inequality.defect.iter().fold(f64::INFINITY, |m, d| m.min(*d));
    let mut s = Section::default();
    s.table("energy", t);
    s.invariants.push(Invariant::at_most("energy_equality_defect", report.max_relative_defect(), 1e-6));
    s.invariants.push(Invariant::at_least("energy_inequality_margin", min_defect, -inequality.tolerance));
    s.constants.push(("initial_energy".into(), e0));
    Ok(s)
}

fn cross_energy_section(traj: &Trajectory) -> Result<Section> {
    let cross = cross_energy_defect(traj, traj)?;
    let energy = energy_report(traj);
    let mut t = Table::new(&["t", "pairing", "defect", "scale"]);
    let (mut worst, mut mismatch) = (0.0f64, 0.0f64);
    let e0 = energy.initial_energy().max(f64::MIN_POSITIVE);
    for i in 0..cross.times.len() {
        t.push_numbers(&[cross.times[i], cross.pairing[i], cross.defect[i], cross.scale[i]])?;
        if cross.scale[i] > 0.0 {
            worst = worst.max(cross.defect[i].abs() / cross.scale[i]);
        }
        mismatch = mismatch.max((cross.defect[i] - energy.defect[i]).abs() / e0);
    }
    let mut s = Section::default();
    s.table("cross_energy", t);
    s.invariants.push(Invariant::at_most("cross_energy_defect", worst, 1e-6));
    s.invariants.push(Invariant::at_most("cross_energy_matches_energy", mismatch, 1e-10));
    Ok(s)
}

/// Whether the run is the 2D Taylor-Green vortex on the `2 pi` box, where
/// `||u(t)||_inf = A e^{-2t}` is known in closed form.
fn taylor_green_amplitude(cfg: &ExperimentConfig) -> Option<f64> {
    match cfg.initial {
        InitialData::TaylorGreen { amplitude }
            if cfg.grid.n == 2
                && (cfg.grid.length - 2.0 * PI).abs() < 1e-12
                && cfg.solver.model == ModelName::NavierStokes =>
        {
            Some(amplitude)
        }
        _ => None,
    }
}

fn prodi_serrin_section(cfg: &ExperimentConfig, traj: &Trajectory, p: f64) -> Result<Section> {
    let acc = prodi_serrin_norm(traj, p)?;
    let norms = traj.weak_norms(p)?;
    let mut t = Table::new(&["t", "weak_norm", "accumulator"]);
    for i in 0..acc.len() {
        t.push_numbers(&[traj.times()[i], norms[i], acc[i]])?;
    }
    let min_step = acc.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::min);
    let tag = label(p);
    let mut s = Section::default();
    s.table(&format!("prodi_serrin_p{tag}"), t);
    s.invariants.push(Invariant::at_least(format!("prodi_serrin_p{tag}_nondecreasing"), min_step, 0.0));
    s.constants.push((format!("prodi_serrin_p{tag}_final"), *acc.last().expect("non-empty")));
    if let (Some(a), true) = (taylor_green_amplitude(cfg), p.is_infinite()) {
        let mut worst: f64 = 0.0;
        for (t, v) in traj.times().iter().zip(&acc).skip(1) {
            let want = a * a * (1.0 - (-4.0 * t).exp()) / 4.0;
            worst = worst.max((v - want).abs() / want);
        }
        s.invariants.push(Invariant::at_most("prodi_serrin_taylor_green_closed_form", worst, 0.01));
    }
    Ok(s)
}

/// How the comparison solution of a weak-strong run is perturbed.
#[derive(Clone, Copy, Debug)]
struct Perturbation {
    size: f64,
    band: i64,
    amplified: bool,
}

/// Solution from `f + delta` with `delta` solenoidal of norm `size`: random
/// from stream 1 of the run seed, or the most amplified direction.
fn perturbed_solution(cfg: &ExperimentConfig, f: &VectorField, seed: u64, how: Perturbation) -> Result<Trajectory> {
    let delta = if how.amplified {
        amplified_perturbation(f, how.band, how.size, seed)?.0
    } else {
        let mut rng = crate::rng::seeded_stream(seed, 1);
        crate::rng::random_solenoidal(*f.grid(), how.band, how.size, &mut rng)
    };
    solve_mild(&f.add(&delta), &cfg.solver.solver_config())
}

fn weak_strong_section(u: &Trajectory, v: &Trajectory, p: f64, constant: Option<f64>) -> Result<Section> {
    let gap0 = u.state(0).sub(v.state(0)).l2_norm_squared();
    let empirical = if gap0 > 0.0 { Some(empirical_gronwall_constant(u, v, p)?) } else { None };
    let c = constant.or(empirical).unwrap_or(0.0);
    let report = gronwall_bound(u, v, p, c)?;
    let mut t = Table::new(&["t", "gap", "accumulator", "bound", "ok"]);
    for i in 0..report.times.len() {
        push_row(
            &mut t,
            [report.times[i], report.gap[i], report.accumulator[i], report.bound[i]]
                .map(fmt_f64)
                .into_iter()
                .chain([u8::from(report.holds[i]).to_string()]),
        )?;
    }
    let failures = report.holds.iter().filter(|h| !**h).count();
    let tag = label(p);
    let mut s = Section::default();
    s.table(&format!("weak_strong_p{tag}"), t);
    s.invariants.push(Invariant::at_most(format!("gronwall_bound_p{tag}_failures"), failures as f64, 0.0));
    s.constants.push((format!("gronwall_constant_p{tag}"), c));
    if let Some(e) = empirical {
        s.constants.push((format!("gronwall_empirical_constant_p{tag}"), e));
    }
    s.constants.push((format!("weak_strong_p{tag}_max_gap"), report.max_gap()));
    Ok(s)
}

fn residuals_section(traj: &Trajectory) -> Result<Section> {
    let grid = *traj.grid();
    let horizon = traj.horizon();
    let mut t = Table::new(&["formulation", "test", "defect", "scale", "relative"]);
    let mut s = Section::default();
    for (form, name, tests) in [
        (Formulation::Weak, "weak", general_battery(&grid, horizon)),
        (Formulation::Projected, "projected", solenoidal_battery(&grid, horizon)),
        (Formulation::VeryWeak, "very_weak", solenoidal_battery(&grid, horizon)),
    ] {
        let rs = residuals(traj, None, &tests, form)?;
        let mut worst: f64 = 0.0;
        for (k, r) in rs.iter().enumerate() {
            push_row(
                &mut t,
                [name.to_string(), k.to_string(), fmt_f64(r.defect), fmt_f64(r.scale), fmt_f64(r.relative())],
            )?;
            worst = worst.max(r.relative());
        }
        s.invariants.push(Invariant::at_most(format!("{name}_residual"), worst, 1e-6));
    }
    s.table("residuals", t);
    Ok(s)
}

fn trajectory_table(traj: &Trajectory, weak_ps: &[f64]) -> Result<Table> {
    let mut header = vec!["t".to_string(), "energy".into(), "enstrophy".into()];
    header.extend(weak_ps.iter().map(|p| format!("weak_norm_p{}", label(*p))));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    let weak = weak_ps.iter().map(|&p| traj.weak_norms(p)).collect::<Result<Vec<_>>>()?;
    for i in 0..traj.len() {
        let mut row = vec![traj.times()[i], traj.energies()[i], traj.dissipation_rates()[i]];
        row.extend(weak.iter().map(|w| w[i]));
        t.push_numbers(&row)?;
    }
    Ok(t)
}

/// Run `jobs` in order, or concurrently with `parallel`; results keep the
/// job order either way.
fn run_jobs<J: Sync>(
    jobs: &[J],
    parallel: bool,
    f: impl Fn(&J) -> Result<Section> + Sync + Send,
) -> Result<Vec<Section>> {
    let out = if parallel { crate::par::map_slice(jobs, f) } else { jobs.iter().map(f).collect() };
    out.into_iter().collect()
}

fn scalar_input(cfg: &ExperimentConfig, seed: u64, field: &Option<PathBuf>) -> Result<ScalarField> {
    match field {
        Some(path) => {
            let comps = io::read_field(path)?;
            Ok(if comps.len() == 1 {
                comps.into_iter().next().expect("one component")
            } else {
                VectorField::from_components(comps)?.magnitude()
            })
        }
        None => cfg.initial.scalar(cfg.grid()?, seed),
    }
}

fn find<T>(cfg: &ExperimentConfig, f: impl Fn(&Diagnostic) -> Option<T>) -> Option<T> {
    cfg.diagnostics.iter().find_map(f)
}

/// Solve the configured problem and write the trajectory outputs.
fn solve_section(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<(Trajectory, Section, Vec<String>)> {
    let grid = cfg.grid()?;
    let f = cfg.initial.vector(grid, seed)?;
    let traj = solve_mild(&f, &cfg.solver.solver_config())?;
    let mut s = Section::default();
    s.table("trajectory", trajectory_table(&traj, &cfg.output.weak_norms)?);
    s.invariants.push(Invariant::at_most("solution_divergence", traj.max_divergence_ratio(), 1e-10));
    let mut files = Vec::new();
    if cfg.output.trajectory {
        io::write_trajectory(&out.join("trajectory.lnst"), &traj)?;
        files.push("trajectory.lnst".to_string());
    }
    if cfg.output.snapshots {
        io::write_vector_field(&out.join("initial.lnsf"), traj.initial())?;
        io::write_vector_field(&out.join("final.lnsf"), traj.state(traj.len() - 1))?;
        files.extend(["initial.lnsf".to_string(), "final.lnsf".to_string()]);
    }
    Ok((traj, s, files))
}

fn trajectory_diagnostic(cfg: &ExperimentConfig, seed: u64, traj: &Trajectory, d: &Diagnostic) -> Result<Section> {
    match d {
        Diagnostic::Energy => energy_section(traj),
        Diagnostic::CrossEnergy => cross_energy_section(traj),
        Diagnostic::ProdiSerrin { p } => prodi_serrin_section(cfg, traj, *p),
        Diagnostic::WeakStrong { p, constant, perturbation, band, amplified } => {
            let how = Perturbation { size: *perturbation, band: *band, amplified: *amplified };
            let v = perturbed_solution(cfg, traj.initial(), seed, how)?;
            weak_strong_section(traj, &v, *p, *constant)
        }
        Diagnostic::Residuals => residuals_section(traj),
        _ => Ok(Section::default()),
    }
}

/// Execute `command` and write its outputs. Invariant failures are
/// reported in the returned summary, not as errors.
pub fn run(command: &Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Summary> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out = opts.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&out)?;
    let mut extra_files = Vec::new();

    let sections: Vec<Section> = match command {
        Command::Norms { field } => {
            let f = scalar_input(cfg, seed, field)?;
            let lists: Vec<(Vec<f64>, Vec<f64>)> = cfg
                .diagnostics
                .iter()
                .filter_map(|d| match d {
                    Diagnostic::Norms { p, q } => Some((p.clone(), q.clone())),
                    _ => None,
                })
                .collect();
            let (ps, qs) = lists.into_iter().next().unwrap_or((DEFAULT_P.to_vec(), DEFAULT_Q.to_vec()));
            vec![norms_section(&f, &ps, &qs)?]
        }
        Command::RieszCheck => {
            let band = find(cfg, |d| if let Diagnostic::Riesz { band } = d { Some(*band) } else { None }).unwrap_or(2);
            vec![riesz_section(cfg, band, seed)?]
        }
        Command::Cz { field } => {
            let f = scalar_input(cfg, seed, field)?;
            let alphas = find(cfg, |d| if let Diagnostic::Cz { alpha } = d { Some(alpha.clone()) } else { None });
            vec![cz_section(&f, &alphas.unwrap_or_default())?]
        }
        Command::Hardy => {
            let (ps, qs) =
                find(cfg, |d| if let Diagnostic::Hardy { p, q } = d { Some((p.clone(), q.clone())) } else { None })
                    .unwrap_or((vec![1.5, 2.0, 3.0], vec![1.0, 2.0, 4.0]));
            vec![hardy_section(&ps, &qs)?]
        }
        Command::Solve | Command::Energy => {
            let (traj, base, files) = solve_section(cfg, seed, &out)?;
            extra_files = files;
            let jobs: Vec<Diagnostic> = match command {
                Command::Energy => vec![Diagnostic::Energy, Diagnostic::CrossEnergy],
                _ => cfg.diagnostics.iter().filter(|d| d.uses_trajectory()).cloned().collect(),
            };
            let mut all = vec![base];
            all.extend(run_jobs(&jobs, opts.parallel, |d| trajectory_diagnostic(cfg, seed, &traj, d))?);
            all
        }
        Command::WeakStrong { u, v } => {
            let entry = find(cfg, |d| match d {
                Diagnostic::WeakStrong { p, constant, perturbation, band, amplified } => {
                    Some((*p, *constant, Perturbation { size: *perturbation, band: *band, amplified: *amplified }))
                }
                _ => None,
            });
            let default_how = Perturbation { size: 1e-3, band: 2, amplified: false };
            let (p, constant, how) = entry.unwrap_or((f64::INFINITY, None, default_how));
            let (u, v) = match (u, v) {
                (Some(a), Some(b)) => (io::read_trajectory(a)?, io::read_trajectory(b)?),
                (None, None) => {
                    let f = cfg.initial.vector(cfg.grid()?, seed)?;
                    let u = solve_mild(&f, &cfg.solver.solver_config())?;
                    let v = perturbed_solution(cfg, &f, seed, how)?;
                    (u, v)
                }
                _ => return Err(Error::Precondition("weak-strong needs both --u and --v, or neither".into())),
            };
            vec![weak_strong_section(&u, &v, p, constant)?]
        }
    };

    let mut summary = Summary {
        name: cfg.name.clone(),
        command: command.name().to_string(),
        seed,
        passed: true,
        invariants: Vec::new(),
        constants: BTreeMap::new(),
        outputs: Vec::new(),
    };
    for s in sections {
        for (name, table) in s.tables {
            table.write(&out.join(&name))?;
            summary.outputs.push(name);
        }
        summary.invariants.extend(s.invariants);
        summary.constants.extend(s.constants);
    }
    summary.outputs.extend(extra_files);
    summary.outputs.push("summary.json".into());
    summary.passed = summary.invariants.iter().all(|i| i.passed);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(out.join("summary.json"), json + "\n")?;
    Ok(summary)
}
