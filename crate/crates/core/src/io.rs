//! Flat-file formats for fields, trajectories and tables.
//!
//! All binary numbers are little-endian.
//!
//! Field file (`.lnsf`):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `LNSF`                              |
//! | 4     | `u32` format version (1)                  |
//! | 4     | `u32` dimension `n`                       |
//! | 4     | `u32` points per axis `N`                 |
//! | 8     | `f64` box side `L`                        |
//! | 4     | `u32` component count `c`                 |
//! | 8 c N^n | `f64` samples, component after component, each row-major with the last axis fastest |
//!
//! Trajectory file (`.lnst`): magic `LNST`, then the same version, `n`, `N`,
//! `L` and `c` fields, a `u32` model tag (0 heat, 1 Navier-Stokes with
//! dealiasing, 2 Navier-Stokes without), a `u64` state count, and for every
//! state its `f64` time followed by the samples as in a field file.
//!
//! CSV tables have one header line and print floats with 17 significant
//! digits, so they round-trip exactly and are byte-identical across runs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::ns::{Model, Trajectory};

const FIELD_MAGIC: &[u8; 4] = b"LNSF";
const TRAJECTORY_MAGIC: &[u8; 4] = b"LNST";
const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file ends early".into())
    } else {
        Error::Io(e)
    }
}

fn write_header(w: &mut impl Write, magic: &[u8; 4], grid: &Grid, components: usize) -> Result<()> {
    w.write_all(magic)?;
    put_u32(w, VERSION)?;
    put_u32(w, grid.dim() as u32)?;
    put_u32(w, grid.points() as u32)?;
    put_f64(w, grid.length())?;
    put_u32(w, components as u32)
}

fn read_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<(Grid, usize)> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m).map_err(truncated)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&m)
        )));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let n = get_u32(r)? as usize;
    let points = get_u32(r)? as usize;
    let length = get_f64(r)?;
    let grid = Grid::new(n, points, length).map_err(|e| Error::Format(e.to_string()))?;
    let components = get_u32(r)? as usize;
    if components == 0 || components > 3 {
        return Err(Error::Format(format!("unsupported component count {components}")));
    }
    Ok((grid, components))
}

fn write_samples(w: &mut impl Write, components: &[ScalarField]) -> Result<()> {
    for c in components {
        for &v in c.values() {
            put_f64(w, v)?;
        }
    }
    Ok(())
}

fn read_samples(r: &mut impl Read, grid: Grid, components: usize) -> Result<Vec<ScalarField>> {
    (0..components)
        .map(|_| {
            let values = (0..grid.len()).map(|_| get_f64(r)).collect::<Result<Vec<f64>>>()?;
            ScalarField::from_values(grid, values)
        })
        .collect()
}

fn expect_end(r: &mut impl Read) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after the last sample".into())),
    }
}

pub fn write_field(path: &Path, components: &[ScalarField]) -> Result<()> {
    let first = components.first().ok_or_else(|| Error::Mismatch("no components to write".into()))?;
    let grid = *first.grid();
    for c in components {
        grid.ensure_same(c.grid())?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, FIELD_MAGIC, &grid, components.len())?;
    write_samples(&mut w, components)?;
    Ok(w.flush()?)
}

pub fn read_field(path: &Path) -> Result<Vec<ScalarField>> {
    let mut r = BufReader::new(File::open(path)?);
    let (grid, components) = read_header(&mut r, FIELD_MAGIC)?;
    let out = read_samples(&mut r, grid, components)?;
    expect_end(&mut r)?;
    Ok(out)
}

pub fn write_vector_field(path: &Path, u: &VectorField) -> Result<()> {
    write_field(path, u.components())
}

pub fn read_vector_field(path: &Path) -> Result<VectorField> {
    let comps = read_field(path)?;
    let n = comps[0].grid().dim();
    if comps.len() != n {
        return Err(Error::Format(format!("expected {n} components for a vector field, found {}", comps.len())));
    }
    VectorField::from_components(comps)
}

fn model_tag(model: Model) -> u32 {
    match model {
        Model::Heat => 0,
        Model::NavierStokes { dealias: true } => 1,
        Model::NavierStokes { dealias: false } => 2,
    }
}

fn model_from_tag(tag: u32) -> Result<Model> {
    match tag {
        0 => Ok(Model::Heat),
        1 => Ok(Model::NavierStokes { dealias: true }),
        2 => Ok(Model::NavierStokes { dealias: false }),
        _ => Err(Error::Format(format!("unknown model tag {tag}"))),
    }
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let grid = *traj.grid();
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, TRAJECTORY_MAGIC, &grid, grid.dim())?;
    put_u32(&mut w, model_tag(traj.model()))?;
    w.write_all(&(traj.len() as u64).to_le_bytes())?;
    for (t, s) in traj.times().iter().zip(traj.states()) {
        put_f64(&mut w, *t)?;
        write_samples(&mut w, s.components())?;
    }
    Ok(w.flush()?)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let mut r = BufReader::new(File::open(path)?);
    let (grid, components) = read_header(&mut r, TRAJECTORY_MAGIC)?;
    if components != grid.dim() {
        return Err(Error::Format("trajectory states must be vector fields".into()));
    }
    let model = model_from_tag(get_u32(&mut r)?)?;
    let count = get_u64(&mut r)? as usize;
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(get_f64(&mut r)?);
        states.push(VectorField::from_components(read_samples(&mut r, grid, components)?)?);
    }
    expect_end(&mut r)?;
    Trajectory::new(times, states, model)
}

/// Fixed-precision float formatting used by every table.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// A CSV table with a fixed header, written in one go.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row of already formatted cells.
    pub fn push(&mut self, cells: Vec<String>) -> Result<()> {
        if cells.len() != self.header.len() {
            return Err(Error::Mismatch(format!("row has {} cells, header has {}", cells.len(), self.header.len())));
        }
        self.rows.push(cells);
        Ok(())
    }

    pub fn push_numbers(&mut self, values: &[f64]) -> Result<()> {
        self.push(values.iter().map(|&v| fmt_f64(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }
}

/// One row per grid point: coordinates `x0..` then components `u0..`.
pub fn field_csv(components: &[ScalarField]) -> Result<Table> {
    let first = components.first().ok_or_else(|| Error::Mismatch("no components to write".into()))?;
    let grid = *first.grid();
    let n = grid.dim();
    let names: Vec<String> =
        (0..n).map(|a| format!("x{a}")).chain((0..components.len()).map(|c| format!("u{c}"))).collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut table = Table::new(&header);
    for m in 0..grid.len() {
        let x = grid.position(m);
        let mut row: Vec<f64> = x[..n].to_vec();
        for c in components {
            grid.ensure_same(c.grid())?;
            row.push(c.values()[m]);
        }
        table.push_numbers(&row)?;
    }
    Ok(table)
}
