//! File formats: Gauss data and immersions as CSV with a JSON header,
//! boundary data as CSV, OBJ meshes and JSON reports.
//!
//! Floats are written in Rust's shortest round-trip form, so a write/read
//! cycle is lossless and repeated runs produce identical bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::{GroupPoint, Params};
use crate::error::{Error, Result};
use crate::gaussdata::GaussData;
use crate::grid::{ComplexGrid, Field, RealField};
use crate::heatflow::{BoundaryValues, FlowConfig, FlowResult, Side};
use crate::integrator::Immersion;

pub const GAUSS_COLUMNS: [&str; 8] = ["j", "k", "re_z", "im_z", "re_f", "im_f", "re_g", "im_g"];
pub const IMMERSION_COLUMNS: [&str; 5] = ["j", "k", "x1", "x2", "x3"];
pub const BOUNDARY_COLUMNS: [&str; 4] = ["side", "index", "re_g", "im_g"];
pub const MEAN_CURVATURE_COLUMNS: [&str; 5] = ["j", "k", "re_z", "im_z", "h"];

/// JSON companion of a Gauss data CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussHeader {
    pub grid: ComplexGrid,
    pub mu1: f64,
    pub mu2: f64,
}

impl GaussHeader {
    pub fn params(&self) -> Params {
        Params::new(self.mu1, self.mu2)
    }
}

/// JSON companion of an immersion CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionHeader {
    pub grid: ComplexGrid,
    pub mu1: f64,
    pub mu2: f64,
    pub basepoint: [f64; 3],
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse(e.to_string()),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every record, checking the header and converting fields with `line`
/// numbers for error messages (the header is line 1).
fn read_rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let found = rd.headers().map_err(csv_err)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected columns {}, found {}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec));
    }
    Ok(rows)
}

fn field_f64(rec: &csv::StringRecord, line: u64, col: usize, name: &str) -> Result<f64> {
    let text = rec.get(col).unwrap_or("");
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("row {line}: column {name}: cannot parse '{text}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "row {line}: column {name}: non-finite value '{text}'"
        )));
    }
    Ok(v)
}

fn field_usize(rec: &csv::StringRecord, line: u64, col: usize, name: &str) -> Result<usize> {
    let text = rec.get(col).unwrap_or("");
    text.parse()
        .map_err(|_| Error::Parse(format!("row {line}: column {name}: cannot parse '{text}' as an index")))
}

/// Places `(j, k)`-indexed rows into a grid-shaped vector, requiring each
/// node exactly once and node coordinates (if given) to match the grid.
struct NodeTable<T> {
    grid: ComplexGrid,
    slots: Vec<Option<T>>,
}

impl<T: Clone> NodeTable<T> {
    fn new(grid: ComplexGrid) -> Self {
        NodeTable {
            grid,
            slots: vec![None; grid.len()],
        }
    }

    fn insert(&mut self, line: u64, j: usize, k: usize, z: Option<Complex64>, value: T) -> Result<()> {
        let g = self.grid;
        if j >= g.n_re || k >= g.n_im {
            return Err(Error::Parse(format!(
                "row {line}: node ({j}, {k}) outside the {}x{} grid",
                g.n_re, g.n_im
            )));
        }
        if let Some(z) = z {
            let expect = g.node(j, k);
            let tol = 1e-9 * (1.0 + expect.norm()) + 1e-6 * g.dz_re.min(g.dz_im);
            if (z - expect).norm() > tol {
                return Err(Error::Parse(format!(
                    "row {line}: node ({j}, {k}) has z = {z}, grid expects {expect}"
                )));
            }
        }
        let slot = &mut self.slots[g.index(j, k)];
        if slot.is_some() {
            return Err(Error::Parse(format!("row {line}: node ({j}, {k}) appears twice")));
        }
        *slot = Some(value);
        Ok(())
    }

    fn finish(self) -> Result<Field<T>> {
        let g = self.grid;
        let mut data = Vec::with_capacity(g.len());
        for (i, v) in self.slots.into_iter().enumerate() {
            match v {
                Some(v) => data.push(v),
                None => {
                    return Err(Error::Parse(format!("missing node ({}, {})", i % g.n_re, i / g.n_re)));
                }
            }
        }
        Field::from_vec(g, data)
    }
}

pub fn write_gauss_csv<W: Write>(w: W, d: &GaussData) -> Result<()> {
    let grid = *d.grid();
    let rows = grid.nodes().map(|(j, k)| {
        let (z, f, g) = (grid.node(j, k), d.f.at(j, k), d.g.at(j, k));
        vec![
            j.to_string(),
            k.to_string(),
            num(z.re),
            num(z.im),
            num(f.re),
            num(f.im),
            num(g.re),
            num(g.im),
        ]
    });
    write_rows(w, &GAUSS_COLUMNS, rows)
}

pub fn read_gauss_csv<R: Read>(r: R, grid: ComplexGrid) -> Result<GaussData> {
    grid.validate()?;
    let mut table = NodeTable::new(grid);
    for (line, rec) in read_rows(r, &GAUSS_COLUMNS)? {
        let j = field_usize(&rec, line, 0, "j")?;
        let k = field_usize(&rec, line, 1, "k")?;
        let v: Vec<f64> = (2..8)
            .map(|c| field_f64(&rec, line, c, GAUSS_COLUMNS[c]))
            .collect::<Result<_>>()?;
        let z = Complex64::new(v[0], v[1]);
        table.insert(
            line,
            j,
            k,
            Some(z),
            (Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5])),
        )?;
    }
    let fg = table.finish()?;
    GaussData::new(fg.map(|p| p.0), fg.map(|p| p.1))
}

pub fn write_immersion_csv<W: Write>(w: W, s: &Immersion) -> Result<()> {
    let rows = s.grid().nodes().map(|(j, k)| {
        vec![
            j.to_string(),
            k.to_string(),
            num(s.x1.at(j, k)),
            num(s.x2.at(j, k)),
            num(s.x3.at(j, k)),
        ]
    });
    write_rows(w, &IMMERSION_COLUMNS, rows)
}

pub fn read_immersion_csv<R: Read>(r: R, header: &ImmersionHeader) -> Result<Immersion> {
    header.grid.validate()?;
    let mut table = NodeTable::new(header.grid);
    for (line, rec) in read_rows(r, &IMMERSION_COLUMNS)? {
        let j = field_usize(&rec, line, 0, "j")?;
        let k = field_usize(&rec, line, 1, "k")?;
        let v: Vec<f64> = (2..5)
            .map(|c| field_f64(&rec, line, c, IMMERSION_COLUMNS[c]))
            .collect::<Result<_>>()?;
        table.insert(line, j, k, None, [v[0], v[1], v[2]])?;
    }
    let x = table.finish()?;
    let [b1, b2, b3] = header.basepoint;
    Immersion::new(
        x.map(|p| p[0]),
        x.map(|p| p[1]),
        x.map(|p| p[2]),
        Params::new(header.mu1, header.mu2),
        GroupPoint::new(b1, b2, b3),
    )
}

pub fn immersion_header(s: &Immersion) -> ImmersionHeader {
    ImmersionHeader {
        grid: *s.grid(),
        mu1: s.params.mu1,
        mu2: s.params.mu2,
        basepoint: s.basepoint.to_array(),
    }
}

/// ASCII OBJ mesh in group coordinates: one vertex per node in row-major
/// order, two counterclockwise triangles per grid cell.
pub fn write_obj<W: Write>(mut w: W, s: &Immersion) -> Result<()> {
    let grid = *s.grid();
    writeln!(w, "# group coordinates x1 x2 x3 on a {}x{} grid", grid.n_re, grid.n_im)?;
    for (j, k) in grid.nodes() {
        writeln!(w, "v {} {} {}", s.x1.at(j, k), s.x2.at(j, k), s.x3.at(j, k))?;
    }
    for k in 0..grid.n_im - 1 {
        for j in 0..grid.n_re - 1 {
            let a = grid.index(j, k) + 1;
            let b = grid.index(j + 1, k) + 1;
            let c = grid.index(j + 1, k + 1) + 1;
            let d = grid.index(j, k + 1) + 1;
            writeln!(w, "f {a} {b} {c}")?;
            writeln!(w, "f {a} {c} {d}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundary_csv<W: Write>(w: W, b: &BoundaryValues) -> Result<()> {
    let rows = Side::ALL.into_iter().flat_map(|side| {
        b.side(side)
            .iter()
            .enumerate()
            .map(move |(i, v)| vec![side.name().to_string(), i.to_string(), num(v.re), num(v.im)])
    });
    write_rows(w, &BOUNDARY_COLUMNS, rows)
}

pub fn read_boundary_csv<R: Read>(r: R, grid: ComplexGrid) -> Result<BoundaryValues> {
    grid.validate()?;
    let mut sides: Vec<Vec<Option<Complex64>>> = Side::ALL.iter().map(|s| vec![None; s.len(&grid)]).collect();
    for (line, rec) in read_rows(r, &BOUNDARY_COLUMNS)? {
        let name = rec.get(0).unwrap_or("");
        let side = Side::parse(name).ok_or_else(|| Error::Parse(format!("row {line}: unknown side '{name}'")))?;
        let i = field_usize(&rec, line, 1, "index")?;
        let v = Complex64::new(field_f64(&rec, line, 2, "re_g")?, field_f64(&rec, line, 3, "im_g")?);
        let slots = &mut sides[side as usize];
        let slot = slots.get_mut(i).ok_or_else(|| {
            Error::Parse(format!(
                "row {line}: index {i} outside the {} side of length {}",
                name,
                side.len(&grid)
            ))
        })?;
        if slot.is_some() {
            return Err(Error::Parse(format!("row {line}: {name} index {i} appears twice")));
        }
        *slot = Some(v);
    }
    let mut full = Vec::new();
    for (side, slots) in Side::ALL.iter().zip(sides) {
        let vals: Option<Vec<Complex64>> = slots.into_iter().collect();
        full.push(vals.ok_or_else(|| Error::Parse(format!("incomplete {} side", side.name())))?);
    }
    let left = full.pop().unwrap();
    let top = full.pop().unwrap();
    let right = full.pop().unwrap();
    let bottom = full.pop().unwrap();
    BoundaryValues::new(grid, bottom, right, top, left)
}

/// Mean curvature at interior nodes.
pub fn write_mean_curvature_csv<W: Write>(w: W, h: &RealField) -> Result<()> {
    let grid = *h.grid();
    let rows = grid.interior_nodes().map(|(j, k)| {
        let z = grid.node(j, k);
        vec![j.to_string(), k.to_string(), num(z.re), num(z.im), num(h.at(j, k))]
    });
    write_rows(w, &MEAN_CURVATURE_COLUMNS, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySummary {
    pub initial: f64,
    pub last: f64,
    pub max_relative_increase: f64,
    pub steps: usize,
}

/// Convergence report of a flow run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iters: usize,
    pub final_residual: f64,
    pub tol: f64,
    pub dt: f64,
    pub max_iters: usize,
    pub singular_margin: f64,
    pub residual_history: Vec<(usize, f64)>,
    pub energy: EnergySummary,
}

impl ConvergenceReport {
    pub fn new(r: &FlowResult, cfg: &FlowConfig) -> Self {
        let e = &r.energy_history;
        ConvergenceReport {
            converged: r.converged,
            iters: r.iters,
            final_residual: r.final_residual,
            tol: cfg.tol,
            dt: cfg.dt,
            max_iters: cfg.max_iters,
            singular_margin: cfg.singular_margin,
            residual_history: r.residual_history.clone(),
            energy: EnergySummary {
                initial: e.first().copied().unwrap_or(0.0),
                last: e.last().copied().unwrap_or(0.0),
                max_relative_increase: r.max_energy_increase(),
                steps: e.len().saturating_sub(1),
            },
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes `<stem>.csv` and `<stem>.json` for Gauss data.
pub fn save_gauss(dir: &Path, stem: &str, d: &GaussData, p: Params) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_gauss_csv(fs::File::create(&csv_path)?, d)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &GaussHeader {
            grid: *d.grid(),
            mu1: p.mu1,
            mu2: p.mu2,
        },
    )
}

/// Reads Gauss data from a CSV path and its JSON header (same stem, `.json`).
pub fn load_gauss(csv_path: &Path) -> Result<(GaussData, Params)> {
    let header: GaussHeader = read_json(&csv_path.with_extension("json"))?;
    let file = fs::File::open(csv_path).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let d = read_gauss_csv(file, header.grid).map_err(|e| prefix(e, csv_path))?;
    Ok((d, header.params()))
}

pub fn save_immersion(dir: &Path, stem: &str, s: &Immersion) -> Result<()> {
    write_immersion_csv(fs::File::create(dir.join(format!("{stem}.csv")))?, s)?;
    write_json(&dir.join(format!("{stem}.json")), &immersion_header(s))
}

pub fn load_immersion(csv_path: &Path) -> Result<Immersion> {
    let header: ImmersionHeader = read_json(&csv_path.with_extension("json"))?;
    let file = fs::File::open(csv_path).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    read_immersion_csv(file, &header).map_err(|e| prefix(e, csv_path))
}

fn prefix(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}
