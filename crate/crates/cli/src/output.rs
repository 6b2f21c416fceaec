//! CSV tables and legacy VTK snapshots.
//!
//! Every float is written with `{:.16e}` (17 significant digits), which
//! round-trips doubles exactly, so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chmhd::forms::Discretization;
use chmhd::scheme::FieldState;
use chmhd::verify::{ErrorReport, Norm, Rate};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of `energy.csv` / `diag.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub picard_iters: usize,
    pub increment: f64,
    pub max_weak_div: f64,
    pub mass_drift: f64,
    pub max_solve_residual: f64,
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_errors(path: &Path, reports: &[ErrorReport]) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n,h,dt,field,norm,error")?;
    for r in reports {
        for e in &r.errors {
            for norm in [Norm::L2, Norm::H1Semi, Norm::H1] {
                if let Some(v) = e.get(norm) {
                    writeln!(w, "{},{},{},{},{},{}", r.n, float(r.h), float(r.dt), e.field, norm, float(v))?;
                }
            }
        }
    }
    w.flush()
}

pub fn write_rates(path: &Path, rates: &[Rate]) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n_coarse,n_fine,field,norm,rate,tracked")?;
    for r in rates {
        let tracked = u8::from(r.norm == r.field.tracked_norm());
        writeln!(w, "{},{},{},{},{},{}", r.n_coarse, r.n_fine, r.field, r.norm, float(r.rate), tracked)?;
    }
    w.flush()
}

pub fn write_energy(path: &Path, rows: &[StepRow]) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step,t,E,picard_iters,max_weak_div,mass_drift")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.step,
            float(r.t),
            float(r.energy),
            r.picard_iters,
            float(r.max_weak_div),
            float(r.mass_drift)
        )?;
    }
    w.flush()
}

pub fn write_diag(path: &Path, rows: &[StepRow]) -> std::io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step,t,E,picard_iters,increment,max_weak_div,mass_drift,max_solve_residual")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.step,
            float(r.t),
            float(r.energy),
            r.picard_iters,
            float(r.increment),
            float(r.max_weak_div),
            float(r.mass_drift),
            float(r.max_solve_residual)
        )?;
    }
    w.flush()
}

/// Legacy ASCII unstructured grid on the mesh vertices. P2 fields are
/// sampled at the vertices (their first dofs), the P1 pressure is exact there.
pub fn write_vtk(path: &Path, disc: &Discretization, state: &FieldState) -> std::io::Result<()> {
    let mesh = disc.mesh();
    let nv = mesh.num_vertices();
    let nodes = disc.dofmap(chmhd::forms::Space::Vector).nodes();
    let mut w = create(path)?;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "chmhd t={}", float(state.t))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", float(p[0]), float(p[1]))?;
    }
    let nt = mesh.num_triangles();
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {nv}")?;
    for (name, values) in [("phi", &state.phi), ("mu", &state.mu), ("p", &state.p)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &values[..nv] {
            writeln!(w, "{}", float(*v))?;
        }
    }
    for (name, values) in [("u", &state.u), ("B", &state.b)] {
        writeln!(w, "VECTORS {name} double")?;
        for v in 0..nv {
            writeln!(w, "{} {} 0", float(values[v]), float(values[nodes + v]))?;
        }
    }
    w.flush()
}
