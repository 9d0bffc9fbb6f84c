//! Legacy ASCII VTK (unstructured grid) and Wavefront OBJ writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::mesh::SurfaceMesh;
use crate::stepper::SimState;

/// VTK cell type id of a linear triangle.
pub const VTK_TRIANGLE: u8 = 5;

/// Writes the mesh with `eta` and `theta` as point scalars.
pub fn write_vtk_to<W: Write>(state: &SimState, out: &mut W) -> std::io::Result<()> {
    let mesh = &state.mesh;
    let (n, m) = (mesh.node_count(), mesh.triangle_count());
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(
        out,
        "esdib step {} t {}",
        state.step_index,
        format_f64(state.time)
    )?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for p in mesh.nodes() {
        writeln!(out, "{} {} {}", format_f64(p.x), format_f64(p.y), format_f64(p.z))?;
    }
    writeln!(out, "CELLS {m} {}", 4 * m)?;
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "3 {a} {b} {c}")?;
    }
    writeln!(out, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(out, "{VTK_TRIANGLE}")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    for (name, values) in [("eta", &state.eta), ("theta", &state.theta)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(out, "{}", format_f64(*v))?;
        }
    }
    Ok(())
}

pub fn write_obj_to<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> std::io::Result<()> {
    for p in mesh.nodes() {
        writeln!(out, "v {} {} {}", format_f64(p.x), format_f64(p.y), format_f64(p.z))?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1)?;
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_vtk(state: &SimState, path: &Path) -> Result<()> {
    write_file(path, |out| write_vtk_to(state, out))
}

pub fn write_obj(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    write_file(path, |out| write_obj_to(mesh, out))
}
