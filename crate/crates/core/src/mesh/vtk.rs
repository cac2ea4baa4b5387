//! Legacy ASCII VTK export of the active cells with nodal fields.

use super::AdaptiveMesh;
use std::io::{self, Write};

/// A named nodal field with `ncomp` components per vertex (1 or 2).
pub struct PointField<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
    pub ncomp: usize,
}

pub fn write_vtk<W: Write>(out: &mut W, mesh: &AdaptiveMesh, title: &str, fields: &[PointField<'_>]) -> io::Result<()> {
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nv} double")?;
    for p in mesh.vertex_positions() {
        writeln!(out, "{} {} 0", p[0], p[1])?;
    }
    writeln!(out, "CELLS {nc} {}", 5 * nc)?;
    for c in 0..nc {
        let v = mesh.cell_vertices(c);
        writeln!(out, "4 {} {} {} {}", v[0], v[1], v[2], v[3])?;
    }
    writeln!(out, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(out, "9")?;
    }
    writeln!(out, "CELL_DATA {nc}")?;
    writeln!(out, "SCALARS level int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for l in mesh.cell_levels() {
        writeln!(out, "{l}")?;
    }
    if !fields.is_empty() {
        writeln!(out, "POINT_DATA {nv}")?;
    }
    for f in fields {
        match f.ncomp {
            1 => {
                writeln!(out, "SCALARS {} double 1", f.name)?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in f.values {
                    writeln!(out, "{v}")?;
                }
            }
            2 => {
                writeln!(out, "VECTORS {} double", f.name)?;
                for k in 0..nv {
                    writeln!(out, "{} {} 0", f.values[2 * k], f.values[2 * k + 1])?;
                }
            }
            n => return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("unsupported component count {n}"))),
        }
    }
    Ok(())
}
