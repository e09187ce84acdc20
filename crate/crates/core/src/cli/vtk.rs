//! Legacy ASCII VTK output of discontinuous fields.
//!
//! Every triangle gets its own three points so that element-wise
//! polynomials are written without averaging across edges.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::hdg::FieldSolution;
use crate::mesh::Mesh;
use crate::postprocess::PostprocessedField;

pub fn solution_to_vtk(
    mesh: &Mesh,
    sol: &FieldSolution,
    post: &PostprocessedField,
    title: &str,
) -> String {
    let nt = mesh.num_triangles();
    let np = 3 * nt;
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0").unwrap();
    writeln!(s, "{}", title.lines().next().unwrap_or("")).unwrap();
    writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {np} double").unwrap();
    for t in 0..nt {
        for p in mesh.triangle_points(t) {
            writeln!(s, "{:?} {:?} 0", p.x, p.y).unwrap();
        }
    }
    writeln!(s, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in 0..nt {
        writeln!(s, "3 {} {} {}", 3 * t, 3 * t + 1, 3 * t + 2).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        writeln!(s, "5").unwrap();
    }
    writeln!(
        s,
        "CELL_DATA {nt}\nSCALARS region int 1\nLOOKUP_TABLE default"
    )
    .unwrap();
    for r in &mesh.regions {
        writeln!(s, "{}", r.label()).unwrap();
    }

    let mut u = Vec::with_capacity(np);
    let mut ustar = Vec::with_capacity(np);
    let mut q = Vec::with_capacity(np);
    for t in 0..nt {
        for p in mesh.triangle_points(t) {
            u.push(sol.u(t, p));
            ustar.push(post.evaluate(t, p));
            q.push(sol.q(t, p));
        }
    }
    writeln!(s, "POINT_DATA {np}").unwrap();
    for (name, values) in [("u_h", &u), ("u_star", &ustar)] {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in values {
            writeln!(s, "{v:?}").unwrap();
        }
    }
    for (name, c) in [("q_x", 0), ("q_y", 1)] {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in &q {
            writeln!(s, "{:?}", v[c]).unwrap();
        }
    }
    writeln!(s, "VECTORS q_h double").unwrap();
    for v in &q {
        writeln!(s, "{:?} {:?} 0", v.x, v.y).unwrap();
    }
    s
}

pub fn write_vtk(
    path: &Path,
    mesh: &Mesh,
    sol: &FieldSolution,
    post: &PostprocessedField,
    title: &str,
) -> Result<()> {
    std::fs::write(path, solution_to_vtk(mesh, sol, post, title))?;
    Ok(())
}
