//! Plain-text mesh format.
//!
//! ```text
//! nv nt ne
//! x y                 (nv lines)
//! i j k region        (nt lines, 0-based, region 1 or 2)
//! a b class           (ne lines, 0 interior, 1 dirichlet, 2 neumann, 3 interface)
//! ```
//! Lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{EdgeClass, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{} {} {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.edges.len()
    )
    .unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{:?} {:?}", v.x, v.y).unwrap();
    }
    for (t, r) in mesh.triangles.iter().zip(&mesh.regions) {
        writeln!(s, "{} {} {} {}", t[0], t[1], t[2], r.label()).unwrap();
    }
    for e in &mesh.edges {
        writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.class.code()).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_str(&text, path)
}

pub fn mesh_from_str(text: &str, path: &Path) -> Result<Mesh> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    fn fields<T: std::str::FromStr>(
        line: (usize, &str),
        n: usize,
        err: &dyn Fn(usize, String) -> Error,
    ) -> Result<Vec<T>> {
        let parts: Vec<&str> = line.1.split_whitespace().collect();
        if parts.len() != n {
            return Err(err(
                line.0,
                format!("expected {n} fields, found {}", parts.len()),
            ));
        }
        parts
            .iter()
            .map(|p| {
                p.parse::<T>()
                    .map_err(|_| err(line.0, format!("cannot parse '{p}'")))
            })
            .collect()
    }

    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    let counts: Vec<usize> = fields(header, 3, &parse_err)?;
    let (nv, nt, ne) = (counts[0], counts[1], counts[2]);
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file while reading {what}")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f: Vec<f64> = fields(next("vertices")?, 2, &parse_err)?;
        vertices.push(Point::new(f[0], f[1]));
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut regions = Vec::with_capacity(nt);
    for _ in 0..nt {
        let line = next("triangles")?;
        let f: Vec<usize> = fields(line, 4, &parse_err)?;
        if f[..3].iter().any(|&v| v >= nv) {
            return Err(parse_err(line.0, "vertex index out of range".into()));
        }
        triangles.push([f[0], f[1], f[2]]);
        let region = u8::try_from(f[3])
            .ok()
            .and_then(Region::from_label)
            .ok_or_else(|| parse_err(line.0, format!("invalid region {}", f[3])))?;
        regions.push(region);
    }
    let mut classes = HashMap::new();
    for _ in 0..ne {
        let line = next("edges")?;
        let f: Vec<usize> = fields(line, 3, &parse_err)?;
        let class = u8::try_from(f[2])
            .ok()
            .and_then(EdgeClass::from_code)
            .ok_or_else(|| parse_err(line.0, format!("invalid edge class {}", f[2])))?;
        classes.insert((f[0].min(f[1]), f[0].max(f[1])), (line.0, class));
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(
            line,
            "trailing content after the edge list".into(),
        ));
    }

    let mut mesh = Mesh::new(vertices, triangles, regions)?;
    if mesh.edges.len() != ne || classes.len() != ne {
        return Err(Error::InvariantViolation(format!(
            "file lists {ne} edges but the triangles define {}",
            mesh.edges.len()
        )));
    }
    for edge in &mut mesh.edges {
        let [a, b] = edge.vertices;
        let (_, class) = classes.get(&(a.min(b), a.max(b))).ok_or_else(|| {
            Error::InvariantViolation(format!("edge ({a}, {b}) missing from the edge list"))
        })?;
        edge.class = *class;
    }
    mesh.validate()?;
    Ok(mesh)
}
