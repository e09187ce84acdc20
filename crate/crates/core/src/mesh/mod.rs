//! Straight-triangle meshes with classified edges.

mod generate;
mod io;

pub use generate::{
    generate_annulus, generate_conforming, generate_immersed, generate_square_grid,
    resample_by_arclength, ConformingSpec, ImmersedOptions,
};
pub use io::{mesh_from_str, mesh_to_string, read_mesh, write_mesh};

use std::collections::HashMap;

use crate::basis::{diameter, triangle_area};
use crate::error::{Error, Result};
use crate::geometry::{BcKind, DomainSpec, Point, Region};
use crate::quadrature::LineRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Interior,
    Dirichlet,
    Neumann,
    Interface,
}

impl EdgeClass {
    pub fn code(self) -> u8 {
        match self {
            EdgeClass::Interior => 0,
            EdgeClass::Dirichlet => 1,
            EdgeClass::Neumann => 2,
            EdgeClass::Interface => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EdgeClass::Interior),
            1 => Some(EdgeClass::Dirichlet),
            2 => Some(EdgeClass::Neumann),
            3 => Some(EdgeClass::Interface),
            _ => None,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, EdgeClass::Dirichlet | EdgeClass::Neumann)
    }
}

/// An edge, oriented so that `elements[0]` lies on its left.
///
/// For interface edges `elements[0]` is the region-one triangle, so the
/// right-hand normal of the edge is `n¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub elements: [usize; 2],
    pub class: EdgeClass,
}

impl Edge {
    pub const NONE: usize = usize::MAX;

    pub fn is_boundary(&self) -> bool {
        self.elements[1] == Self::NONE
    }

    /// The neighbour on the other side of `element`, if any.
    pub fn other(&self, element: usize) -> Option<usize> {
        let o = if self.elements[0] == element {
            self.elements[1]
        } else {
            self.elements[0]
        };
        (o != Self::NONE).then_some(o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub edges: Vec<Edge>,
    /// Local edge `i` of a triangle joins its vertices `i` and `i + 1`.
    pub triangle_edges: Vec<[usize; 3]>,
}

impl Mesh {
    /// Builds connectivity; boundary edges start out as Dirichlet and
    /// region-changing edges as interface edges.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if regions.len() != triangles.len() {
            return Err(Error::InvariantViolation(format!(
                "{} region labels for {} triangles",
                regions.len(),
                triangles.len()
            )));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvariantViolation(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let pts = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let area = triangle_area(&pts);
            if !(area > 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "triangle {t} has non-positive signed area {area:.3e}"
                )));
            }
        }
        let mut map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = vec![[0usize; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                match map.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.elements[1] != Edge::NONE || edge.vertices == [a, b] {
                            return Err(Error::InvariantViolation(format!(
                                "edge ({a}, {b}) is shared by more than two triangles or has inconsistent orientation"
                            )));
                        }
                        edge.elements[1] = t;
                        triangle_edges[t][i] = e;
                    }
                    None => {
                        map.insert(key, edges.len());
                        triangle_edges[t][i] = edges.len();
                        edges.push(Edge {
                            vertices: [a, b],
                            elements: [t, Edge::NONE],
                            class: EdgeClass::Dirichlet,
                        });
                    }
                }
            }
        }
        for edge in &mut edges {
            if edge.is_boundary() {
                continue;
            }
            let (r0, r1) = (regions[edge.elements[0]], regions[edge.elements[1]]);
            if r0 == r1 {
                edge.class = EdgeClass::Interior;
            } else {
                edge.class = EdgeClass::Interface;
                if r0 != Region::One {
                    edge.elements.swap(0, 1);
                    edge.vertices.swap(0, 1);
                }
            }
        }
        Ok(Mesh {
            vertices,
            triangles,
            regions,
            edges,
            triangle_edges,
        })
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ]
    }

    pub fn area(&self, t: usize) -> f64 {
        triangle_area(&self.triangle_points(t))
    }

    /// Diameter `h_K` of a triangle.
    pub fn diameter(&self, t: usize) -> f64 {
        diameter(&self.triangle_points(t))
    }

    /// Mesh size `h = max h_K`.
    pub fn h(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn edge_points(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_points(e);
        (b - a).norm()
    }

    /// Unit normal of edge `e` pointing out of `elements[0]`.
    pub fn edge_normal(&self, e: usize) -> Point {
        let (a, b) = self.edge_points(e);
        let t = (b - a).normalize();
        Point::new(t.y, -t.x)
    }

    /// Unit normal of edge `e` pointing out of triangle `t`.
    pub fn outward_normal(&self, t: usize, e: usize) -> Point {
        let n = self.edge_normal(e);
        if self.edges[e].elements[0] == t {
            n
        } else {
            -n
        }
    }

    pub fn edges_of_class(&self, class: EdgeClass) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.class == class)
            .map(|(i, _)| i)
    }

    pub fn count_class(&self, class: EdgeClass) -> usize {
        self.edges_of_class(class).count()
    }

    /// Number of components connected through shared edges.
    pub fn connected_components(&self) -> usize {
        let n = self.num_triangles();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in &self.edges {
            if !e.is_boundary() {
                let a = find(&mut parent, e.elements[0]);
                let b = find(&mut parent, e.elements[1]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Verifies every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvariantViolation(m));
        for t in 0..self.num_triangles() {
            let a = self.area(t);
            if !(a > 0.0) {
                return fail(format!("triangle {t} has non-positive signed area {a:.3e}"));
            }
        }
        let mut incidence = 0;
        for (i, e) in self.edges.iter().enumerate() {
            let boundary = e.is_boundary();
            incidence += if boundary { 1 } else { 2 };
            match e.class {
                EdgeClass::Dirichlet | EdgeClass::Neumann if !boundary => {
                    return fail(format!("boundary-class edge {i} has two triangles"));
                }
                EdgeClass::Interior | EdgeClass::Interface if boundary => {
                    return fail(format!("edge {i} of class {:?} has one triangle", e.class));
                }
                EdgeClass::Interior
                    if self.regions[e.elements[0]] != self.regions[e.elements[1]] =>
                {
                    return fail(format!("interior edge {i} separates different regions"));
                }
                EdgeClass::Interface
                    if self.regions[e.elements[0]] != Region::One
                        || self.regions[e.elements[1]] != Region::Two =>
                {
                    return fail(format!(
                        "interface edge {i} does not separate region 1 from region 2"
                    ));
                }
                _ => {}
            }
        }
        if incidence != 3 * self.num_triangles() {
            return fail("edge-triangle incidence count mismatch".into());
        }
        // hanging vertices: every vertex used by a triangle must not lie in the interior of an edge
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        let boundary_vertices: Vec<usize> = {
            let mut v: Vec<usize> = self
                .edges
                .iter()
                .filter(|e| e.is_boundary())
                .flat_map(|e| e.vertices)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            let a = self.vertices[e.vertices[0]];
            let b = self.vertices[e.vertices[1]];
            let len = (b - a).norm();
            for &v in &boundary_vertices {
                if v == e.vertices[0] || v == e.vertices[1] {
                    continue;
                }
                let p = self.vertices[v];
                let s = (p - a).dot(&(b - a)) / (len * len);
                if s > 1e-9 && s < 1.0 - 1e-9 {
                    let d = (a + (b - a) * s - p).norm();
                    if d < 1e-12 * len {
                        return fail(format!(
                            "hanging vertex {v} on edge ({}, {})",
                            e.vertices[0], e.vertices[1]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Assigns Dirichlet or Neumann to every boundary edge from the boundary
    /// partition of `domain`, and checks that interface edges match the
    /// region labels.
    pub fn classify(&mut self, domain: &DomainSpec) -> Result<()> {
        let samples = LineRule::gauss(4);
        for i in 0..self.edges.len() {
            if !self.edges[i].is_boundary() {
                continue;
            }
            let (a, b) = self.edge_points(i);
            let part = nearest_boundary_part(domain, 0.5 * (a + b))?;
            let rule = &domain.boundary[part].rule;
            let mut kind: Option<BcKind> = None;
            for &s in &samples.points {
                let (xbar, _) = domain.boundary[part].curve.closest_point(a + (b - a) * s)?;
                let k = rule.classify(xbar);
                match kind {
                    None => kind = Some(k),
                    Some(prev) if prev != k => return Err(Error::MixedEdge { edge: i }),
                    _ => {}
                }
            }
            self.edges[i].class = match kind.unwrap() {
                BcKind::Dirichlet => EdgeClass::Dirichlet,
                BcKind::Neumann => EdgeClass::Neumann,
            };
        }
        Ok(())
    }
}

/// Index of the boundary component closest to `x`.
pub fn nearest_boundary_part(domain: &DomainSpec, x: Point) -> Result<usize> {
    let mut best = (0, f64::INFINITY);
    for (i, part) in domain.boundary.iter().enumerate() {
        let (_, d) = part.curve.closest_point(x)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    if domain.boundary.is_empty() {
        return Err(Error::InvalidParameters("domain has no boundary".into()));
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BcRule, BoundaryPart, Curve, Polygon, Side};

    #[test]
    fn negative_area_rejected() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let err = Mesh::new(v, vec![[0, 2, 1]], vec![Region::One]).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)));
    }

    #[test]
    fn unit_square_classification() {
        let mut m = generate_square_grid(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 4);
        let domain = DomainSpec::new(vec![BoundaryPart::new(
            Curve::Polygon(Polygon::rectangle(
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
            )),
            Side::Inside,
            BcRule::NeumannOnSegment {
                a: Point::new(0.0, 0.0),
                b: Point::new(0.0, 1.0),
            },
        )]);
        m.classify(&domain).unwrap();
        assert_eq!(m.count_class(EdgeClass::Neumann), 4);
        assert_eq!(m.count_class(EdgeClass::Dirichlet), 12);
        for e in m.edges_of_class(EdgeClass::Neumann) {
            let (a, b) = m.edge_points(e);
            assert!(a.x == 0.0 && b.x == 0.0);
        }
        m.validate().unwrap();
    }

    #[test]
    fn normals_point_out_of_left_element() {
        let m = generate_square_grid(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 3);
        for (i, e) in m.edges.iter().enumerate() {
            let c: Point = m.triangle_points(e.elements[0]).iter().sum::<Point>() / 3.0;
            let (a, _) = m.edge_points(i);
            assert!(m.edge_normal(i).dot(&(a - c)) > 0.0);
        }
    }
}
