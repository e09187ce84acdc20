use std::collections::HashMap;
use std::f64::consts::TAU;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry::{project_on_segment, winding_number, Curve, DomainSpec, Point, Region};

/// Uniform `n x n` grid of `[min, max]`, each cell split along its
/// lower-left to upper-right diagonal.
pub fn generate_square_grid(min: Point, max: Point, n: usize) -> Mesh {
    assert!(n >= 1, "square grid needs at least one cell per side");
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let s = i as f64 / n as f64;
            let t = j as f64 / n as f64;
            vertices.push(Point::new(
                min.x + (max.x - min.x) * s,
                min.y + (max.y - min.y) * t,
            ));
        }
    }
    let id = |i: usize, j: usize| i + j * (n + 1);
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let regions = vec![Region::One; triangles.len()];
    Mesh::new(vertices, triangles, regions).expect("structured grid is valid")
}

#[derive(Debug, Clone)]
pub struct ImmersedOptions {
    /// Background cell size.
    pub h_b: f64,
    /// Lower-left corner of the background grid; defaults to the domain's
    /// bounding-box minimum.
    pub origin: Option<Point>,
}

impl ImmersedOptions {
    pub fn new(h_b: f64) -> Self {
        ImmersedOptions { h_b, origin: None }
    }
}

/// Keeps the background-grid triangles whose vertices and edge midpoints lie
/// strictly inside the domain.
pub fn generate_immersed(domain: &DomainSpec, opts: &ImmersedOptions) -> Result<Mesh> {
    if !(opts.h_b > 0.0) {
        return Err(Error::InvalidParameters(
            "background cell size must be positive".into(),
        ));
    }
    let (lo, hi) = domain.bounding_box();
    let origin = opts.origin.unwrap_or(lo);
    let nx = ((hi.x - origin.x) / opts.h_b).ceil() as usize + 1;
    let ny = ((hi.y - origin.y) / opts.h_b).ceil() as usize + 1;
    let point = |i: usize, j: usize| {
        Point::new(
            origin.x + i as f64 * opts.h_b,
            origin.y + j as f64 * opts.h_b,
        )
    };
    let mut inside_cache: HashMap<(usize, usize), bool> = HashMap::new();
    let mut inside_vertex = |i: usize, j: usize| {
        *inside_cache
            .entry((i, j))
            .or_insert_with(|| domain.contains(point(i, j)))
    };
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let cell = [
                [(i, j), (i + 1, j), (i + 1, j + 1)],
                [(i, j), (i + 1, j + 1), (i, j + 1)],
            ];
            for tri in cell {
                if !tri.iter().all(|&(a, b)| inside_vertex(a, b)) {
                    continue;
                }
                let p = tri.map(|(a, b)| point(a, b));
                let mids_inside = (0..3).all(|m| domain.contains(0.5 * (p[m] + p[(m + 1) % 3])));
                if !mids_inside {
                    continue;
                }
                let ids = tri.map(|key| {
                    *index.entry(key).or_insert_with(|| {
                        vertices.push(point(key.0, key.1));
                        vertices.len() - 1
                    })
                });
                triangles.push(ids);
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let regions = vec![Region::One; triangles.len()];
    let mesh = Mesh::new(vertices, triangles, regions)?;
    let components = mesh.connected_components();
    if components != 1 {
        return Err(Error::DisconnectedMesh { components });
    }
    Ok(mesh)
}

/// Structured mapped polar mesh of the annulus `r_in < |x - c| < r_out` with
/// `m` nodes on every ring; all nodes of the two boundary rings lie on the circles.
pub fn generate_annulus(center: Point, r_in: f64, r_out: f64, m: usize) -> Result<Mesh> {
    if m < 8 {
        return Err(Error::InvalidParameters(format!(
            "annulus needs at least 8 nodes per ring, got {m}"
        )));
    }
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::InvalidParameters(
            "annulus radii must satisfy 0 < r_in < r_out".into(),
        ));
    }
    let r_mean = 0.5 * (r_in + r_out);
    let nr = ((m as f64 * (r_out - r_in) / (TAU * r_mean)).round() as usize).max(1);
    let mut vertices = Vec::with_capacity(m * (nr + 1));
    for i in 0..=nr {
        let r = if i == nr {
            r_out
        } else {
            r_in + (r_out - r_in) * i as f64 / nr as f64
        };
        for j in 0..m {
            let a = TAU * j as f64 / m as f64;
            vertices.push(center + Point::new(a.cos(), a.sin()) * r);
        }
    }
    let id = |i: usize, j: usize| i * m + (j % m);
    let mut triangles = Vec::with_capacity(2 * m * nr);
    for i in 0..nr {
        for j in 0..m {
            let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j));
            // alternate the diagonal to avoid a global twist
            if (i + j) % 2 == 0 {
                triangles.push([a, c, b]);
                triangles.push([a, d, c]);
            } else {
                triangles.push([a, d, b]);
                triangles.push([b, d, c]);
            }
        }
    }
    let regions = vec![Region::One; triangles.len()];
    Mesh::new(vertices, triangles, regions)
}

/// `m` points on a closed curve, equally spaced in arc length, counter-clockwise.
pub fn resample_by_arclength(curve: &Curve, m: usize) -> Vec<Point> {
    if let Curve::Polygon(p) = curve {
        return subdivide_polygon(p.vertices(), m);
    }
    let fine = 64 * m.max(64);
    let pts: Vec<Point> = (0..fine)
        .map(|i| curve.point_at(i as f64 / fine as f64))
        .collect();
    let mut cum = Vec::with_capacity(fine + 1);
    cum.push(0.0);
    for i in 0..fine {
        let d = (pts[(i + 1) % fine] - pts[i]).norm();
        cum.push(cum[i] + d);
    }
    let total = cum[fine];
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 0..m {
        let target = total * j as f64 / m as f64;
        while cum[seg + 1] < target {
            seg += 1;
        }
        let frac = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
        let t = (seg as f64 + frac) / fine as f64;
        out.push(curve.point_at(t));
    }
    out
}

/// Splits each side of a polygon into pieces of roughly equal length, using
/// about `m` points in total and keeping every corner.
fn subdivide_polygon(corners: &[Point], m: usize) -> Vec<Point> {
    let n = corners.len();
    let perimeter: f64 = (0..n)
        .map(|i| (corners[(i + 1) % n] - corners[i]).norm())
        .sum();
    let target = perimeter / m.max(n) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        let pieces = (((b - a).norm() / target).round() as usize).max(1);
        for s in 0..pieces {
            out.push(a + (b - a) * (s as f64 / pieces as f64));
        }
    }
    out
}

/// Input of the constrained-Delaunay generator: closed polylines given
/// counter-clockwise, plus the target spacing of interior points.
#[derive(Debug, Clone)]
pub struct ConformingSpec {
    pub outer: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
    /// Triangles whose centroid is enclosed by this polyline get region one.
    pub interface: Option<Vec<Point>>,
    pub h: f64,
}

impl ConformingSpec {
    /// Polylines of a domain whose boundary and interface vertices lie on the
    /// analytic curves, spaced about `h` apart.
    pub fn from_domain(domain: &DomainSpec, h: f64) -> Result<Self> {
        use crate::geometry::Side;
        let nodes =
            |c: &Curve| resample_by_arclength(c, ((c.perimeter() / h).ceil() as usize).max(8));
        let mut outer = None;
        let mut holes = Vec::new();
        for part in &domain.boundary {
            match part.side {
                Side::Inside if outer.is_none() => outer = Some(nodes(&part.curve)),
                Side::Inside => {
                    return Err(Error::MeshingFailed(
                        "more than one enclosing boundary curve".into(),
                    ))
                }
                Side::Outside => holes.push(nodes(&part.curve)),
            }
        }
        let outer =
            outer.ok_or_else(|| Error::MeshingFailed("no enclosing boundary curve".into()))?;
        Ok(ConformingSpec {
            outer,
            holes,
            interface: domain.interface.as_ref().map(nodes),
            h,
        })
    }
}

/// Boundary- and interface-conforming mesh by constrained Delaunay
/// triangulation of the polylines plus a triangular lattice of interior points.
pub fn generate_conforming(spec: &ConformingSpec) -> Result<Mesh> {
    let h = spec.h;
    if !(h > 0.0) {
        return Err(Error::InvalidParameters(
            "mesh spacing must be positive".into(),
        ));
    }
    let mut polylines: Vec<&Vec<Point>> = vec![&spec.outer];
    polylines.extend(spec.holes.iter());
    if let Some(i) = &spec.interface {
        polylines.push(i);
    }
    let segments: Vec<(Point, Point)> = polylines
        .iter()
        .flat_map(|p| (0..p.len()).map(move |i| (p[i], p[(i + 1) % p.len()])))
        .collect();

    let inside_domain = |x: Point| {
        winding_number(&spec.outer, x) != 0
            && spec.holes.iter().all(|hole| winding_number(hole, x) == 0)
    };

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, p: Point| {
        cdt.insert(Point2::new(p.x, p.y))
            .map_err(|e| Error::MeshingFailed(format!("point ({}, {}): {e:?}", p.x, p.y)))
    };
    for poly in &polylines {
        let handles = poly
            .iter()
            .map(|&p| insert(&mut cdt, p))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..handles.len() {
            let (a, b) = (handles[i], handles[(i + 1) % handles.len()]);
            if cdt.can_add_constraint(a, b) {
                cdt.add_constraint(a, b);
            } else {
                return Err(Error::MeshingFailed("constraint edges intersect".into()));
            }
        }
    }

    let (mut lo, mut hi) = (spec.outer[0], spec.outer[0]);
    for p in &spec.outer {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi.y - lo.y) / dy).ceil() as usize;
    let cols = ((hi.x - lo.x) / h).ceil() as usize + 1;
    let clearance = 0.6 * h;
    let grid = SegmentGrid::new(&segments, lo, hi, h);
    for j in 0..=rows {
        let y = lo.y + j as f64 * dy;
        let shift = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        for i in 0..=cols {
            let p = Point::new(lo.x + shift + i as f64 * h, y);
            if !inside_domain(p) || grid.distance_below(p, clearance) {
                continue;
            }
            insert(&mut cdt, p)?;
        }
    }

    let mut vertices = vec![Point::zeros(); cdt.num_vertices()];
    for v in cdt.vertices() {
        let p = v.position();
        vertices[v.fix().index()] = Point::new(p.x, p.y);
    }
    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for f in cdt.inner_faces() {
        let ids = f.vertices().map(|v| v.fix().index());
        let c = (vertices[ids[0]] + vertices[ids[1]] + vertices[ids[2]]) / 3.0;
        if !inside_domain(c) {
            continue;
        }
        let tri = [vertices[ids[0]], vertices[ids[1]], vertices[ids[2]]];
        let area = crate::basis::triangle_area(&tri);
        let ids = if area < 0.0 {
            [ids[0], ids[2], ids[1]]
        } else {
            ids
        };
        triangles.push(ids);
        let region = match &spec.interface {
            Some(i) if winding_number(i, c) != 0 => Region::One,
            Some(_) => Region::Two,
            None => Region::One,
        };
        regions.push(region);
    }
    // drop vertices that ended up outside the kept triangles
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for tri in &mut triangles {
        for v in tri.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = kept.len();
                kept.push(vertices[*v]);
            }
            *v = remap[*v];
        }
    }
    let mesh = Mesh::new(kept, triangles, regions)?;
    let components = mesh.connected_components();
    if components != 1 {
        return Err(Error::DisconnectedMesh { components });
    }
    Ok(mesh)
}

/// Bucket grid of segments for distance queries.
struct SegmentGrid<'a> {
    segments: &'a [(Point, Point)],
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> SegmentGrid<'a> {
    fn new(segments: &'a [(Point, Point)], lo: Point, hi: Point, cell: f64) -> Self {
        let origin = lo - Point::new(cell, cell);
        let nx = ((hi.x - origin.x) / cell).ceil() as usize + 2;
        let ny = ((hi.y - origin.y) / cell).ceil() as usize + 2;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (s, (a, b)) in segments.iter().enumerate() {
            let (l, u) = (a.inf(b), a.sup(b));
            let (i0, j0) = Self::cell_of(origin, cell, nx, ny, l);
            let (i1, j1) = Self::cell_of(origin, cell, nx, ny, u);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[i + j * nx].push(s);
                }
            }
        }
        SegmentGrid {
            segments,
            origin,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn cell_of(origin: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = ((p.x - origin.x) / cell).floor().max(0.0) as usize;
        let j = ((p.y - origin.y) / cell).floor().max(0.0) as usize;
        (i.min(nx - 1), j.min(ny - 1))
    }

    /// True if some segment lies closer than `r` (with `r <= cell`) to `p`.
    fn distance_below(&self, p: Point, r: f64) -> bool {
        let (i, j) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, p);
        for jj in j.saturating_sub(1)..=(j + 1).min(self.ny - 1) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.nx - 1) {
                for &s in &self.buckets[ii + jj * self.nx] {
                    let (a, b) = self.segments[s];
                    if (p - project_on_segment(p, a, b)).norm() < r {
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BcKind, BcRule, BoundaryPart, Side};
    use crate::mesh::EdgeClass;

    #[test]
    fn square_grid_counts() {
        let m = generate_square_grid(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 2);
        assert_eq!((m.num_triangles(), m.vertices.len()), (8, 9));
        let m = generate_square_grid(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 1);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.count_class(EdgeClass::Interior), 1);
        let m = generate_square_grid(Point::new(-1.0, -1.0), Point::new(1.0, 1.0), 4);
        assert_eq!(m.num_triangles(), 32);
        assert_eq!(m.edges.iter().filter(|e| e.is_boundary()).count(), 16);
        assert!((m.h() - 2f64.sqrt() * 2.0 / 4.0).abs() < 1e-15);
    }

    fn disc() -> DomainSpec {
        DomainSpec::new(vec![BoundaryPart::new(
            Curve::circle(Point::zeros(), 1.0),
            Side::Inside,
            BcRule::Uniform(BcKind::Dirichlet),
        )])
    }

    #[test]
    fn immersed_disc_matches_sampling_oracle() {
        let d = disc();
        let m = generate_immersed(&d, &ImmersedOptions::new(1.0 / 8.0)).unwrap();
        for v in &m.vertices {
            assert!(d.domain_value(*v) < 0.0);
        }
        // oracle: every background triangle tested at its vertices, edge midpoints and centroid plus 3 interior points
        let h = 1.0 / 8.0;
        let mut count = 0;
        for j in 0..17 {
            for i in 0..17 {
                let o = Point::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                let tris = [
                    [o, o + Point::new(h, 0.0), o + Point::new(h, h)],
                    [o, o + Point::new(h, h), o + Point::new(0.0, h)],
                ];
                for t in tris {
                    let c = (t[0] + t[1] + t[2]) / 3.0;
                    let samples = [
                        t[0],
                        t[1],
                        t[2],
                        0.5 * (t[0] + t[1]),
                        0.5 * (t[1] + t[2]),
                        0.5 * (t[2] + t[0]),
                        c,
                        0.5 * (c + t[0]),
                        0.5 * (c + t[1]),
                        0.5 * (c + t[2]),
                    ];
                    if samples.iter().all(|p| p.norm() < 1.0) {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(m.num_triangles(), count);
    }

    #[test]
    fn immersed_keeps_everything_inside_large_domain() {
        let d = DomainSpec::new(vec![BoundaryPart::new(
            Curve::circle(Point::zeros(), 10.0),
            Side::Inside,
            BcRule::Uniform(BcKind::Dirichlet),
        )]);
        let opts = ImmersedOptions {
            h_b: 0.25,
            origin: Some(Point::new(-1.0, -1.0)),
        };
        let m = generate_immersed(&d, &opts).unwrap();
        // every triangle of the background grid that starts at (-1,-1) and stays within r < 10
        assert!(m.num_triangles() > 0);
        assert!(m.vertices.iter().all(|v| v.norm() < 10.0));
    }

    #[test]
    fn immersed_square_is_inset() {
        let d = DomainSpec::new(vec![BoundaryPart::new(
            Curve::Polygon(crate::geometry::Polygon::rectangle(
                Point::zeros(),
                Point::new(1.0, 1.0),
            )),
            Side::Inside,
            BcRule::Uniform(BcKind::Dirichlet),
        )]);
        let m = generate_immersed(&d, &ImmersedOptions::new(0.25)).unwrap();
        assert_eq!(m.num_triangles(), 8);
        let (lo, hi) = m.vertices.iter().fold(
            (Point::new(9.0, 9.0), Point::new(-9.0, -9.0)),
            |(l, u), p| (l.inf(p), u.sup(p)),
        );
        assert!((lo - Point::new(0.25, 0.25)).norm() < 1e-15);
        assert!((hi - Point::new(0.75, 0.75)).norm() < 1e-15);
    }

    #[test]
    fn empty_immersed_mesh_is_an_error() {
        let d = disc();
        assert!(matches!(
            generate_immersed(&d, &ImmersedOptions::new(5.0)),
            Err(Error::EmptyMesh)
        ));
    }

    #[test]
    fn annulus_nodes_on_circles() {
        let c = Point::new(0.5, 0.5);
        for m in [8, 16, 32] {
            let mesh = generate_annulus(c, 1.0, 2.0, m).unwrap();
            mesh.validate().unwrap();
            for e in mesh.edges.iter().filter(|e| e.is_boundary()) {
                for v in e.vertices {
                    let r = (mesh.vertices[v] - c).norm();
                    assert!((r - 1.0).abs() <= 1e-12 || (r - 2.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn conforming_square_with_ellipse() {
        let d = DomainSpec::new(vec![BoundaryPart::new(
            Curve::Polygon(crate::geometry::Polygon::rectangle(
                Point::new(-1.0, -1.0),
                Point::new(1.0, 1.0),
            )),
            Side::Inside,
            BcRule::Uniform(BcKind::Dirichlet),
        )])
        .with_interface(Curve::ellipse(Point::zeros(), 0.8, 0.4));
        let mut errs = Vec::new();
        for n in [16, 32] {
            let spec = ConformingSpec::from_domain(&d, 2.0 / n as f64).unwrap();
            let m = generate_conforming(&spec).unwrap();
            m.validate().unwrap();
            let a1: f64 = (0..m.num_triangles())
                .filter(|&t| m.regions[t] == Region::One)
                .map(|t| m.area(t))
                .sum();
            errs.push((a1 - std::f64::consts::PI * 0.32).abs());
            assert!((m.total_area() - 4.0).abs() < 1e-12);
            assert!(m.count_class(EdgeClass::Interface) >= 8);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.0, "area error ratio {ratio}");
    }
}
