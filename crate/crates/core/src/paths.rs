//! Transfer paths from the computational boundary and interface to the true
//! curves, and the edge charts they induce.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{Curve, DomainSpec, Point};
use crate::mesh::{nearest_boundary_part, EdgeClass, Mesh};
use crate::quadrature::edge_rule;

/// Paths longer than this multiple of `h_K` are reported.
pub const WARN_RATIO: f64 = 2.0;
/// Paths at least this multiple of `h_K` long are rejected.
pub const ERROR_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStrategy {
    /// Closest-point vertex paths, convex combination along the edge.
    P1,
    /// Paths along the edge normal.
    P2,
}

impl FromStr for PathStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(PathStrategy::P1),
            "p2" => Ok(PathStrategy::P2),
            _ => Err(Error::Config(format!(
                "unknown path strategy '{s}' (expected p1 or p2)"
            ))),
        }
    }
}

/// Straight segment from a computational point to its true-curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPath {
    pub origin: Point,
    pub end: Point,
}

impl TransferPath {
    pub fn new(origin: Point, end: Point) -> Self {
        TransferPath { origin, end }
    }

    pub fn length(&self) -> f64 {
        (self.end - self.origin).norm()
    }

    /// Unit tangent from origin to end (zero for a zero-length path).
    pub fn tangent(&self) -> Point {
        let d = self.end - self.origin;
        let l = d.norm();
        if l > 0.0 {
            d / l
        } else {
            Point::zeros()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Boundary(usize),
    Interface,
}

/// Paths of one edge: at its two vertices and at the edge quadrature points.
#[derive(Debug, Clone)]
pub struct EdgePaths {
    pub edge: usize,
    pub target: Target,
    /// Quadrature parameters on [0, 1], measured from `vertices[0]` of the edge.
    pub thetas: Vec<f64>,
    pub samples: Vec<TransferPath>,
    pub vertices: [TransferPath; 2],
}

impl EdgePaths {
    /// Chart images `phi(theta)` at the quadrature parameters.
    pub fn chart(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples.iter().map(|p| p.end)
    }

    pub fn all_paths(&self) -> impl Iterator<Item = (f64, &TransferPath)> + '_ {
        std::iter::once((0.0, &self.vertices[0]))
            .chain(self.thetas.iter().copied().zip(self.samples.iter()))
            .chain(std::iter::once((1.0, &self.vertices[1])))
    }

    /// Checks that consecutive chart images advance along the edge direction.
    pub fn check_monotone(&self, direction: Point) -> Result<()> {
        let pts: Vec<Point> = self.all_paths().map(|(_, p)| p.end).collect();
        for w in pts.windows(2) {
            if (w[1] - w[0]).dot(&direction) <= 0.0 {
                return Err(Error::FoldBack { edge: self.edge });
            }
        }
        Ok(())
    }

    pub fn max_length(&self) -> f64 {
        self.all_paths()
            .map(|(_, p)| p.length())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PathFamily {
    pub strategy: PathStrategy,
    /// Indexed by edge; `None` for interior edges.
    pub edges: Vec<Option<EdgePaths>>,
    pub warnings: Vec<String>,
}

impl PathFamily {
    pub fn get(&self, edge: usize) -> Option<&EdgePaths> {
        self.edges.get(edge).and_then(|e| e.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &EdgePaths> {
        self.edges.iter().flatten()
    }

    /// CSV dump `edge_id,theta,x,y,xbar,ybar,length`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("edge_id,theta,x,y,xbar,ybar,length\n");
        for ep in self.iter() {
            for (theta, p) in ep.all_paths() {
                writeln!(
                    s,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    ep.edge,
                    theta,
                    p.origin.x,
                    p.origin.y,
                    p.end.x,
                    p.end.y,
                    p.length()
                )
                .unwrap();
            }
        }
        s
    }
}

fn target_curve(domain: &DomainSpec, target: Target) -> &Curve {
    match target {
        Target::Boundary(i) => &domain.boundary[i].curve,
        Target::Interface => domain
            .interface
            .as_ref()
            .expect("interface edges require an interface curve"),
    }
}

fn edge_target(mesh: &Mesh, domain: &DomainSpec, e: usize) -> Result<Option<Target>> {
    Ok(match mesh.edges[e].class {
        EdgeClass::Interior => None,
        EdgeClass::Interface => {
            if domain.interface.is_none() {
                return Err(Error::InvariantViolation(format!(
                    "interface edge {e} but the domain has no interface curve"
                )));
            }
            Some(Target::Interface)
        }
        EdgeClass::Dirichlet | EdgeClass::Neumann => {
            let (a, b) = mesh.edge_points(e);
            Some(Target::Boundary(nearest_boundary_part(
                domain,
                0.5 * (a + b),
            )?))
        }
    })
}

fn edge_scale(mesh: &Mesh, e: usize) -> f64 {
    let edge = &mesh.edges[e];
    let mut h = mesh.diameter(edge.elements[0]);
    if !edge.is_boundary() {
        h = h.max(mesh.diameter(edge.elements[1]));
    }
    h
}

/// Builds one path per boundary/interface vertex and per edge quadrature
/// point (`k + 3` Gauss points).
pub fn build_paths(
    mesh: &Mesh,
    domain: &DomainSpec,
    strategy: PathStrategy,
    k: usize,
) -> Result<PathFamily> {
    let thetas = edge_rule(k).points;
    let mut warnings = Vec::new();
    let mut edges: Vec<Option<EdgePaths>> = vec![None; mesh.num_edges()];
    let targets: Vec<Option<Target>> = (0..mesh.num_edges())
        .map(|e| edge_target(mesh, domain, e))
        .collect::<Result<_>>()?;

    match strategy {
        PathStrategy::P2 => {
            for e in 0..mesh.num_edges() {
                let Some(target) = targets[e] else { continue };
                let curve = target_curve(domain, target);
                let (a, b) = mesh.edge_points(e);
                let n = mesh.edge_normal(e);
                let t_max = WARN_RATIO * edge_scale(mesh, e);
                let mut path_at = |theta: f64| -> Result<TransferPath> {
                    let x = a + (b - a) * theta;
                    match curve.line_intersection(x, n, t_max) {
                        Ok(end) => Ok(TransferPath::new(x, end)),
                        Err(_) => {
                            let (end, _) = curve.closest_point(x)?;
                            let msg = format!(
                                "edge {e}: normal line at theta={theta:.4} misses the curve within {t_max:.3e}; using the closest point"
                            );
                            warn!("{msg}");
                            warnings.push(msg);
                            Ok(TransferPath::new(x, end))
                        }
                    }
                };
                let v0 = path_at(0.0)?;
                let v1 = path_at(1.0)?;
                let samples = thetas
                    .iter()
                    .map(|&t| path_at(t))
                    .collect::<Result<Vec<_>>>()?;
                edges[e] = Some(EdgePaths {
                    edge: e,
                    target,
                    thetas: thetas.clone(),
                    samples,
                    vertices: [v0, v1],
                });
            }
        }
        PathStrategy::P1 => {
            let mut endpoint: HashMap<(usize, Target), Point> = HashMap::new();
            for e in 0..mesh.num_edges() {
                let Some(target) = targets[e] else { continue };
                let curve = target_curve(domain, target);
                for v in mesh.edges[e].vertices {
                    if let std::collections::hash_map::Entry::Vacant(slot) =
                        endpoint.entry((v, target))
                    {
                        let (p, _) = curve.closest_point(mesh.vertices[v])?;
                        slot.insert(p);
                    }
                }
            }
            // repair sweep: crossing vertex paths of one edge are replaced by normal rays
            let crossing =
                |endpoint: &HashMap<(usize, Target), Point>, e: usize, target: Target| {
                    let [va, vb] = mesh.edges[e].vertices;
                    let pa = TransferPath::new(mesh.vertices[va], endpoint[&(va, target)]);
                    let pb = TransferPath::new(mesh.vertices[vb], endpoint[&(vb, target)]);
                    segments_cross(&pa, &pb)
                };
            for e in 0..mesh.num_edges() {
                let Some(target) = targets[e] else { continue };
                if !crossing(&endpoint, e, target) {
                    continue;
                }
                let curve = target_curve(domain, target);
                let n = mesh.edge_normal(e);
                let t_max = WARN_RATIO * edge_scale(mesh, e);
                for v in mesh.edges[e].vertices {
                    if let Ok(p) = curve.line_intersection(mesh.vertices[v], n, t_max) {
                        endpoint.insert((v, target), p);
                    }
                }
                let msg = format!("edge {e}: crossing closest-point paths replaced by normal rays");
                warn!("{msg}");
                warnings.push(msg);
            }
            let mut bad = Vec::new();
            for e in 0..mesh.num_edges() {
                let Some(target) = targets[e] else { continue };
                if crossing(&endpoint, e, target) {
                    let [va, vb] = mesh.edges[e].vertices;
                    bad.push((va, vb));
                }
            }
            if !bad.is_empty() {
                return Err(Error::CrossingUnrepairable { pairs: bad });
            }
            for e in 0..mesh.num_edges() {
                let Some(target) = targets[e] else { continue };
                let [va, vb] = mesh.edges[e].vertices;
                let (a, b) = (mesh.vertices[va], mesh.vertices[vb]);
                let (da, db) = (endpoint[&(va, target)] - a, endpoint[&(vb, target)] - b);
                let path_at = |theta: f64| {
                    let x = a + (b - a) * theta;
                    TransferPath::new(x, x + da * (1.0 - theta) + db * theta)
                };
                edges[e] = Some(EdgePaths {
                    edge: e,
                    target,
                    thetas: thetas.clone(),
                    samples: thetas.iter().map(|&t| path_at(t)).collect(),
                    vertices: [TransferPath::new(a, a + da), TransferPath::new(b, b + db)],
                });
            }
        }
    }

    for ep in edges.iter().flatten() {
        let h = edge_scale(mesh, ep.edge);
        let ratio = ep.max_length() / h;
        if ratio >= ERROR_RATIO {
            return Err(Error::PathTooLong {
                edge: ep.edge,
                ratio,
            });
        }
        if ratio > WARN_RATIO {
            let msg = format!("edge {}: transfer path of length {:.2} h_K", ep.edge, ratio);
            warn!("{msg}");
            warnings.push(msg);
        }
        if matches!(
            mesh.edges[ep.edge].class,
            EdgeClass::Neumann | EdgeClass::Interface
        ) {
            let (a, b) = mesh.edge_points(ep.edge);
            ep.check_monotone(b - a)?;
        }
    }
    Ok(PathFamily {
        strategy,
        edges,
        warnings,
    })
}

/// Proper intersection of two path segments (shared origins and touching
/// endpoints do not count).
fn segments_cross(p: &TransferPath, q: &TransferPath) -> bool {
    if p.length() == 0.0 || q.length() == 0.0 || p.origin == q.origin {
        return false;
    }
    let orient = |a: Point, b: Point, c: Point| {
        let v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        let scale = (b - a).norm() * (c - a).norm();
        if v.abs() <= 1e-14 * scale {
            0.0
        } else {
            v.signum()
        }
    };
    let d1 = orient(q.origin, q.end, p.origin);
    let d2 = orient(q.origin, q.end, p.end);
    let d3 = orient(p.origin, p.end, q.origin);
    let d4 = orient(p.origin, p.end, q.end);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathDiagnostics {
    pub num_paths: usize,
    /// Largest `|sigma| / h_K` over all paths.
    pub max_ratio: f64,
    /// Paths longer than `WARN_RATIO * h_K`.
    pub long_paths: usize,
    /// Pairs of paths whose segments cross.
    pub crossings: usize,
    /// Paths that cross their target curve before reaching their endpoint.
    pub wrong_region: usize,
}

/// Geometric report on a path family; never modifies it.
pub fn validate_paths(family: &PathFamily, mesh: &Mesh, domain: &DomainSpec) -> PathDiagnostics {
    let mut d = PathDiagnostics::default();
    let mut segs: Vec<TransferPath> = Vec::new();
    for ep in family.iter() {
        let h = edge_scale(mesh, ep.edge);
        let curve = target_curve(domain, ep.target);
        for (_, p) in ep.all_paths() {
            d.num_paths += 1;
            let r = p.length() / h;
            d.max_ratio = d.max_ratio.max(r);
            if r > WARN_RATIO {
                d.long_paths += 1;
            }
            if p.length() > 0.0 {
                segs.push(*p);
                let (mut pos, mut neg) = (false, false);
                for i in 1..16 {
                    let f = curve.implicit_value(p.origin + (p.end - p.origin) * (i as f64 / 16.0));
                    let tol = 1e-12 * (1.0 + p.length());
                    pos |= f > tol;
                    neg |= f < -tol;
                }
                if pos && neg {
                    d.wrong_region += 1;
                }
            }
        }
    }
    segs.sort_by(|a, b| {
        a.origin
            .x
            .min(a.end.x)
            .partial_cmp(&b.origin.x.min(b.end.x))
            .unwrap()
    });
    segs.dedup();
    for i in 0..segs.len() {
        let xmax = segs[i].origin.x.max(segs[i].end.x);
        for j in i + 1..segs.len() {
            if segs[j].origin.x.min(segs[j].end.x) > xmax {
                break;
            }
            if segments_cross(&segs[i], &segs[j]) {
                d.crossings += 1;
            }
        }
    }
    d
}
