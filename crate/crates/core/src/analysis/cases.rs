//! Manufactured-solution catalog.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{
    BcKind, BcRule, BoundaryPart, Curve, DomainSpec, Point, Polygon, Region, Side,
};
use crate::hdg::ProblemData;
use crate::mesh::{
    generate_annulus, generate_conforming, generate_immersed, generate_square_grid, ConformingSpec,
    ImmersedOptions, Mesh,
};
use crate::paths::PathStrategy;

pub const CASE_LABELS: [&str; 9] = [
    "ex1", "ex2", "ex3", "ex4", "ex5a", "ex5b", "ex6", "ex7", "ex8",
];

/// Joukowsky airfoil parameters of the exterior-flow cases.
pub const AIRFOIL_R: f64 = 0.1605;
pub const AIRFOIL_S: (f64, f64) = (0.01, 0.01);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Background-grid triangles inside the domain; `d(Γ, Γ_h) = O(h)`.
    Immersed,
    /// Boundary and interface vertices on the curves; `d(Γ, Γ_h) = O(h²)`.
    Interpolated,
}

impl FromStr for FitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "immersed" => Ok(FitMode::Immersed),
            "interpolated" => Ok(FitMode::Interpolated),
            _ => Err(Error::Config(format!(
                "unknown fit mode '{s}' (expected immersed or interpolated)"
            ))),
        }
    }
}

/// Coordinates in which the potential-flow solution of `ex5b` is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ex5Frame {
    /// Polar coordinates of the circle plane, pulled back through the inverse map.
    #[default]
    Preimage,
    /// Polar coordinates taken literally in the airfoil plane.
    Airfoil,
}

impl FromStr for Ex5Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "preimage" => Ok(Ex5Frame::Preimage),
            "airfoil" => Ok(Ex5Frame::Airfoil),
            _ => Err(Error::Config(format!(
                "unknown ex5 frame '{s}' (expected preimage or airfoil)"
            ))),
        }
    }
}

/// How the built-in refinement levels turn into meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    /// Axis-aligned square; the level is the number of cells per side.
    Square,
    /// Annulus; the level is the number of nodes per ring.
    Annulus {
        center: Point,
        r_in: f64,
        r_out: f64,
    },
    /// General curved domain; the level is the number of cells across the bounding box.
    Curved,
}

type ScalarFn = Box<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(Point) -> Point + Send + Sync>;

/// Exact solution on one region.
pub struct Branch {
    pub u: ScalarFn,
    pub grad: VectorFn,
    /// `∇·(K∇u)`.
    pub div_k_grad: ScalarFn,
}

pub struct ManufacturedCase {
    pub label: String,
    pub domain: DomainSpec,
    pub mesh_kind: MeshKind,
    pub default_fit: FitMode,
    pub default_paths: PathStrategy,
    pub default_levels: Vec<usize>,
    branches: [Branch; 2],
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("label", &self.label)
            .field("mesh_kind", &self.mesh_kind)
            .field("default_fit", &self.default_fit)
            .field("default_paths", &self.default_paths)
            .field("default_levels", &self.default_levels)
            .finish()
    }
}

impl ManufacturedCase {
    pub fn has_interface(&self) -> bool {
        self.domain.interface.is_some()
    }

    pub fn u(&self, region: Region, x: Point) -> f64 {
        (self.branches[region.index()].u)(x)
    }

    pub fn grad_u(&self, region: Region, x: Point) -> Point {
        (self.branches[region.index()].grad)(x)
    }

    /// `q = -K∇u`.
    pub fn q(&self, region: Region, x: Point) -> Point {
        -(self.domain.conductivity(region) * self.grad_u(region, x))
    }

    /// `f` with `-∇·q = f`.
    pub fn f(&self, region: Region, x: Point) -> f64 {
        (self.branches[region.index()].div_k_grad)(x)
    }

    /// Builds and classifies the mesh of one refinement level.
    pub fn build_mesh(&self, fit: FitMode, level: usize) -> Result<Mesh> {
        if level == 0 {
            return Err(Error::Config("refinement level must be positive".into()));
        }
        let (lo, hi) = self.domain.bounding_box();
        let width = (hi.x - lo.x).max(hi.y - lo.y);
        let mut mesh = match (fit, self.mesh_kind) {
            (FitMode::Immersed, _) => {
                if self.has_interface() {
                    return Err(Error::Config(
                        "interface cases require the interpolated fit".into(),
                    ));
                }
                generate_immersed(&self.domain, &ImmersedOptions::new(width / level as f64))?
            }
            (FitMode::Interpolated, MeshKind::Square) => generate_square_grid(lo, hi, level),
            (
                FitMode::Interpolated,
                MeshKind::Annulus {
                    center,
                    r_in,
                    r_out,
                },
            ) => generate_annulus(center, r_in, r_out, level)?,
            (FitMode::Interpolated, MeshKind::Curved) => generate_conforming(
                &ConformingSpec::from_domain(&self.domain, width / level as f64)?,
            )?,
        };
        mesh.classify(&self.domain)?;
        Ok(mesh)
    }
}

impl ProblemData for ManufacturedCase {
    fn source(&self, region: Region, x: Point) -> f64 {
        self.f(region, x)
    }

    fn dirichlet(&self, x: Point) -> f64 {
        self.u(self.domain.region_of(x), x)
    }

    fn neumann(&self, x: Point, n: Point) -> f64 {
        self.q(self.domain.region_of(x), x).dot(&n)
    }

    fn jump_value(&self, x: Point) -> f64 {
        self.u(Region::One, x) - self.u(Region::Two, x)
    }

    fn jump_flux(&self, x: Point, n1: Point) -> f64 {
        (self.q(Region::One, x) - self.q(Region::Two, x)).dot(&n1)
    }
}

fn sin_sin() -> Branch {
    Branch {
        u: Box::new(|x| x.x.sin() * x.y.sin()),
        grad: Box::new(|x| Point::new(x.x.cos() * x.y.sin(), x.x.sin() * x.y.cos())),
        div_k_grad: Box::new(|x| -2.0 * x.x.sin() * x.y.sin()),
    }
}

fn exp_cos() -> Branch {
    Branch {
        u: Box::new(|x| x.x.exp() * x.y.cos()),
        grad: Box::new(|x| Point::new(x.x.exp() * x.y.cos(), -x.x.exp() * x.y.sin())),
        div_k_grad: Box::new(|_| 0.0),
    }
}

fn sin_pi() -> Branch {
    Branch {
        u: Box::new(|x| (PI * x.x).sin() * (PI * x.y).sin()),
        grad: Box::new(|x| {
            Point::new(
                PI * (PI * x.x).cos() * (PI * x.y).sin(),
                PI * (PI * x.x).sin() * (PI * x.y).cos(),
            )
        }),
        div_k_grad: Box::new(|x| -2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin()),
    }
}

/// `u = r⁵/κ + shift`, so that `κ∇u` does not depend on `κ`.
fn thermal(kappa: f64, shift: f64) -> Branch {
    Branch {
        u: Box::new(move |x| x.norm_squared().powf(2.5) / kappa + shift),
        grad: Box::new(move |x| x * (5.0 * x.norm_squared().powf(1.5) / kappa)),
        div_k_grad: Box::new(|x| 25.0 * x.norm_squared().powf(1.5)),
    }
}

fn potential_flow(frame: Ex5Frame) -> Result<Branch> {
    let r2 = AIRFOIL_R * AIRFOIL_R;
    Ok(match frame {
        Ex5Frame::Airfoil => Branch {
            u: Box::new(move |x| x.x * (1.0 + r2 / x.norm_squared())),
            grad: Box::new(move |x| {
                let s = x.norm_squared();
                Point::new(
                    1.0 + r2 / s - 2.0 * r2 * x.x * x.x / (s * s),
                    -2.0 * r2 * x.x * x.y / (s * s),
                )
            }),
            div_k_grad: Box::new(|_| 0.0),
        },
        Ex5Frame::Preimage => {
            let Curve::Airfoil(a) = Curve::joukowsky_airfoil(AIRFOIL_R, AIRFOIL_S.0, AIRFOIL_S.1)?
            else {
                unreachable!()
            };
            let a2 = a.clone();
            // u = Re F(w) with F = ζ + R²/ζ, ζ = J⁻¹(w) - c
            Branch {
                u: Box::new(move |x| {
                    let zeta = a.inverse(Complex64::new(x.x, x.y)) - a.center();
                    (zeta + r2 / zeta).re
                }),
                grad: Box::new(move |x| {
                    let z = a2.inverse(Complex64::new(x.x, x.y));
                    let zeta = z - a2.center();
                    let d = (1.0 - r2 / (zeta * zeta)) / a2.map_derivative(z);
                    Point::new(d.re, -d.im)
                }),
                div_k_grad: Box::new(|_| 0.0),
            }
        }
    })
}

fn dirichlet(curve: Curve, side: Side) -> BoundaryPart {
    BoundaryPart::new(curve, side, BcRule::Uniform(BcKind::Dirichlet))
}

fn neumann(curve: Curve, side: Side) -> BoundaryPart {
    BoundaryPart::new(curve, side, BcRule::Uniform(BcKind::Neumann))
}

fn unit_box() -> Curve {
    Curve::Polygon(Polygon::rectangle(
        Point::new(-1.0, -1.0),
        Point::new(1.0, 1.0),
    ))
}

/// Catalog entry; `ex5b` uses the pre-image frame.
pub fn case(label: &str) -> Result<ManufacturedCase> {
    case_with_frame(label, Ex5Frame::default())
}

pub fn case_with_frame(label: &str, frame: Ex5Frame) -> Result<ManufacturedCase> {
    let same = |b: fn() -> Branch| [b(), b()];
    let c = match label {
        "ex1" => ManufacturedCase {
            label: label.into(),
            domain: DomainSpec::new(vec![BoundaryPart::new(
                Curve::Polygon(Polygon::rectangle(Point::zeros(), Point::new(1.0, 1.0))),
                Side::Inside,
                BcRule::NeumannOnSegment {
                    a: Point::zeros(),
                    b: Point::new(0.0, 1.0),
                },
            )]),
            mesh_kind: MeshKind::Square,
            default_fit: FitMode::Immersed,
            default_paths: PathStrategy::P2,
            default_levels: vec![4, 8, 16, 32],
            branches: same(sin_sin),
        },
        "ex2" => ManufacturedCase {
            label: label.into(),
            domain: DomainSpec::new(vec![
                neumann(Curve::circle(Point::zeros(), 20.0), Side::Inside),
                dirichlet(Curve::circle(Point::zeros(), 14.0), Side::Outside),
            ]),
            mesh_kind: MeshKind::Annulus {
                center: Point::zeros(),
                r_in: 14.0,
                r_out: 20.0,
            },
            default_fit: FitMode::Interpolated,
            default_paths: PathStrategy::P2,
            default_levels: vec![64, 128, 256, 512],
            branches: same(sin_sin),
        },
        "ex3" => ManufacturedCase {
            label: label.into(),
            domain: DomainSpec::new(vec![
                neumann(Curve::circle(Point::new(0.5, 0.5), 1.0), Side::Inside),
                dirichlet(Curve::circle(Point::new(0.5, 0.5), 0.25), Side::Outside),
            ]),
            mesh_kind: MeshKind::Annulus {
                center: Point::new(0.5, 0.5),
                r_in: 0.25,
                r_out: 1.0,
            },
            default_fit: FitMode::Immersed,
            default_paths: PathStrategy::P1,
            default_levels: vec![8, 16, 32, 64, 128],
            branches: same(sin_sin),
        },
        "ex4" => ManufacturedCase {
            label: label.into(),
            domain: DomainSpec::new(vec![
                dirichlet(Curve::circle(Point::new(0.5, 0.5), 2.0), Side::Inside),
                neumann(Curve::circle(Point::new(0.5, 0.5), 1.0), Side::Outside),
            ]),
            mesh_kind: MeshKind::Annulus {
                center: Point::new(0.5, 0.5),
                r_in: 1.0,
                r_out: 2.0,
            },
            default_fit: FitMode::Interpolated,
            default_paths: PathStrategy::P2,
            default_levels: vec![8, 16, 32, 64],
            branches: same(sin_sin),
        },
        "ex5a" | "ex5b" => {
            let airfoil = Curve::joukowsky_airfoil(AIRFOIL_R, AIRFOIL_S.0, AIRFOIL_S.1)?;
            ManufacturedCase {
                label: label.into(),
                domain: DomainSpec::new(vec![
                    dirichlet(unit_box(), Side::Inside),
                    neumann(airfoil, Side::Outside),
                ]),
                mesh_kind: MeshKind::Curved,
                default_fit: FitMode::Interpolated,
                default_paths: PathStrategy::P2,
                default_levels: vec![16, 32, 64],
                branches: if label == "ex5a" {
                    same(sin_sin)
                } else {
                    [potential_flow(frame)?, potential_flow(frame)?]
                },
            }
        }
        "ex6" | "ex7" => ManufacturedCase {
            label: label.into(),
            domain: DomainSpec::new(vec![dirichlet(unit_box(), Side::Inside)]).with_interface(
                if label == "ex6" {
                    Curve::ellipse(Point::zeros(), 0.8, 0.4)
                } else {
                    Curve::kidney()
                },
            ),
            mesh_kind: MeshKind::Curved,
            default_fit: FitMode::Interpolated,
            default_paths: PathStrategy::P2,
            default_levels: vec![8, 16, 32, 64],
            branches: [exp_cos(), sin_pi()],
        },
        "ex8" => {
            let (k1, k2, r) = (1.0, 100.0, 0.5f64);
            ManufacturedCase {
                label: label.into(),
                domain: DomainSpec::new(vec![dirichlet(unit_box(), Side::Inside)])
                    .with_interface(Curve::circle(Point::zeros(), r))
                    .with_conductivity(Matrix2::identity() * k1, Matrix2::identity() * k2),
                mesh_kind: MeshKind::Curved,
                default_fit: FitMode::Interpolated,
                default_paths: PathStrategy::P2,
                default_levels: vec![8, 16, 32, 64],
                branches: [
                    thermal(k1, 0.0),
                    thermal(k2, (1.0 / k1 - 1.0 / k2) * r.powi(5)),
                ],
            }
        }
        _ => return Err(Error::UnknownCase(label.to_string())),
    };
    Ok(c)
}
