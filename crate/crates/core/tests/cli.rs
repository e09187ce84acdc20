use std::path::Path;
use std::process::{Command, Output};

use vtkio::model::{Attribute, DataSet, Piece, UnstructuredGridPiece};
use vtkio::Vtk;

use curved_hdg::analysis::CSV_HEADER;
use curved_hdg::cli::vtk::solution_to_vtk;
use curved_hdg::geometry::{
    BcKind, BcRule, BoundaryPart, Curve, DomainSpec, Point, Polygon, Region, Side,
};
use curved_hdg::hdg::{self, HdgOptions, ProblemData};
use curved_hdg::mesh::{generate_square_grid, read_mesh};
use curved_hdg::paths::{build_paths, PathStrategy};
use curved_hdg::postprocess::postprocess;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curved-hdg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn piece(path: &Path) -> UnstructuredGridPiece {
    let vtk = Vtk::import(path).expect("legacy VTK parses");
    match vtk.data {
        DataSet::UnstructuredGrid { mut pieces, .. } => match pieces.remove(0) {
            Piece::Inline(p) => *p,
            _ => panic!("expected inline piece"),
        },
        _ => panic!("expected an unstructured grid"),
    }
}

fn point_array(p: &UnstructuredGridPiece, name: &str) -> Vec<f64> {
    p.data
        .point
        .iter()
        .find_map(|a| match a {
            Attribute::DataArray(d) if d.name == name => d.data.clone().cast_into::<f64>(),
            _ => None,
        })
        .unwrap_or_else(|| panic!("missing point array {name}"))
}

#[test]
fn mesh_command_counts_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sq = dir.path().join("sq.txt");
    let out = bin(&[
        "mesh",
        "--geometry",
        "square",
        "--n",
        "4",
        "--out",
        path_str(&sq),
    ]);
    assert!(out.status.success());
    assert_eq!(read_mesh(&sq).unwrap().num_triangles(), 32);

    let an = dir.path().join("an.txt");
    let out = bin(&[
        "mesh",
        "--geometry",
        "annulus",
        "--fit",
        "interpolated",
        "--nodes",
        "64",
        "--out",
        path_str(&an),
    ]);
    assert!(out.status.success());
    let mesh = read_mesh(&an).unwrap();
    let c = Point::new(0.5, 0.5);
    for e in mesh.edges.iter().filter(|e| e.is_boundary()) {
        for v in e.vertices {
            let r = (mesh.vertices[v] - c).norm();
            assert!((r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12);
        }
    }

    let out = bin(&["mesh", "--geometry", "teapot", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&[
        "mesh",
        "--geometry",
        "square",
        "--n",
        "4",
        "--fit",
        "sideways",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convergence_rejects_bad_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let o = path_str(dir.path());
    for args in [
        vec!["convergence", "--case", "ex1", "--levels", "", "--out", o],
        vec!["convergence", "--case", "ex1", "--k", "5", "--out", o],
        vec![
            "convergence",
            "--case",
            "ex6",
            "--fit",
            "immersed",
            "--out",
            o,
        ],
        vec!["convergence", "--case", "ex12", "--out", o],
        vec!["convergence", "--case", "ex1", "--paths", "p3", "--out", o],
    ] {
        assert_eq!(bin(&args).status.code(), Some(2), "{args:?}");
    }
    let missing = dir.path().join("missing.txt");
    let out = bin(&[
        "convergence",
        "--case",
        "ex4",
        "--mesh-file",
        path_str(&missing),
        "--out",
        o,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn convergence_output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = bin(&[
            "convergence",
            "--case",
            "ex1",
            "--k",
            "1",
            "--levels",
            "4,8,16,32",
            "--out",
            path_str(d.path()),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let csv = std::fs::read_to_string(a.path().join("report.csv")).unwrap();
    assert_eq!(
        csv,
        std::fs::read_to_string(b.path().join("report.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(a.path().join("run.log")).unwrap(),
        std::fs::read(b.path().join("run.log")).unwrap()
    );
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    let last: Vec<&str> = lines[4].split(',').collect();
    let ord_u: f64 = last[3].parse().unwrap();
    assert!((ord_u - 2.0).abs() < 0.2);
    assert_eq!(lines[1].split(',').nth(3), Some(""));

    let mesh_a = a.path().join("m.txt");
    let mesh_b = b.path().join("m.txt");
    for m in [&mesh_a, &mesh_b] {
        assert!(bin(&[
            "mesh",
            "--geometry",
            "kidney",
            "--n",
            "12",
            "--out",
            path_str(m)
        ])
        .status
        .success());
    }
    assert_eq!(
        std::fs::read(mesh_a).unwrap(),
        std::fs::read(mesh_b).unwrap()
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sweep\ncase = ex4\nk = 0\nlevels = 8,16\nfit = interpolated\n",
    )
    .unwrap();
    let out = bin(&[
        "convergence",
        "--config",
        path_str(&cfg),
        "--k",
        "2",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("2,")));
    let log = std::fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.contains("paths: count="));
    assert!(log.contains("conservation_standard="));
}

#[test]
fn solve_writes_parseable_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&[
        "solve",
        "--case",
        "ex8",
        "--k",
        "2",
        "--levels",
        "64",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let file = dir.path().join("ex8_k2_level64.vtk");
    let p = piece(&file);
    let np = p.num_points();
    assert_eq!(np, 3 * p.cells.num_cells());
    for name in ["u_h", "u_star", "q_x", "q_y"] {
        let v = point_array(&p, name);
        assert_eq!(v.len(), np);
        assert!(v.iter().all(|x| x.is_finite()));
    }
    let u = point_array(&p, "u_h");
    let c8 = curved_hdg::analysis::case("ex8").unwrap();
    let pts: Vec<f64> = p.points.clone().cast_into().unwrap();
    for i in (0..np).step_by(97) {
        let x = Point::new(pts[3 * i], pts[3 * i + 1]);
        let exact = c8.u(c8.domain.region_of(x), x);
        assert!((u[i] - exact).abs() < 5e-2 * (1.0 + exact.abs()));
    }

    let out = bin(&[
        "solve",
        "--case",
        "ex4",
        "--k",
        "0,1,2",
        "--levels",
        "12",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(out.status.success());
    for k in 0..3 {
        assert!(dir.path().join(format!("ex4_k{k}_level12.vtk")).exists());
    }
}

struct One;

impl ProblemData for One {
    fn source(&self, _: Region, _: Point) -> f64 {
        0.0
    }
    fn dirichlet(&self, _: Point) -> f64 {
        1.0
    }
}

#[test]
fn constant_field_writes_constant_scalars() {
    let domain = DomainSpec::new(vec![BoundaryPart::new(
        Curve::Polygon(Polygon::rectangle(Point::zeros(), Point::new(1.0, 1.0))),
        Side::Inside,
        BcRule::Uniform(BcKind::Dirichlet),
    )]);
    let mut mesh = generate_square_grid(Point::zeros(), Point::new(1.0, 1.0), 3);
    mesh.classify(&domain).unwrap();
    let paths = build_paths(&mesh, &domain, PathStrategy::P2, 1).unwrap();
    let sol = hdg::solve_problem(&mesh, &domain, &paths, &One, &HdgOptions::new(1)).unwrap();
    let post = postprocess(&sol, &mesh, &domain).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.vtk");
    std::fs::write(&file, solution_to_vtk(&mesh, &sol, &post, "constant")).unwrap();
    let p = piece(&file);
    for name in ["u_h", "u_star"] {
        assert!(point_array(&p, name)
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-12));
    }
    assert!(point_array(&p, "q_x").iter().all(|v| v.abs() < 1e-11));
}

#[test]
fn ex3_p1_cubic_run_completes_and_logs_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&[
        "convergence",
        "--case",
        "ex3",
        "--k",
        "3",
        "--paths",
        "p1",
        "--fit",
        "immersed",
        "--levels",
        "8,16,32",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let log = std::fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.contains("case=ex3 k=3 final orders: u="), "{log}");
    assert_eq!(log.matches("paths: count=").count(), 3);
}
