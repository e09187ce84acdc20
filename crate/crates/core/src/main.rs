use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curved_hdg::analysis::FitMode;
use curved_hdg::cli::{self, parse_key_values, RunConfig};
use curved_hdg::{Error, Result};

#[derive(Parser)]
#[command(
    name = "curved-hdg",
    version,
    about = "HDG solver for curved domains and interfaces on straight-triangle meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refinement sweep; writes report.csv and run.log
    Convergence(RunArgs),
    /// Single level; writes one VTK file per degree
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Level to solve (defaults to the first configured level)
        #[arg(long)]
        level: Option<usize>,
    },
    /// Generate a mesh file
    Mesh(MeshArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// ex1 .. ex8 (ex5a, ex5b)
    #[arg(long)]
    case: Option<String>,
    /// Polynomial degree(s), comma separated
    #[arg(long)]
    k: Option<String>,
    /// Refinement levels, comma separated
    #[arg(long)]
    levels: Option<String>,
    /// p1 or p2
    #[arg(long)]
    paths: Option<String>,
    /// immersed or interpolated
    #[arg(long)]
    fit: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// condensed or monolithic
    #[arg(long)]
    solver: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Mesh file(s), comma separated, one per level
    #[arg(long)]
    mesh_file: Option<String>,
    /// preimage or airfoil
    #[arg(long)]
    ex5_frame: Option<String>,
}

#[derive(Args)]
struct MeshArgs {
    /// square, wide-annulus, ring, annulus, airfoil, ellipse, kidney, circle
    #[arg(long)]
    geometry: String,
    /// Subdivisions per bounding-box side (nodes per ring for annuli)
    #[arg(long, conflicts_with = "nodes")]
    n: Option<usize>,
    /// Alias of --n
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value = "interpolated")]
    fit: String,
    /// Output file
    #[arg(long, default_value = "mesh.txt")]
    out: PathBuf,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("case", &self.case),
            ("k", &self.k),
            ("levels", &self.levels),
            ("paths", &self.paths),
            ("fit", &self.fit),
            ("tol", &self.tol),
            ("solver", &self.solver),
            ("out", &self.out),
            ("mesh_file", &self.mesh_file),
            ("ex5_frame", &self.ex5_frame),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        RunConfig::from_map(&map)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Convergence(args) => {
            let cfg = args.resolve()?;
            let reports = cli::cmd_convergence(&cfg)?;
            for r in &reports {
                print!("{}", r.csv_rows());
            }
            eprintln!("wrote {}", cfg.out.join("report.csv").display());
        }
        Command::Solve { run, level } => {
            let cfg = run.resolve()?;
            for f in cli::cmd_solve(&cfg, level)? {
                println!("{}", f.display());
            }
        }
        Command::Mesh(args) => {
            let n = args
                .n
                .or(args.nodes)
                .ok_or_else(|| Error::Config("mesh needs --n or --nodes".into()))?;
            let fit: FitMode = args.fit.parse()?;
            let mesh = cli::cmd_mesh(&args.geometry, n, fit)?;
            cli::write_mesh_file(&mesh, &args.out)?;
            println!(
                "{}: {} vertices, {} triangles, h={:.6e}",
                args.out.display(),
                mesh.vertices.len(),
                mesh.num_triangles(),
                mesh.h()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
