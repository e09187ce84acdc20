//! Run configuration: a flat `key = value` file, overridden by flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::analysis::{case_with_frame, Ex5Frame, FitMode, ManufacturedCase};
use crate::error::{Error, Result};
use crate::hdg::SolverKind;
use crate::paths::PathStrategy;
use crate::run::LevelOptions;

pub const KEYS: [&str; 10] = [
    "case",
    "k",
    "levels",
    "paths",
    "fit",
    "tol",
    "out",
    "mesh_file",
    "ex5_frame",
    "solver",
];

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected key = value, got '{line}'",
                i + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key '{key}'",
                i + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub degrees: Vec<usize>,
    pub levels: Vec<usize>,
    pub paths: PathStrategy,
    pub fit: FitMode,
    pub tol: f64,
    pub out: PathBuf,
    /// When non-empty, each file is one level and `levels` only labels them.
    pub mesh_files: Vec<PathBuf>,
    pub ex5_frame: Ex5Frame,
    pub solver: SolverKind,
}

impl RunConfig {
    /// Builds a validated configuration; unset keys take the case defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let label = get("case").ok_or_else(|| Error::Config("no case given".into()))?;
        let ex5_frame = get("ex5_frame")
            .map(str::parse)
            .transpose()?
            .unwrap_or_default();
        let case = case_with_frame(label, ex5_frame)?;
        let degrees = match get("k") {
            Some(v) => parse_list("k", v)?,
            None => vec![1],
        };
        let mesh_files: Vec<PathBuf> = get("mesh_file")
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            })
            .unwrap_or_default();
        let levels = match get("levels") {
            Some(v) => parse_list("levels", v)?,
            None if !mesh_files.is_empty() => (1..=mesh_files.len()).collect(),
            None => case.default_levels.clone(),
        };
        let cfg = RunConfig {
            case: case.label.clone(),
            degrees,
            levels,
            paths: get("paths")
                .map(str::parse)
                .transpose()?
                .unwrap_or(case.default_paths),
            fit: get("fit")
                .map(str::parse)
                .transpose()?
                .unwrap_or(case.default_fit),
            tol: match get("tol") {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("tol: cannot parse '{v}'")))?,
                None => 1e-10,
            },
            out: PathBuf::from(get("out").unwrap_or("out")),
            mesh_files,
            ex5_frame,
            solver: get("solver")
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
        };
        cfg.validate(&case)?;
        Ok(cfg)
    }

    pub fn validate(&self, case: &ManufacturedCase) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::Config("no polynomial degree given".into()));
        }
        if let Some(k) = self.degrees.iter().find(|&&k| k > 3) {
            return Err(Error::Config(format!(
                "degree {k} outside the supported range 0..=3"
            )));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("level list is empty".into()));
        }
        if self.levels.contains(&0) {
            return Err(Error::Config("refinement levels must be positive".into()));
        }
        if !self.mesh_files.is_empty() && self.mesh_files.len() != self.levels.len() {
            return Err(Error::Config(format!(
                "{} mesh files but {} levels",
                self.mesh_files.len(),
                self.levels.len()
            )));
        }
        if case.has_interface() && self.fit == FitMode::Immersed {
            return Err(Error::Config(format!(
                "case {} has an interface and requires the interpolated fit",
                case.label
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn manufactured_case(&self) -> Result<ManufacturedCase> {
        case_with_frame(&self.case, self.ex5_frame)
    }

    pub fn level_options(&self, k: usize) -> LevelOptions {
        LevelOptions {
            k,
            fit: self.fit,
            paths: self.paths,
            solver: self.solver,
            tol: self.tol,
            tau_scale: 1.0,
        }
    }
}
