//! Run configuration: benchmark defaults, a flat `key = value` file with dotted
//! keys, and command-line overrides applied on top.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use springrods::experiments::SweepTarget;
use springrods::solver::Damping;
use springrods::{
    BodyForce, ConstraintVariant, Geometry, Material, PenaltyKind, ProblemSpecF64, SpringLaw,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Projected,
    Qvi,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "projected" | "projected-gradient" | "pg" => Ok(Method::Projected),
            "qvi" | "fixed-point" => Ok(Method::Qvi),
            other => Err(format!("unknown method `{other}` (expected exact, projected or qvi)")),
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Projected => "projected",
            Method::Qvi => "qvi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Svg,
}

/// Comma-separated list of `csv` and `svg`.
pub fn parse_formats(s: &str) -> Result<Vec<Format>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f = match part.to_ascii_lowercase().as_str() {
            "csv" => Format::Csv,
            "svg" => Format::Svg,
            other => return Err(format!("unknown format `{other}` (expected csv or svg)")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// `start:stop:step` or a comma-separated list of stiffness values.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{s}` must have the form start:stop:step"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(stop >= start) {
            return Err(format!("range `{s}` needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // round to 12 digits so 0.1 steps print as 0.3, not 0.30000000000000004
        Ok((0..=count)
            .map(|i| {
                let v = start + step * i as f64;
                (v * 1e12).round() / 1e12
            })
            .collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect()
    }
}

pub fn parse_damping(s: &str) -> Result<Damping<f64>, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("auto") {
        Ok(Damping::Auto)
    } else {
        s.parse::<f64>()
            .map(Damping::Fixed)
            .map_err(|e| format!("`{s}`: {e} (expected auto or a number in (0, 1])"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub e1: f64,
    pub e2: f64,
    pub k1: f64,
    pub k2: f64,
    pub f1: f64,
    pub f2: f64,
    pub variant: ConstraintVariant,
    pub penalty: PenaltyKind,
    /// Penalty parameter for `solve`; `None` solves the unpenalized problem.
    pub lambda: Option<f64>,
    pub n_min: u32,
    pub n_max: u32,
    pub n1: usize,
    pub n2: usize,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: Damping<f64>,
    pub outdir: PathBuf,
    pub formats: Vec<Format>,
    pub jobs: usize,
    pub sweep_target: SweepTarget,
    pub grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: -1.0,
            b: 1.0,
            l: 0.5,
            e1: 1.0,
            e2: 1.0,
            k1: 1.0,
            k2: 1.0,
            f1: 0.0,
            f2: 0.0,
            variant: ConstraintVariant::NonPenetration,
            penalty: PenaltyKind::CompressionOnly,
            lambda: None,
            n_min: 1,
            n_max: 12,
            n1: 8,
            n2: 8,
            method: Method::Exact,
            tol: 1e-8,
            max_iter: 100_000,
            damping: Damping::Auto,
            outdir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
            jobs: 1,
            sweep_target: SweepTarget::K1,
            grid: springrods::experiments::default_stiffness_grid(),
        }
    }
}

/// Keys accepted in configuration files.
pub const KEYS: &[&str] = &[
    "geometry.a",
    "geometry.b",
    "geometry.l",
    "material.e1",
    "material.e2",
    "spring.k1",
    "spring.k2",
    "forces.f1",
    "forces.f2",
    "constraint.variant",
    "penalty.kind",
    "penalty.lambda",
    "penalty.n_min",
    "penalty.n_max",
    "mesh.n1",
    "mesh.n2",
    "solver.method",
    "solver.tol",
    "solver.max_iter",
    "solver.damping",
    "output.dir",
    "output.format",
    "run.jobs",
    "sweep.target",
    "sweep.grid",
];

fn parsed<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

impl RunConfig {
    /// Sets one dotted key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "geometry.a" => self.a = parsed(v)?,
            "geometry.b" => self.b = parsed(v)?,
            "geometry.l" => self.l = parsed(v)?,
            "material.e1" => self.e1 = parsed(v)?,
            "material.e2" => self.e2 = parsed(v)?,
            "spring.k1" => self.k1 = parsed(v)?,
            "spring.k2" => self.k2 = parsed(v)?,
            "forces.f1" => self.f1 = parsed(v)?,
            "forces.f2" => self.f2 = parsed(v)?,
            "constraint.variant" => self.variant = parsed(v)?,
            "penalty.kind" => self.penalty = parsed(v)?,
            "penalty.lambda" => self.lambda = Some(parsed(v)?),
            "penalty.n_min" => self.n_min = parsed(v)?,
            "penalty.n_max" => self.n_max = parsed(v)?,
            "mesh.n1" => self.n1 = parsed(v)?,
            "mesh.n2" => self.n2 = parsed(v)?,
            "solver.method" => self.method = parsed(v)?,
            "solver.tol" => self.tol = parsed(v)?,
            "solver.max_iter" => self.max_iter = parsed(v)?,
            "solver.damping" => self.damping = parse_damping(v)?,
            "output.dir" => self.outdir = PathBuf::from(v),
            "output.format" => self.formats = parse_formats(v)?,
            "run.jobs" => self.jobs = parsed(v)?,
            "sweep.target" => self.sweep_target = parsed(v)?,
            "sweep.grid" => self.grid = parse_grid(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Applies the lines of a configuration file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse {
                    line: i + 1,
                    key: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            self.set(key, value).map_err(|message| CliError::Parse {
                line: i + 1,
                key: key.to_string(),
                message,
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn forces(&self) -> Result<BodyForce<f64>, CliError> {
        Ok(BodyForce::new(self.f1, self.f2)?)
    }

    /// Validated problem instance; model errors become validation errors.
    pub fn problem(&self) -> Result<ProblemSpecF64, CliError> {
        let geometry = Geometry::new(self.a, self.b, self.l)?;
        let spec = ProblemSpecF64::new(
            geometry,
            Material::new(self.e1, self.e2)?,
            SpringLaw::new(self.k1, self.k2, geometry.natural_length())?,
            self.forces()?,
            self.variant,
        )?;
        if self.n1 == 0 || self.n2 == 0 {
            return Err(CliError::Validation(format!(
                "mesh needs at least one element per rod (n1 = {}, n2 = {})",
                self.n1, self.n2
            )));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Validation(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(CliError::Validation("max-iter must be at least 1".into()));
        }
        if let Some(lambda) = self.lambda {
            if !(lambda > 0.0) {
                return Err(CliError::Validation(format!("lambda must be positive, got {lambda}")));
            }
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(CliError::Validation(format!(
                "penalty range needs 1 <= n_min <= n_max, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        Ok(spec)
    }
}

/// Parses a configuration file's text on top of the benchmark defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    config.apply_text(text)?;
    Ok(config)
}
