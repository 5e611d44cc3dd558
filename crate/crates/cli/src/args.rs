use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use springrods::experiments::SweepTarget;
use springrods::{ConstraintVariant, PenaltyKind};

use crate::config::{parse_damping, parse_formats, parse_grid, Method, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "springrods",
    version,
    about = "Equilibrium of two elastic rods joined by a nonlinear spring with a non-penetration constraint"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve one equilibrium; prints interface values and writes nodal CSV.
    Solve,
    /// Sweep a spring stiffness over a grid.
    Sweep,
    /// Penalty convergence study along lambda_n = 2^(3-n).
    Converge,
    /// Cross-check the three solvers and the closed-form solution.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Converge => "converge",
            Command::Validate => "validate",
        }
    }
}

/// Flags override values from `--config`, which override the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Configuration file with `key = value` lines (dotted keys)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Left end of rod 1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Right end of rod 2
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Half the natural spring length
    #[arg(long, global = true)]
    pub l: Option<f64>,
    /// Young modulus of rod 1
    #[arg(long, global = true)]
    pub e1: Option<f64>,
    /// Young modulus of rod 2
    #[arg(long, global = true)]
    pub e2: Option<f64>,
    /// Spring stiffness in compression
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k1: Option<f64>,
    /// Spring stiffness in extension
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k2: Option<f64>,
    /// Body force density on rod 1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f1: Option<f64>,
    /// Body force density on rod 2
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f2: Option<f64>,
    /// non-penetration | rigid-compression | rigid-extension | fully-rigid
    #[arg(long, global = true)]
    pub variant: Option<ConstraintVariant>,
    /// Penalty term: compression | extension | two-sided
    #[arg(long, global = true)]
    pub penalty: Option<PenaltyKind>,
    /// Penalty parameter for `solve` (omit for the unpenalized problem)
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// First schedule index for `converge`
    #[arg(long, global = true)]
    pub n_min: Option<u32>,
    /// Last schedule index for `converge`
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
    /// Elements on rod 1
    #[arg(long, global = true)]
    pub n1: Option<usize>,
    /// Elements on rod 2
    #[arg(long, global = true)]
    pub n2: Option<usize>,
    /// exact | projected | qvi
    #[arg(long, global = true)]
    pub method: Option<Method>,
    /// Stopping tolerance of the iterative solvers
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration limit of the iterative solvers
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Fixed-point relaxation: auto or a number in (0, 1]
    #[arg(long, global = true)]
    pub damping: Option<String>,
    /// Parent directory for run outputs
    #[arg(long, global = true)]
    pub outdir: Option<PathBuf>,
    /// Output formats, comma separated: csv,svg
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads for `sweep`
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Coefficient varied by `sweep`: k1 | k2 | both
    #[arg(long, global = true)]
    pub target: Option<SweepTarget>,
    /// Sweep values as start:stop:step or a comma list
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

fn flag_error(flag: &str) -> impl Fn(String) -> CliError + '_ {
    move |message| CliError::Flag {
        flag: flag.into(),
        message,
    }
}

macro_rules! set_if {
    ($cfg:ident, $($field:ident => $target:ident),* $(,)?) => {
        $(if let Some(v) = $field { $cfg.$target = v.clone(); })*
    };
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> Result<(), CliError> {
        let Overrides {
            a,
            b,
            l,
            e1,
            e2,
            k1,
            k2,
            f1,
            f2,
            variant,
            penalty,
            n_min,
            n_max,
            n1,
            n2,
            method,
            tol,
            max_iter,
            outdir,
            jobs,
            target,
            ..
        } = self;
        set_if!(config,
            a => a, b => b, l => l, e1 => e1, e2 => e2, k1 => k1, k2 => k2, f1 => f1, f2 => f2,
            variant => variant, penalty => penalty, n_min => n_min, n_max => n_max,
            n1 => n1, n2 => n2, method => method, tol => tol, max_iter => max_iter,
            outdir => outdir, jobs => jobs, target => sweep_target,
        );
        if self.lambda.is_some() {
            config.lambda = self.lambda;
        }
        if let Some(d) = &self.damping {
            config.damping = parse_damping(d).map_err(flag_error("--damping"))?;
        }
        if let Some(f) = &self.format {
            config.formats = parse_formats(f).map_err(flag_error("--format"))?;
        }
        if let Some(g) = &self.grid {
            config.grid = parse_grid(g).map_err(flag_error("--grid"))?;
        }
        Ok(())
    }

    /// Defaults, then the `--config` file, then the remaining flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut config)?;
        Ok(config)
    }
}
