use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use springrods::experiments::{
    export_convergence_csv, export_convergence_svg, export_sweep_csv, export_sweep_svg, format_number,
    run_penalty_convergence, run_stiffness_sweep, ConvergencePanel, ConvergenceSetup, SweepConfig, SweepPanel,
};
use springrods::oracle::analytic_solution;
use springrods::solver::{
    solve_exact, solve_penalized, solve_projected_gradient, solve_qvi_fixed_point,
};
use springrods::{
    ConstraintVariant, DiscreteSystemF64, EquilibriumSolutionF64, Mesh, PenaltyLaw, PenaltyProblemF64,
    ProblemSpecF64, SolverConfigF64,
};

use crate::args::Command;
use crate::config::{Format, Method, RunConfig};
use crate::CliError;

/// Largest pairwise deviation `validate` accepts.
pub const VALIDATE_LIMIT: f64 = 1e-6;

/// What a command produced besides its stdout text.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub run_dir: Option<PathBuf>,
    /// Written files, relative to `run_dir`.
    pub files: Vec<String>,
    /// Non-fatal diagnostics for stderr.
    pub warnings: Vec<String>,
    /// A check that ran to completion but failed; the process exits 1.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(run_dir: Option<PathBuf>) -> Self {
        Self {
            run_dir,
            files: Vec::new(),
            warnings: Vec::new(),
            failure: None,
        }
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Creates `<outdir>/<name>-<timestamp>`, adding `-2`, `-3`, … on collision.
pub fn create_run_dir(outdir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(outdir).map_err(io_error(outdir))?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S").to_string();
    let base = format!("{name}-{stamp}");
    for i in 1.. {
        let dir = if i == 1 {
            outdir.join(&base)
        } else {
            outdir.join(format!("{base}-{i}"))
        };
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(io_error(&dir)(e)),
        }
    }
    unreachable!("run directory suffixes exhausted")
}

fn system(config: &RunConfig, spec: &ProblemSpecF64) -> Result<DiscreteSystemF64, CliError> {
    let mesh = Mesh::uniform(spec.geometry(), config.n1, config.n2)?;
    Ok(DiscreteSystemF64::assemble(&mesh, spec.material(), spec.forces()))
}

fn solver_config(config: &RunConfig) -> SolverConfigF64 {
    SolverConfigF64::default()
        .with_tolerance(config.tol)
        .with_max_iterations(config.max_iter)
        .with_damping(config.damping)
}

fn write_file(dir: &Path, name: &str, contents: &str, outcome: &mut Outcome) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io_error(&path))?;
    outcome.files.push(name.into());
    Ok(())
}

fn solve_configured(
    config: &RunConfig,
    spec: &ProblemSpecF64,
    sys: &DiscreteSystemF64,
) -> Result<EquilibriumSolutionF64, CliError> {
    let penalty = match config.lambda {
        Some(lambda) => {
            let law = PenaltyLaw::new(config.penalty, spec.geometry().natural_length());
            Some(PenaltyProblemF64::new(law, lambda)?)
        }
        None => None,
    };
    // the penalized problem always lives on the non-penetration set
    let variant = if penalty.is_some() {
        ConstraintVariant::NonPenetration
    } else {
        spec.variant()
    };
    let sol = match (config.method, &penalty) {
        (Method::Exact, None) => solve_exact(&sys.schur_reduce()?, spec.spring(), variant)?,
        (Method::Exact, Some(pen)) => solve_penalized(&sys.schur_reduce()?, spec.spring(), pen)?,
        (Method::Projected, pen) => {
            solve_projected_gradient(sys, spec.spring(), variant, pen.as_ref(), &solver_config(config))?
        }
        (Method::Qvi, None) => solve_qvi_fixed_point(sys, spec.spring(), variant, &solver_config(config))?,
        (Method::Qvi, Some(_)) => {
            return Err(CliError::Usage(
                "the qvi method has no penalized form; use --method exact or projected with --lambda".into(),
            ))
        }
    };
    Ok(sol)
}

/// Single equilibrium; prints interface values and writes `nodes.csv` and
/// `stress.csv` when CSV output is enabled.
pub fn run_solve(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let spec = config.problem()?;
    let sys = system(config, &spec)?;
    let sol = solve_configured(config, &spec, &sys)?;

    let mut text = String::new();
    let _ = writeln!(text, "method = {}", config.method.name());
    match config.lambda {
        Some(lambda) => {
            let _ = writeln!(text, "penalty = {} (lambda = {})", config.penalty.name(), format_number(lambda));
        }
        None => {
            let _ = writeln!(text, "variant = {}", spec.variant().name());
        }
    }
    for (name, value) in [("g1", sol.g1), ("g2", sol.g2), ("theta", sol.theta), ("s", sol.s)] {
        let _ = writeln!(text, "{name} = {}", format_number(value));
    }
    let _ = writeln!(text, "contact = {}", sol.contact);
    let _ = writeln!(text, "regime = {}", sol.diagnostics.regime.label());
    let _ = writeln!(text, "iterations = {}", sol.diagnostics.iterations);
    let _ = writeln!(text, "residual = {}", format_number(sol.diagnostics.residual));
    let _ = writeln!(text, "energy = {}", format_number(sol.energy));

    let mut outcome = Outcome::new(None);
    if config.formats.contains(&Format::Csv) {
        let dir = create_run_dir(&config.outdir, Command::Solve.name())?;
        let (rod1, rod2) = sol.u.nodal_values(sys.mesh());
        let mut nodes = String::from("rod,x,u\n");
        for (rod, values) in [(1, &rod1), (2, &rod2)] {
            for (x, u) in values {
                let _ = writeln!(nodes, "{rod},{},{}", format_number(*x), format_number(*u));
            }
        }
        write_file(&dir, "nodes.csv", &nodes, &mut outcome)?;

        let (s1, s2) = sys.stress_field(&sol.u)?;
        let mut stress = String::from("rod,x_left,x_right,sigma\n");
        for (rod, nodes, sigma) in [(1, sys.mesh().nodes1(), &s1), (2, sys.mesh().nodes2(), &s2)] {
            for (w, s) in nodes.windows(2).zip(sigma) {
                let _ = writeln!(
                    stress,
                    "{rod},{},{},{}",
                    format_number(w[0]),
                    format_number(w[1]),
                    format_number(*s)
                );
            }
        }
        write_file(&dir, "stress.csv", &stress, &mut outcome)?;
        let _ = writeln!(text, "output = {}", dir.display());
        outcome.run_dir = Some(dir);
    }
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))?;
    Ok(outcome)
}

/// Exact solves over the stiffness grid.
pub fn run_sweep(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let spec = config.problem()?;
    let sweep = SweepConfig {
        grid: config.grid.clone(),
        target: config.sweep_target,
        n1: config.n1,
        n2: config.n2,
        jobs: config.jobs.max(1),
    };
    let result = run_stiffness_sweep(&spec, *spec.forces(), &sweep)?;

    let dir = create_run_dir(&config.outdir, Command::Sweep.name())?;
    let mut outcome = Outcome::new(Some(dir.clone()));
    if !result.records.is_empty() {
        if config.formats.contains(&Format::Csv) {
            export_sweep_csv(&result, &dir.join("sweep.csv"))?;
            outcome.files.push("sweep.csv".into());
        }
        if config.formats.contains(&Format::Svg) {
            for (name, panel) in [
                ("displacement.svg", SweepPanel::Displacement),
                ("stress.svg", SweepPanel::Stress),
                ("gap.svg", SweepPanel::Gap),
            ] {
                export_sweep_svg(&result, &dir.join(name), panel)?;
                outcome.files.push(name.into());
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "swept {} over {} values ({} solved, {} failed)",
        result.target.name(),
        config.grid.len(),
        result.records.len(),
        result.failures.len()
    );
    if let (Some(first), Some(last)) = (result.records.first(), result.records.last()) {
        let contact = result.records.iter().filter(|r| r.contact).count();
        let _ = writeln!(text, "contact at {contact} of {} points", result.records.len());
        let _ = writeln!(
            text,
            "theta from {} to {}",
            format_number(first.theta),
            format_number(last.theta)
        );
    }
    let m = result.monotonicity;
    let _ = writeln!(
        text,
        "|g1| decreasing = {}, |g2| decreasing = {}, |s| increasing = {}",
        m.abs_g1_decreasing, m.abs_g2_decreasing, m.abs_s_increasing
    );
    let _ = writeln!(text, "output = {}", dir.display());
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))?;

    for f in &result.failures {
        outcome
            .warnings
            .push(format!("{} = {}: {}", result.target.name(), format_number(f.k), f.message));
    }
    if !result.failures.is_empty() {
        outcome.failure = Some(format!("{} sweep point(s) could not be solved", result.failures.len()));
    }
    Ok(outcome)
}

/// Penalty solves along the schedule compared with the rigid limit.
pub fn run_converge(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let spec = config.problem()?;
    let setup = ConvergenceSetup::new(config.penalty)
        .with_range(config.n_min..=config.n_max)
        .with_mesh(config.n1, config.n2);
    let study = run_penalty_convergence(&spec, &setup)?;

    let dir = create_run_dir(&config.outdir, Command::Converge.name())?;
    let mut outcome = Outcome::new(Some(dir.clone()));
    if config.formats.contains(&Format::Csv) {
        export_convergence_csv(&study, &dir.join("convergence.csv"))?;
        outcome.files.push("convergence.csv".into());
    }
    if config.formats.contains(&Format::Svg) {
        for (name, panel) in [("error.svg", ConvergencePanel::Error), ("length.svg", ConvergencePanel::Length)] {
            export_convergence_svg(&study, &dir.join(name), panel)?;
            outcome.files.push(name.into());
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "penalty = {}, limit set {}", study.kind.name(), study.limit_label());
    let _ = writeln!(
        text,
        "limit: g1 = {}, g2 = {}, theta = {}",
        format_number(study.limit_g1),
        format_number(study.limit_g2),
        format_number(study.limit_theta)
    );
    if let Some(last) = study.records.last() {
        let _ = writeln!(
            text,
            "n = {}: theta = {}, error = {}",
            last.n,
            format_number(last.theta),
            format_number(last.error_vnorm)
        );
    }
    let _ = writeln!(
        text,
        "error below {} = {}",
        format_number(study.threshold),
        study.below_threshold
    );
    let _ = writeln!(text, "output = {}", dir.display());
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))?;

    if study.non_convergence {
        outcome
            .warnings
            .push("penalty error did not decrease over the last three schedule steps".into());
    }
    Ok(outcome)
}

/// Solves with all three solvers and compares with the closed-form solution.
pub fn run_validate(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    if config.lambda.is_some() {
        return Err(CliError::Usage(
            "validate compares the unpenalized problem; drop --lambda".into(),
        ));
    }
    let spec = config.problem()?;
    let sys = system(config, &spec)?;
    let solver = solver_config(config);
    let exact = solve_exact(&sys.schur_reduce()?, spec.spring(), spec.variant())?;
    let pg = solve_projected_gradient(&sys, spec.spring(), spec.variant(), None, &solver)?;
    let qvi = solve_qvi_fixed_point(&sys, spec.spring(), spec.variant(), &solver)?;
    let oracle = analytic_solution(&spec);

    let rows = [
        ("exact", [exact.g1, exact.g2, exact.theta, exact.s]),
        ("projected", [pg.g1, pg.g2, pg.theta, pg.s]),
        ("qvi", [qvi.g1, qvi.g2, qvi.theta, qvi.s]),
        ("oracle", [oracle.g1, oracle.g2, oracle.theta, oracle.s]),
    ];
    let mut text = String::new();
    for (name, v) in &rows {
        let _ = writeln!(
            text,
            "{name:<9} g1 = {}, g2 = {}, theta = {}, s = {}",
            format_number(v[0]),
            format_number(v[1]),
            format_number(v[2]),
            format_number(v[3])
        );
    }
    let mut deviation = 0.0f64;
    for (i, (_, a)) in rows.iter().enumerate() {
        for (_, b) in &rows[i + 1..] {
            for (x, y) in a.iter().zip(b) {
                deviation = deviation.max((x - y).abs());
            }
        }
    }
    let _ = writeln!(text, "max deviation = {}", format_number(deviation));
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))?;

    let mut outcome = Outcome::new(None);
    if !(deviation <= VALIDATE_LIMIT) {
        outcome.failure = Some(format!(
            "max deviation {} exceeds {}",
            format_number(deviation),
            format_number(VALIDATE_LIMIT)
        ));
    }
    Ok(outcome)
}

pub fn dispatch(command: Command, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => run_solve(config, out),
        Command::Sweep => run_sweep(config, out),
        Command::Converge => run_converge(config, out),
        Command::Validate => run_validate(config, out),
    }
}
