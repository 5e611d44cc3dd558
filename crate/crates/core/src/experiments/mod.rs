//! Stiffness sweeps and penalty-convergence studies with CSV and SVG output.

mod export;
mod svg;

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::fem::{DiscreteSystem, FemError, Mesh};
use crate::model::{BodyForce, ConstraintVariant, ModelError, PenaltyKind, PenaltyLaw, ProblemSpec, SpringLaw};
use crate::solver::{solve_exact, solve_penalized, PenaltyProblem, SolverError};
use crate::Scalar;

pub use export::{
    export_convergence_csv, export_sweep_csv, format_number, write_convergence_csv, write_sweep_csv,
};
pub use svg::{export_convergence_svg, export_sweep_svg, ConvergencePanel, SweepPanel};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("nothing to export: result has no records")]
    EmptyResult,
    #[error("invalid stiffness grid: {0}")]
    InvalidGrid(String),
    #[error("invalid penalty range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Which spring coefficient the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepTarget {
    K1,
    K2,
    Both,
}

impl SweepTarget {
    pub fn name(self) -> &'static str {
        match self {
            SweepTarget::K1 => "k1",
            SweepTarget::K2 => "k2",
            SweepTarget::Both => "both",
        }
    }

    fn apply<T: Scalar>(self, spring: &SpringLaw<T>, k: T) -> Result<SpringLaw<T>, ModelError> {
        let (k1, k2) = match self {
            SweepTarget::K1 => (k, spring.k2()),
            SweepTarget::K2 => (spring.k1(), k),
            SweepTarget::Both => (k, k),
        };
        SpringLaw::new(k1, k2, spring.natural_length())
    }
}

impl std::str::FromStr for SweepTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "k1" => Ok(SweepTarget::K1),
            "k2" => Ok(SweepTarget::K2),
            "both" | "k" => Ok(SweepTarget::Both),
            other => Err(format!("unknown sweep target `{other}` (expected k1, k2 or both)")),
        }
    }
}

/// `{0.1, 0.2, …, 1.9}`.
pub fn default_stiffness_grid<T: Scalar>() -> Vec<T> {
    (1..=19).map(|i| T::lit(i as f64 / 10.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig<T> {
    pub grid: Vec<T>,
    pub target: SweepTarget,
    pub n1: usize,
    pub n2: usize,
    /// Worker threads; 1 runs inline.
    pub jobs: usize,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            grid: default_stiffness_grid(),
            target: SweepTarget::K1,
            n1: 8,
            n2: 8,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    pub k: T,
    pub g1: T,
    pub g2: T,
    pub theta: T,
    pub s: T,
    pub contact: bool,
    pub energy: T,
}

/// A grid point whose solve failed; recorded instead of aborting the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub k: f64,
    pub message: String,
}

/// Strict monotonicity of the interface response along the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monotonicity {
    pub abs_g1_decreasing: bool,
    pub abs_g2_decreasing: bool,
    pub abs_s_increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub forces: BodyForce<T>,
    pub variant: ConstraintVariant,
    pub target: SweepTarget,
    pub records: Vec<SweepRecord<T>>,
    pub failures: Vec<SweepFailure>,
    pub monotonicity: Monotonicity,
}

fn strictly<T: Scalar>(values: impl Iterator<Item = T>, increasing: bool) -> bool {
    let v: Vec<T> = values.collect();
    v.windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

impl Monotonicity {
    fn of<T: Scalar>(records: &[SweepRecord<T>]) -> Self {
        Self {
            abs_g1_decreasing: strictly(records.iter().map(|r| r.g1.abs()), false),
            abs_g2_decreasing: strictly(records.iter().map(|r| r.g2.abs()), false),
            abs_s_increasing: strictly(records.iter().map(|r| r.s.abs()), true),
        }
    }
}

fn sweep_point<T: Scalar>(
    base: &ProblemSpec<T>,
    forces: BodyForce<T>,
    config: &SweepConfig<T>,
    mesh: &Mesh<T>,
    k: T,
) -> Result<SweepRecord<T>, String> {
    let spring = config.target.apply(base.spring(), k).map_err(|e| e.to_string())?;
    let spec = base
        .with_forces(forces)
        .with_spring(spring)
        .map_err(|e| e.to_string())?;
    let reduced = DiscreteSystem::assemble(mesh, spec.material(), spec.forces())
        .schur_reduce()
        .map_err(|e| e.to_string())?;
    let sol = solve_exact(&reduced, spec.spring(), spec.variant()).map_err(|e| e.to_string())?;
    Ok(SweepRecord {
        k,
        g1: sol.g1,
        g2: sol.g2,
        theta: sol.theta,
        s: sol.s,
        contact: sol.contact,
        energy: sol.energy,
    })
}

/// Solves the base problem once per stiffness value with exact enumeration.
///
/// Points violating the smallness condition or failing to solve are listed in
/// `failures`; the remaining records stay ordered by `k`.
pub fn run_stiffness_sweep<T: Scalar>(
    base: &ProblemSpec<T>,
    forces: BodyForce<T>,
    config: &SweepConfig<T>,
) -> Result<SweepResult<T>, ExperimentError> {
    if config.grid.is_empty() {
        return Err(ExperimentError::InvalidGrid("grid is empty".into()));
    }
    if let Some(w) = config.grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(ExperimentError::InvalidGrid(format!(
            "values must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if config.grid.iter().any(|k| !(*k > T::zero()) || !k.is_finite()) {
        return Err(ExperimentError::InvalidGrid("stiffness values must be positive".into()));
    }
    let mesh = Mesh::uniform(base.geometry(), config.n1, config.n2)?;

    let outcomes: Vec<Result<SweepRecord<T>, String>> = if config.jobs <= 1 {
        config
            .grid
            .iter()
            .map(|&k| sweep_point(base, forces, config, &mesh, k))
            .collect()
    } else {
        let chunk = config.grid.len().div_ceil(config.jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .grid
                .chunks(chunk)
                .map(|part| {
                    let mesh = &mesh;
                    scope.spawn(move || {
                        part.iter()
                            .map(|&k| sweep_point(base, forces, config, mesh, k))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (k, outcome) in config.grid.iter().zip(outcomes) {
        match outcome {
            Ok(r) => records.push(r),
            Err(message) => failures.push(SweepFailure {
                k: k.as_f64(),
                message,
            }),
        }
    }
    Ok(SweepResult {
        forces,
        variant: base.variant(),
        target: config.target,
        monotonicity: Monotonicity::of(&records),
        records,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup<T> {
    pub kind: PenaltyKind,
    /// `n` values; `λ_n = 2^(3 − n)`.
    pub n_range: RangeInclusive<u32>,
    pub n1: usize,
    pub n2: usize,
    /// Largest acceptable final error.
    pub threshold: T,
}

impl<T: Scalar> ConvergenceSetup<T> {
    pub fn new(kind: PenaltyKind) -> Self {
        Self {
            kind,
            n_range: 1..=12,
            n1: 8,
            n2: 8,
            threshold: T::lit(5e-3),
        }
    }

    pub fn with_range(mut self, n_range: RangeInclusive<u32>) -> Self {
        self.n_range = n_range;
        self
    }

    pub fn with_mesh(mut self, n1: usize, n2: usize) -> Self {
        self.n1 = n1;
        self.n2 = n2;
        self
    }
}

/// Named penalty studies: the compression, extension and two-sided cases
/// with their loadings. The extension penalty ships with both the
/// compressive loading (where it never activates) and an extensive one.
pub fn penalty_presets<T: Scalar>() -> Vec<(&'static str, PenaltyKind, BodyForce<T>)> {
    let compressive = BodyForce::new(T::one(), -T::one()).expect("finite");
    let extensive = BodyForce::new(-T::one(), T::one()).expect("finite");
    vec![
        ("compression", PenaltyKind::CompressionOnly, compressive),
        ("extension", PenaltyKind::ExtensionOnly, compressive),
        ("extension-loaded", PenaltyKind::ExtensionOnly, extensive),
        ("two-sided", PenaltyKind::TwoSided, compressive),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord<T> {
    pub n: u32,
    pub lambda: T,
    pub theta: T,
    pub g1: T,
    pub g2: T,
    /// V-norm distance to the limit-problem solution.
    pub error_vnorm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub kind: PenaltyKind,
    pub limit: ConstraintVariant,
    pub limit_g1: T,
    pub limit_g2: T,
    pub limit_theta: T,
    pub records: Vec<ConvergenceRecord<T>>,
    /// The error did not decrease over the last three records.
    pub non_convergence: bool,
    pub threshold: T,
    pub below_threshold: bool,
}

impl<T: Scalar> ConvergenceStudy<T> {
    pub fn limit_label(&self) -> &'static str {
        match self.limit {
            ConstraintVariant::RigidCompression => "K'",
            ConstraintVariant::RigidExtension => "K''",
            ConstraintVariant::FullyRigid => "K'''",
            ConstraintVariant::NonPenetration => "K",
        }
    }
}

/// Solves the penalized problem along `λ_n` and compares with the rigid limit.
pub fn run_penalty_convergence<T: Scalar>(
    base: &ProblemSpec<T>,
    setup: &ConvergenceSetup<T>,
) -> Result<ConvergenceStudy<T>, ExperimentError> {
    if setup.n_range.is_empty() || *setup.n_range.start() < 1 {
        return Err(ExperimentError::InvalidRange(format!(
            "need 1 <= n_min <= n_max, got {}..={}",
            setup.n_range.start(),
            setup.n_range.end()
        )));
    }
    let mesh = Mesh::uniform(base.geometry(), setup.n1, setup.n2)?;
    let system = DiscreteSystem::assemble(&mesh, base.material(), base.forces());
    let reduced = system.schur_reduce()?;
    let two_l = base.geometry().natural_length();
    let law = PenaltyLaw::new(setup.kind, two_l);
    let limit = setup.kind.limit_variant();
    let reference = solve_exact(&reduced, base.spring(), limit)?;

    let mut records = Vec::new();
    for n in setup.n_range.clone() {
        let lambda = PenaltyProblem::<T>::schedule(n);
        let penalty = PenaltyProblem::new(law, lambda)?;
        let sol = solve_penalized(&reduced, base.spring(), &penalty)?;
        let error_vnorm = system.v_norm(&(&sol.u - &reference.u))?;
        records.push(ConvergenceRecord {
            n,
            lambda,
            theta: sol.theta,
            g1: sol.g1,
            g2: sol.g2,
            error_vnorm,
        });
    }
    let non_convergence = records.len() >= 3 && {
        let tail = &records[records.len() - 3..];
        !(tail[2].error_vnorm < tail[0].error_vnorm)
    };
    let last = records.last().map(|r| r.error_vnorm).unwrap_or_else(T::infinity);
    Ok(ConvergenceStudy {
        kind: setup.kind,
        limit,
        limit_g1: reference.g1,
        limit_g2: reference.g2,
        limit_theta: reference.theta,
        records,
        non_convergence,
        threshold: setup.threshold,
        below_threshold: last <= setup.threshold,
    })
}
