//! Solvers for the discrete equilibrium problem and its penalized and rigid
//! variants.
//!
//! Every solver works on the condensed two-DOF energy
//!
//! ```text
//! F(g) = ½ gᵀSg − rᵀg + offset + p̂(θ(g)) [+ q̂(θ(g)) / λ],   θ(g) ∈ [lower, upper]
//! ```
//!
//! and reconstructs the full nodal field afterwards.

mod exact;
mod fixed_point;
mod projected;
mod residual;

use thiserror::Error;

use crate::fem::{DofVector, FemError, ReducedSystem};
use crate::model::{ConstraintVariant, PenaltyLaw, SpringLaw, ThetaInterval};
use crate::Scalar;

pub use exact::{solve_exact, solve_penalized};
pub use fixed_point::{qvi_fixed_point_run, solve_qvi_fixed_point};
pub use projected::{projected_gradient_run, solve_projected_gradient};
pub use residual::{kkt_residual, vi_residual};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("no regime candidate satisfies the KKT sign conditions (objective not convex?)")]
    NoConsistentRegime,
    #[error("penalty parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("iteration limit {iterations} reached (last residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("fixed-point iteration is not contracting: step ratio {ratio} > 1 for 3 consecutive iterations ending at {iteration}")]
    ContractionFailure { iteration: usize, ratio: f64 },
    #[error("candidate gap {theta} lies outside the admissible interval [{lower}, {upper}]")]
    InfeasibleCandidate { theta: f64, lower: f64, upper: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Relaxation of the fixed-point update `η ← η + ω (S(η) − η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping<T> {
    /// `ω = 2 / (2 + Lp κ)` with `κ` the interface compliance; contracts for
    /// every spring slope in `[0, Lp]`.
    Auto,
    Fixed(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub tolerance: T,
    pub max_iterations: usize,
    /// Step shrink factor for the projected-gradient line search.
    pub backtrack: T,
    pub damping: Damping<T>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-8).max(T::lit(1e3) * T::epsilon()),
            max_iterations: 100_000,
            backtrack: T::lit(0.5),
            damping: Damping::Auto,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_damping(mut self, damping: Damping<T>) -> Self {
        self.damping = damping;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > T::zero()) {
            return Err(SolverError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) {
            return Err(SolverError::InvalidConfig(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if let Damping::Fixed(w) = self.damping {
            if !(w > T::zero() && w <= T::one()) {
                return Err(SolverError::InvalidConfig(format!(
                    "damping must lie in (0, 1], got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Penalty law `q` with parameter `λ > 0`, posed over the non-penetration set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyProblem<T> {
    law: PenaltyLaw<T>,
    lambda: T,
}

impl<T: Scalar> PenaltyProblem<T> {
    pub fn new(law: PenaltyLaw<T>, lambda: T) -> Result<Self, SolverError> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(SolverError::NonPositiveLambda(lambda.as_f64()));
        }
        Ok(Self { law, lambda })
    }

    pub fn law(&self) -> &PenaltyLaw<T> {
        &self.law
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `λ_n = 2^(3 − n)`.
    pub fn schedule(n: u32) -> T {
        T::lit(2.0).powi(3 - n as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Spring shorter than its natural length, no bound active.
    Compression,
    /// Spring at or beyond its natural length, no bound active.
    Extension,
    /// Minimizer exactly at the natural length.
    Breakpoint,
    LowerBound,
    UpperBound,
    /// `θ` pinned by a point interval.
    Equality,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Compression => "compression",
            Regime::Extension => "extension",
            Regime::Breakpoint => "breakpoint",
            Regime::LowerBound => "lower-bound",
            Regime::UpperBound => "upper-bound",
            Regime::Equality => "equality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActiveBound {
    None,
    Lower,
    Upper,
    /// Both ends of a point interval.
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub iterations: usize,
    /// KKT residual of the returned state.
    pub residual: T,
    pub regime: Regime,
    pub converged: bool,
    /// Ratios of successive step norms (fixed-point solver only).
    pub step_ratios: Vec<T>,
}

/// Equilibrium state with interface quantities and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution<T> {
    pub u: DofVector<T>,
    /// `u1(-l)`.
    pub g1: T,
    /// `u2(l)`.
    pub g2: T,
    /// Spring length.
    pub theta: T,
    /// Interface stress `σ1(-l) = σ2(l)`.
    pub s: T,
    /// Rod ends touch (`θ = 0`).
    pub contact: bool,
    pub active_bound: ActiveBound,
    /// Discrete total energy including the spring (and penalty) potential.
    pub energy: T,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Scalar> EquilibriumSolution<T> {
    pub fn interface(&self) -> [T; 2] {
        [self.g1, self.g2]
    }
}

/// Convex reduced objective with its piecewise-linear spring force.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Objective<'a, T> {
    pub reduced: &'a ReducedSystem<T>,
    pub spring: SpringLaw<T>,
    pub penalty: Option<PenaltyProblem<T>>,
}

impl<'a, T: Scalar> Objective<'a, T> {
    pub fn new(
        reduced: &'a ReducedSystem<T>,
        spring: &SpringLaw<T>,
        penalty: Option<&PenaltyProblem<T>>,
    ) -> Self {
        Self {
            reduced,
            spring: *spring,
            penalty: penalty.copied(),
        }
    }

    /// Total spring force `p(θ) + q(θ)/λ`.
    pub fn force(&self, theta: T) -> T {
        let base = self.spring.p(theta);
        match &self.penalty {
            Some(pen) => base + pen.law.q(theta) / pen.lambda,
            None => base,
        }
    }

    pub fn potential(&self, theta: T) -> T {
        let base = self.spring.potential(theta);
        match &self.penalty {
            Some(pen) => base + pen.law.potential(theta) / pen.lambda,
            None => base,
        }
    }

    /// Largest slope of the total spring force.
    pub fn lipschitz(&self) -> T {
        let extra = self
            .penalty
            .map(|p| p.law.lipschitz() / p.lambda)
            .unwrap_or_else(T::zero);
        self.spring.lipschitz() + extra
    }

    pub fn value(&self, g: [T; 2]) -> T {
        self.reduced.quadratic(g) + self.potential(self.reduced.theta(g))
    }

    pub fn gradient(&self, g: [T; 2]) -> [T; 2] {
        let q = self.reduced.gradient(g);
        // d p̂(θ)/dθ = −p(θ), ∇θ = (−1, 1)
        let dtheta = -self.force(self.reduced.theta(g));
        [q[0] - dtheta, q[1] + dtheta]
    }
}

pub(crate) fn bound_tolerance<T: Scalar>(natural_length: T) -> T {
    T::rel_tol(natural_length) * T::lit(10.0)
}

pub(crate) fn active_bound<T: Scalar>(interval: &ThetaInterval<T>, theta: T, tol: T) -> ActiveBound {
    if interval.is_point() {
        return ActiveBound::Both;
    }
    if (theta - interval.lower).abs() <= tol {
        ActiveBound::Lower
    } else if interval.upper.is_finite() && (theta - interval.upper).abs() <= tol {
        ActiveBound::Upper
    } else {
        ActiveBound::None
    }
}

/// Snaps `θ` onto a bound it is within `tol` of, otherwise clamps it.
pub(crate) fn snap_theta<T: Scalar>(interval: &ThetaInterval<T>, theta: T, tol: T) -> T {
    match active_bound(interval, theta, tol) {
        ActiveBound::Lower | ActiveBound::Both => interval.lower,
        ActiveBound::Upper => interval.upper,
        ActiveBound::None => interval.clamp(theta),
    }
}

pub(crate) fn classify<T: Scalar>(
    interval: &ThetaInterval<T>,
    theta: T,
    natural_length: T,
    tol: T,
) -> Regime {
    match active_bound(interval, theta, tol) {
        ActiveBound::Both => Regime::Equality,
        ActiveBound::Lower => Regime::LowerBound,
        ActiveBound::Upper => Regime::UpperBound,
        ActiveBound::None => {
            if theta < natural_length {
                Regime::Compression
            } else {
                Regime::Extension
            }
        }
    }
}

pub(crate) struct SolutionParts<T> {
    pub g: [T; 2],
    pub theta: T,
    pub regime: Regime,
    pub iterations: usize,
    pub converged: bool,
    pub step_ratios: Vec<T>,
}

pub(crate) fn build_solution<T: Scalar>(
    objective: &Objective<'_, T>,
    variant: ConstraintVariant,
    parts: SolutionParts<T>,
) -> EquilibriumSolution<T> {
    let reduced = objective.reduced;
    let two_l = reduced.natural_length();
    let interval = variant.interval(two_l);
    let tol = bound_tolerance(two_l);
    let g = parts.g;
    let u = reduced.recover_full(g[0], g[1]);
    let (s, _) = reduced.interface_stress(g);
    let residual = residual::kkt_residual_objective(objective, variant, g, parts.theta);
    EquilibriumSolution {
        u,
        g1: g[0],
        g2: g[1],
        theta: parts.theta,
        s,
        contact: parts.theta.abs() <= tol && interval.lower == T::zero(),
        active_bound: active_bound(&interval, parts.theta, tol),
        energy: objective.value(g),
        diagnostics: Diagnostics {
            iterations: parts.iterations,
            residual,
            regime: parts.regime,
            converged: parts.converged,
            step_ratios: parts.step_ratios,
        },
    }
}

/// Result of an iterative solve that may have stopped at the iteration limit.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome<T> {
    /// Best available iterate; `diagnostics.converged` tells whether the stop
    /// test was met.
    pub solution: EquilibriumSolution<T>,
}

impl<T: Scalar> IterativeOutcome<T> {
    pub(crate) fn into_result(self) -> Result<EquilibriumSolution<T>, SolverError> {
        if self.solution.diagnostics.converged {
            Ok(self.solution)
        } else {
            Err(SolverError::MaxIterationsExceeded {
                iterations: self.solution.diagnostics.iterations,
                residual: self.solution.diagnostics.residual.as_f64(),
            })
        }
    }
}
