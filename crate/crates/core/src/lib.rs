//! Two elastic rods fixed at their outer ends and joined at their inner ends by
//! a nonlinear spring, subject to a non-penetration constraint on the spring
//! length.
//!
//! The crate discretizes both rods with P1 finite elements, condenses the
//! discrete energy onto the two interface displacements and solves the
//! resulting constrained convex problem three ways:
//!
//! * [`solver::solve_exact`]: regime enumeration with small KKT systems,
//! * [`solver::solve_projected_gradient`]: metric projected gradient,
//! * [`solver::solve_qvi_fixed_point`]: relaxed fixed-point iteration on the
//!   quasivariational formulation.
//!
//! Penalty approximations of rigid spring behaviour are available through
//! [`solver::solve_penalized`], and [`oracle`] provides a closed-form continuum
//! solution for constant body forces plus a brute-force grid minimizer.
//! [`experiments`] runs stiffness sweeps and penalty convergence studies and
//! writes CSV and SVG output.
//!
//! All numerical types are generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below are what most callers want.

pub mod experiments;
pub mod fem;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod solver;

mod error;

pub use error::Error;
pub use scalar::Scalar;

pub use experiments::{ConvergenceRecord, ConvergenceStudy, SweepRecord, SweepResult};
pub use fem::{DiscreteSystem, DofVector, Mesh, ReducedSystem};
pub use model::{
    BodyForce, ConstraintVariant, Geometry, Material, PenaltyKind, PenaltyLaw, ProblemSpec,
    SpringLaw,
};
pub use oracle::AnalyticSolution;
pub use solver::{EquilibriumSolution, PenaltyProblem, SolverConfig};

pub type GeometryF64 = Geometry<f64>;
pub type MaterialF64 = Material<f64>;
pub type SpringLawF64 = SpringLaw<f64>;
pub type PenaltyLawF64 = PenaltyLaw<f64>;
pub type BodyForceF64 = BodyForce<f64>;
pub type ProblemSpecF64 = ProblemSpec<f64>;
pub type MeshF64 = Mesh<f64>;
pub type DofVectorF64 = DofVector<f64>;
pub type DiscreteSystemF64 = DiscreteSystem<f64>;
pub type ReducedSystemF64 = ReducedSystem<f64>;
pub type EquilibriumSolutionF64 = EquilibriumSolution<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type PenaltyProblemF64 = PenaltyProblem<f64>;
pub type AnalyticSolutionF64 = AnalyticSolution<f64>;
pub type SweepResultF64 = SweepResult<f64>;
pub type ConvergenceStudyF64 = ConvergenceStudy<f64>;

pub type GeometryF32 = Geometry<f32>;
pub type MaterialF32 = Material<f32>;
pub type SpringLawF32 = SpringLaw<f32>;
pub type BodyForceF32 = BodyForce<f32>;
pub type ProblemSpecF32 = ProblemSpec<f32>;
pub type DiscreteSystemF32 = DiscreteSystem<f32>;
pub type EquilibriumSolutionF32 = EquilibriumSolution<f32>;
