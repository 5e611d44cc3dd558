//! Fixed-point iteration on the spring force.
//!
//! Each sweep freezes `p(θ(η))` as a dead load, solves the resulting linear
//! problem on the admissible set, and relaxes towards it:
//! `η ← η + ω (T(η) − η)`.

use super::projected::project;
use super::{
    bound_tolerance, build_solution, classify, snap_theta, Damping, IterativeOutcome, Objective,
    SolutionParts, SolverConfig, SolverError,
};
use crate::fem::{DiscreteSystem, ReducedSystem};
use crate::model::{ConstraintVariant, SpringLaw};
use crate::{EquilibriumSolution, Scalar};

/// Ratios above one for this many consecutive sweeps abort the iteration.
const DIVERGENCE_STREAK: usize = 3;

/// Relaxation actually used for a given configuration.
pub(crate) fn relaxation<T: Scalar>(reduced: &ReducedSystem<T>, spring: &SpringLaw<T>, damping: Damping<T>) -> T {
    match damping {
        Damping::Fixed(w) => w,
        Damping::Auto => {
            let two = T::lit(2.0);
            two / (two + spring.lipschitz() * reduced.compliance())
        }
    }
}

/// `T(η)`: minimizer of the energy with the spring force frozen at `θ(η)`.
fn frozen_force_update<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    eta: [T; 2],
) -> [T; 2] {
    let s = reduced.s();
    let r = reduced.r();
    let c = reduced.theta_gradient();
    let force = spring.p(reduced.theta(eta));
    // S g = r + p c; the spring pulls g1 by −p and g2 by +p
    let free = [(r[0] + force * c[0]) / s[0][0], (r[1] + force * c[1]) / s[1][1]];
    project(reduced, &variant.interval(reduced.natural_length()), free)
}

/// Runs the iteration and returns the last iterate even when the limit is hit.
pub fn qvi_fixed_point_run<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    config: &SolverConfig<T>,
) -> Result<IterativeOutcome<T>, SolverError> {
    config.validate()?;
    let omega = relaxation(reduced, spring, config.damping);
    let two_l = reduced.natural_length();
    let interval = variant.interval(two_l);

    let mut eta = project(reduced, &interval, [T::zero(); 2]);
    let mut ratios = Vec::new();
    let mut previous: Option<T> = None;
    let mut streak = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let target = frozen_force_update(reduced, spring, variant, eta);
        let next = [
            eta[0] + omega * (target[0] - eta[0]),
            eta[1] + omega * (target[1] - eta[1]),
        ];
        let step = reduced.v_norm_diff(next, eta);
        eta = next;
        if step <= config.tolerance {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            let ratio = step / prev;
            ratios.push(ratio);
            streak = if ratio > T::one() { streak + 1 } else { 0 };
            if streak >= DIVERGENCE_STREAK {
                return Err(SolverError::ContractionFailure {
                    iteration: iterations,
                    ratio: ratio.as_f64(),
                });
            }
        }
        previous = Some(step);
    }

    let objective = Objective::new(reduced, spring, None);
    let tol = bound_tolerance(two_l);
    let theta = snap_theta(&interval, reduced.theta(eta), tol);
    let solution: EquilibriumSolution<T> = build_solution(
        &objective,
        variant,
        SolutionParts {
            g: eta,
            theta,
            regime: classify(&interval, theta, two_l, tol),
            iterations,
            converged,
            step_ratios: ratios,
        },
    );
    Ok(IterativeOutcome { solution })
}

/// Fixed-point solve of the discrete problem.
pub fn solve_qvi_fixed_point<T: Scalar>(
    system: &DiscreteSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    config: &SolverConfig<T>,
) -> Result<EquilibriumSolution<T>, SolverError> {
    let reduced = system.schur_reduce()?;
    qvi_fixed_point_run(&reduced, spring, variant, config)?.into_result()
}
