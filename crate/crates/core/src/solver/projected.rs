//! Projected gradient descent on the reduced energy.
//!
//! Steps and projections use the metric of `S`, in which the smooth part has
//! Hessian `I + F′ S⁻¹ c cᵀ` and the projection onto a slab in `θ` is a shift
//! along `S⁻¹c`.

use super::{
    build_solution, classify, bound_tolerance, snap_theta, IterativeOutcome, Objective, PenaltyProblem,
    SolutionParts, SolverConfig, SolverError,
};
use crate::fem::{DiscreteSystem, ReducedSystem};
use crate::model::{ConstraintVariant, SpringLaw, ThetaInterval};
use crate::{EquilibriumSolution, Scalar};

/// `S`-orthogonal projection onto `{g : θ(g) ∈ interval}`.
pub(crate) fn project<T: Scalar>(reduced: &ReducedSystem<T>, interval: &ThetaInterval<T>, g: [T; 2]) -> [T; 2] {
    let theta = reduced.theta(g);
    let target = interval.clamp(theta);
    if target == theta {
        return g;
    }
    let s = reduced.s();
    let c = reduced.theta_gradient();
    let shift = (target - theta) / reduced.compliance();
    [g[0] + shift * c[0] / s[0][0], g[1] + shift * c[1] / s[1][1]]
}

fn s_norm<T: Scalar>(reduced: &ReducedSystem<T>, d: [T; 2]) -> T {
    let s = reduced.s();
    (s[0][0] * d[0] * d[0] + s[1][1] * d[1] * d[1]).sqrt()
}

/// Runs the iteration and returns the last iterate even when the limit is hit.
pub fn projected_gradient_run<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    penalty: Option<&PenaltyProblem<T>>,
    config: &SolverConfig<T>,
) -> Result<IterativeOutcome<T>, SolverError> {
    config.validate()?;
    let objective = Objective::new(reduced, spring, penalty);
    let two_l = reduced.natural_length();
    let interval = variant.interval(two_l);
    let s = reduced.s();
    let smoothness = T::one() + objective.lipschitz() * reduced.compliance();

    let mut g = project(reduced, &interval, [T::zero(); 2]);
    let mut value = objective.value(g);
    let mut converged = false;
    let mut iterations = 0;
    let mut step = T::one() / smoothness;

    while iterations < config.max_iterations {
        iterations += 1;
        let grad = objective.gradient(g);
        let mut t = step;
        let (next, next_value, diff) = loop {
            let trial = project(
                reduced,
                &interval,
                [g[0] - t * grad[0] / s[0][0], g[1] - t * grad[1] / s[1][1]],
            );
            let d = [trial[0] - g[0], trial[1] - g[1]];
            let trial_value = objective.value(trial);
            let model = value + grad[0] * d[0] + grad[1] * d[1] + s_norm(reduced, d).powi(2) / (t + t);
            if trial_value <= model + T::rel_tol(value) || t < T::epsilon() {
                break (trial, trial_value, d);
            }
            t *= config.backtrack;
        };
        step = t;
        g = next;
        value = next_value;
        if s_norm(reduced, diff) / t <= config.tolerance {
            converged = true;
            break;
        }
    }

    let tol = bound_tolerance(two_l);
    let theta = snap_theta(&interval, reduced.theta(g), tol);
    let solution: EquilibriumSolution<T> = build_solution(
        &objective,
        variant,
        SolutionParts {
            g,
            theta,
            regime: classify(&interval, theta, two_l, tol),
            iterations,
            converged,
            step_ratios: Vec::new(),
        },
    );
    Ok(IterativeOutcome { solution })
}

/// Projected-gradient solve of the discrete problem, optionally penalized.
pub fn solve_projected_gradient<T: Scalar>(
    system: &DiscreteSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    penalty: Option<&PenaltyProblem<T>>,
    config: &SolverConfig<T>,
) -> Result<EquilibriumSolution<T>, SolverError> {
    let reduced = system.schur_reduce()?;
    projected_gradient_run(&reduced, spring, variant, penalty, config)?.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use crate::model::{BodyForce, Geometry, Material, PenaltyKind, PenaltyLaw};
    use crate::solver::{solve_exact, solve_penalized};

    fn system(n: usize, f1: f64, f2: f64) -> DiscreteSystem<f64> {
        let mesh = Mesh::uniform(&Geometry::benchmark(), n, n).unwrap();
        DiscreteSystem::assemble(
            &mesh,
            &Material::new(1.0, 1.0).unwrap(),
            &BodyForce::new(f1, f2).unwrap(),
        )
    }

    #[test]
    fn agrees_with_enumeration() {
        let config = SolverConfig::default().with_tolerance(1e-12);
        for (f1, f2, k1) in [(1.0, -1.0, 1.0), (6.0, -6.0, 0.25), (-1.0, 1.0, 0.3), (1.0, 1.0, 0.7)] {
            let sys = system(6, f1, f2);
            let red = sys.schur_reduce().unwrap();
            let spring = SpringLaw::new(k1, 1.0, 1.0).unwrap();
            for variant in ConstraintVariant::ALL {
                let a = solve_exact(&red, &spring, variant).unwrap();
                let b = solve_projected_gradient(&sys, &spring, variant, None, &config).unwrap();
                assert!((a.g1 - b.g1).abs() < 1e-9 && (a.g2 - b.g2).abs() < 1e-9, "{variant:?} {f1}");
                assert_eq!(a.active_bound, b.active_bound);
            }
        }
    }

    #[test]
    fn penalized_agrees_with_enumeration() {
        let sys = system(4, 1.0, -1.0);
        let red = sys.schur_reduce().unwrap();
        let spring = SpringLaw::new(1.0, 1.0, 1.0).unwrap();
        let config = SolverConfig::default().with_tolerance(1e-11);
        for kind in PenaltyKind::ALL {
            let pen = PenaltyProblem::new(PenaltyLaw::new(kind, 1.0), 1.0 / 64.0).unwrap();
            let a = solve_penalized(&red, &spring, &pen).unwrap();
            let b = solve_projected_gradient(&sys, &spring, ConstraintVariant::NonPenetration, Some(&pen), &config)
                .unwrap();
            assert!((a.theta - b.theta).abs() < 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn projection_hits_the_bound() {
        let red = system(3, 0.0, 0.0).schur_reduce().unwrap();
        let interval = ConstraintVariant::RigidCompression.interval(1.0);
        let g = project(&red, &interval, [0.4, 0.0]);
        assert!((red.theta(g) - 1.0).abs() < 1e-15);
        assert_eq!(project(&red, &interval, [-0.2, 0.0]), [-0.2, 0.0]);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let sys = system(4, 1.0, 0.5);
        let spring = SpringLaw::new(1.0, 1.0, 1.0).unwrap();
        let config = SolverConfig::default().with_tolerance(1e-14).with_max_iterations(2);
        let err = solve_projected_gradient(&sys, &spring, ConstraintVariant::NonPenetration, None, &config);
        assert!(matches!(err, Err(SolverError::MaxIterationsExceeded { iterations: 2, .. })));
    }
}
