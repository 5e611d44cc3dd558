//! Optimality measures for candidate equilibria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bound_tolerance, Objective, SolverError};
use crate::fem::{DiscreteSystem, DofVector, ReducedSystem};
use crate::linalg::dot2;
use crate::model::{ConstraintVariant, SpringLaw};
use crate::Scalar;

const VI_SEED: u64 = 0x5eed_0f_5715;

/// KKT residual of the reduced problem at interface values `g` with gap `theta`.
///
/// Combines stationarity orthogonal to `∇θ`, the multiplier sign, inactive
/// multipliers, infeasibility and the mismatch between `theta` and `θ(g)`.
pub fn kkt_residual<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    g: [T; 2],
    theta: T,
) -> T {
    kkt_residual_objective(&Objective::new(reduced, spring, None), variant, g, theta)
}

pub(crate) fn kkt_residual_objective<T: Scalar>(
    objective: &Objective<'_, T>,
    variant: ConstraintVariant,
    g: [T; 2],
    theta: T,
) -> T {
    let reduced = objective.reduced;
    let two_l = reduced.natural_length();
    let interval = variant.interval(two_l);
    let tol = bound_tolerance(two_l);
    let c = reduced.theta_gradient();

    let q = reduced.gradient(g);
    let force = objective.force(theta);
    let grad = [q[0] - force * c[0], q[1] - force * c[1]];
    // grad = (μ_lower − μ_upper) c at a KKT point
    let nu = dot2(grad, c) / dot2(c, c);
    let orth = [grad[0] - nu * c[0], grad[1] - nu * c[1]];
    let stationarity = orth[0].abs().max(orth[1].abs());

    let multiplier = if interval.is_point() {
        T::zero()
    } else {
        let at_lower = (theta - interval.lower).abs() <= tol;
        let at_upper = interval.upper.is_finite() && (theta - interval.upper).abs() <= tol;
        match (at_lower, at_upper) {
            (true, _) => (-nu).max(T::zero()),
            (_, true) => nu.max(T::zero()),
            _ => nu.abs(),
        }
    };

    let infeasible = (interval.lower - theta)
        .max(theta - interval.upper)
        .max(T::zero());
    let mismatch = (theta - reduced.theta(g)).abs();
    stationarity.max(multiplier).max(infeasible).max(mismatch)
}

/// Smallest value of the variational inequality form
/// `(Au − b)·(v − u) − p(θ(u)) (θ(v) − θ(u))` over sampled admissible `v`.
///
/// Non-negative (up to round-off) at a solution. Samples are the interval
/// vertices reached by moving `u2(l)`, and `trials` random perturbations in
/// `[-1, 1]` per DOF pulled back into the admissible set through `u2(l)`.
pub fn vi_residual<T: Scalar>(
    system: &DiscreteSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    u: &DofVector<T>,
    trials: usize,
) -> Result<T, SolverError> {
    system.v_norm(u)?;
    let l = system.l();
    let two_l = l + l;
    let interval = variant.interval(two_l);
    let theta_u = u.theta(l);
    if !interval.contains(theta_u, bound_tolerance(two_l)) {
        return Err(SolverError::InfeasibleCandidate {
            theta: theta_u.as_f64(),
            lower: interval.lower.as_f64(),
            upper: interval.upper.as_f64(),
        });
    }
    let (r1, r2) = system.residual(u);
    let force = spring.p(theta_u);

    // form is linear in w = v − u
    let form = |w1: &[T], w2: &[T]| -> T {
        let elastic: T = r1.iter().zip(w1).map(|(a, b)| *a * *b).sum::<T>()
            + r2.iter().zip(w2).map(|(a, b)| *a * *b).sum::<T>();
        let dtheta = w2[0] - *w1.last().unwrap();
        elastic - force * dtheta
    };

    let n1 = u.rod1().len();
    let n2 = u.rod2().len();
    let mut best = T::zero();
    let mut w1 = vec![T::zero(); n1];
    let mut w2 = vec![T::zero(); n2];

    for vertex in [interval.lower, interval.upper] {
        if vertex.is_finite() {
            w1.iter_mut().for_each(|x| *x = T::zero());
            w2.iter_mut().for_each(|x| *x = T::zero());
            w2[0] = vertex - theta_u;
            best = best.min(form(&w1, &w2));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(VI_SEED);
    for _ in 0..trials {
        for x in w1.iter_mut().chain(w2.iter_mut()) {
            *x = T::lit(rng.gen_range(-1.0..=1.0));
        }
        let theta_v = theta_u + w2[0] - w1[n1 - 1];
        let clamped = interval.clamp(theta_v);
        w2[0] += clamped - theta_v;
        best = best.min(form(&w1, &w2));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use crate::model::{BodyForce, Geometry, Material};
    use crate::solver::solve_exact;

    fn system(n: usize, f1: f64, f2: f64) -> DiscreteSystem<f64> {
        let mesh = Mesh::uniform(&Geometry::benchmark(), n, n).unwrap();
        DiscreteSystem::assemble(
            &mesh,
            &Material::new(1.0, 1.0).unwrap(),
            &BodyForce::new(f1, f2).unwrap(),
        )
    }

    #[test]
    fn exact_solution_satisfies_the_inequality() {
        for (f1, f2, k1) in [(1.0, -1.0, 1.0), (6.0, -6.0, 0.25), (-1.0, 1.0, 0.3), (2.0, 0.5, 0.8)] {
            let sys = system(5, f1, f2);
            let spring = SpringLaw::new(k1, 1.0, 1.0).unwrap();
            for variant in ConstraintVariant::ALL {
                let sol = solve_exact(&sys.schur_reduce().unwrap(), &spring, variant).unwrap();
                let r = vi_residual(&sys, &spring, variant, &sol.u, 200).unwrap();
                assert!(r >= -1e-12, "{variant:?} {f1} {f2}: {r}");
                assert!(sol.diagnostics.residual <= 1e-12);
            }
        }
    }

    #[test]
    fn wrong_state_is_detected() {
        let sys = system(4, 1.0, -1.0);
        let spring = SpringLaw::new(1.0, 1.0, 1.0).unwrap();
        let u = sys.zero_dofs();
        let r = vi_residual(&sys, &spring, ConstraintVariant::NonPenetration, &u, 50).unwrap();
        assert!(r < -1e-3);
        let red = sys.schur_reduce().unwrap();
        assert!(kkt_residual(&red, &spring, ConstraintVariant::NonPenetration, [0.0, 0.0], 1.0) > 1e-3);
    }

    #[test]
    fn infeasible_candidate_is_rejected() {
        let sys = system(3, 0.0, 0.0);
        let spring = SpringLaw::new(1.0, 1.0, 1.0).unwrap();
        let mut u = sys.zero_dofs();
        *u.rod1_mut().last_mut().unwrap() = 2.0;
        assert!(matches!(
            vi_residual(&sys, &spring, ConstraintVariant::NonPenetration, &u, 10),
            Err(SolverError::InfeasibleCandidate { .. })
        ));
    }

    #[test]
    fn wrong_multiplier_sign_is_penalized() {
        let sys = system(4, -1.0, 1.0);
        let red = sys.schur_reduce().unwrap();
        let spring = SpringLaw::new(1.0, 1.0, 1.0).unwrap();
        // holding the rods at θ = 0 while they pull apart
        let g = [0.5, -0.5];
        assert!(kkt_residual(&red, &spring, ConstraintVariant::NonPenetration, g, 0.0) > 1e-3);
    }
}
