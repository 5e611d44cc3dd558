//! Exact minimization by regime enumeration.
//!
//! On each regime the spring potential is a single quadratic in `θ` and the
//! active constraint (if any) fixes `θ`, so the KKT conditions reduce to a 2x2
//! system or a bordered 3x3 system. Convexity leaves exactly one sign-consistent
//! candidate up to ties at breakpoints.

use super::{build_solution, Objective, PenaltyProblem, Regime, SolutionParts, SolverError};
use crate::fem::ReducedSystem;
use crate::linalg::{solve2, solve3};
use crate::model::{ConstraintVariant, SpringLaw};
use crate::{EquilibriumSolution, Scalar};

struct Candidate<T> {
    g: [T; 2],
    theta: T,
    regime: Regime,
    energy: T,
}

impl Regime {
    /// Tie-break order: breakpoint first, then bounds, then free regimes.
    fn priority(self) -> u8 {
        match self {
            Regime::Breakpoint => 0,
            Regime::LowerBound | Regime::UpperBound | Regime::Equality => 1,
            Regime::Compression | Regime::Extension => 2,
        }
    }
}

/// Free regime with spring slope `k`: `(S + k c cᵀ) g = r`.
fn free_point<T: Scalar>(reduced: &ReducedSystem<T>, k: T) -> Option<[T; 2]> {
    let s = reduced.s();
    let c = reduced.theta_gradient();
    let m = [
        [s[0][0] + k * c[0] * c[0], s[0][1] + k * c[0] * c[1]],
        [s[1][0] + k * c[1] * c[0], s[1][1] + k * c[1] * c[1]],
    ];
    solve2(m, reduced.r()).ok()
}

/// `θ` pinned at `beta`: `[S c; cᵀ 0] [g; ν] = [r; β − 2l]`, so that
/// `Sg − r + ν c = 0`.
fn pinned_point<T: Scalar>(reduced: &ReducedSystem<T>, beta: T) -> Option<([T; 2], T)> {
    let s = reduced.s();
    let c = reduced.theta_gradient();
    let r = reduced.r();
    let m = [
        [s[0][0], s[0][1], c[0]],
        [s[1][0], s[1][1], c[1]],
        [c[0], c[1], T::zero()],
    ];
    let x = solve3(m, [r[0], r[1], beta - reduced.natural_length()]).ok()?;
    Some(([x[0], x[1]], x[2]))
}

fn enumerate<T: Scalar>(
    objective: &Objective<'_, T>,
    law: &SpringLaw<T>,
    variant: ConstraintVariant,
) -> Result<Candidate<T>, SolverError> {
    let reduced = objective.reduced;
    let two_l = reduced.natural_length();
    let interval = variant.interval(two_l);
    let r = reduced.r();
    let s = reduced.s();
    let scale = T::one()
        + r[0].abs()
        + r[1].abs()
        + s[0][0].abs()
        + s[1][1].abs()
        + law.k1()
        + law.k2()
        + two_l;
    let theta_tol = T::rel_tol(scale) * T::lit(10.0);
    let force_tol = theta_tol * scale;

    let mut found: Vec<Candidate<T>> = Vec::with_capacity(5);
    let mut push = |g: [T; 2], theta: T, regime: Regime| {
        found.push(Candidate {
            g,
            theta,
            regime,
            energy: objective.value(g),
        });
    };

    if !interval.is_point() {
        for (k, regime) in [(law.k1(), Regime::Compression), (law.k2(), Regime::Extension)] {
            let Some(g) = free_point(reduced, k) else { continue };
            let theta = reduced.theta(g);
            let side_ok = match regime {
                Regime::Compression => theta <= two_l + theta_tol,
                _ => theta >= two_l - theta_tol,
            };
            if side_ok && interval.contains(theta, theta_tol) {
                push(g, theta, regime);
            }
        }
        if interval.lower < two_l && two_l < interval.upper {
            if let Some((g, nu)) = pinned_point(reduced, two_l) {
                // p̂ is differentiable at 2l with zero slope
                if nu.abs() <= force_tol {
                    push(g, two_l, Regime::Breakpoint);
                }
            }
        }
    }

    let bounds = if interval.is_point() {
        vec![(interval.lower, Regime::Equality)]
    } else {
        let mut b = vec![(interval.lower, Regime::LowerBound)];
        if interval.upper.is_finite() {
            b.push((interval.upper, Regime::UpperBound));
        }
        b
    };
    for (beta, regime) in bounds {
        let Some((g, nu)) = pinned_point(reduced, beta) else { continue };
        // stationarity: ν = −P(β) − μ with μ = μ_lower − μ_upper
        let mu = -law.p(beta) - nu;
        let consistent = match regime {
            Regime::LowerBound => mu >= -force_tol,
            Regime::UpperBound => -mu >= -force_tol,
            _ => true,
        };
        if consistent {
            push(g, beta, regime);
        }
    }

    let best = found
        .iter()
        .map(|c| c.energy)
        .fold(T::infinity(), |a, b| a.min(b));
    if !best.is_finite() {
        return Err(SolverError::NoConsistentRegime);
    }
    let tie = T::rel_tol(best.abs()) * T::lit(10.0);
    found
        .into_iter()
        .filter(|c| c.energy <= best + tie)
        .min_by_key(|c| c.regime.priority())
        .ok_or(SolverError::NoConsistentRegime)
}

/// Global minimizer of the reduced energy over the variant's admissible set.
pub fn solve_exact<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
) -> Result<EquilibriumSolution<T>, SolverError> {
    let objective = Objective::new(reduced, spring, None);
    let best = enumerate(&objective, spring, variant)?;
    Ok(build_solution(
        &objective,
        variant,
        SolutionParts {
            g: best.g,
            theta: best.theta,
            regime: best.regime,
            iterations: 1,
            converged: true,
            step_ratios: Vec::new(),
        },
    ))
}

/// Minimizer of the reduced energy plus `q̂(θ)/λ` over the non-penetration set.
///
/// `p + q/λ` is again piecewise linear with the penalty slope added on the
/// side(s) where `q` acts, so the same enumeration applies.
pub fn solve_penalized<T: Scalar>(
    reduced: &ReducedSystem<T>,
    spring: &SpringLaw<T>,
    penalty: &PenaltyProblem<T>,
) -> Result<EquilibriumSolution<T>, SolverError> {
    if !(penalty.lambda() > T::zero()) {
        return Err(SolverError::NonPositiveLambda(penalty.lambda().as_f64()));
    }
    let objective = Objective::new(reduced, spring, Some(penalty));
    let law = spring.stiffened(penalty.law(), penalty.lambda());
    let variant = ConstraintVariant::NonPenetration;
    let best = enumerate(&objective, &law, variant)?;
    Ok(build_solution(
        &objective,
        variant,
        SolutionParts {
            g: best.g,
            theta: best.theta,
            regime: best.regime,
            iterations: 1,
            converged: true,
            step_ratios: Vec::new(),
        },
    ))
}
