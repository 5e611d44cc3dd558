//! Reference solutions computed without the finite-element machinery.
//!
//! [`analytic_solution`] integrates the continuum equations directly for
//! constant body forces; [`grid_search_minimizer`] brute-forces the discrete
//! energy on a lattice for very small meshes.

use thiserror::Error;

use crate::fem::{DiscreteSystem, DofVector};
use crate::model::{ConstraintVariant, ProblemSpec, SpringLaw};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no grid point satisfies the constraint")]
    EmptyFeasibleGrid,
    #[error("grid search supports at most {max} DOFs, system has {dofs}")]
    TooManyDofs { dofs: usize, max: usize },
    #[error("grid has {points:e} points (limit {limit:e})")]
    GridTooLarge { points: f64, limit: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyticRegime {
    Extension,
    Compression,
    /// Rod ends touching, `θ = 0`.
    Contact,
    /// A bound other than `θ = 0` is active.
    BoundActive,
}

impl AnalyticRegime {
    pub fn label(self) -> &'static str {
        match self {
            AnalyticRegime::Extension => "extension",
            AnalyticRegime::Compression => "compression",
            AnalyticRegime::Contact => "contact",
            AnalyticRegime::BoundActive => "bound-active",
        }
    }
}

/// Continuum equilibrium for constant forces.
///
/// `u1(x) = c0 + c1 x + c2 x²` on `[a, -l]`, likewise `u2` on `[l, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution<T> {
    pub u1: [T; 3],
    pub u2: [T; 3],
    pub g1: T,
    pub g2: T,
    pub theta: T,
    pub s: T,
    pub regime: AnalyticRegime,
    e: [T; 2],
    a: T,
    b: T,
    l: T,
    f: [T; 2],
    spring: SpringLaw<T>,
    variant: ConstraintVariant,
}

fn poly<T: Scalar>(c: &[T; 3], x: T) -> T {
    c[0] + x * (c[1] + x * c[2])
}

impl<T: Scalar> AnalyticSolution<T> {
    pub fn u1_at(&self, x: T) -> T {
        poly(&self.u1, x)
    }

    pub fn u2_at(&self, x: T) -> T {
        poly(&self.u2, x)
    }

    pub fn sigma1_at(&self, x: T) -> T {
        self.e[0] * (self.u1[1] + T::lit(2.0) * self.u1[2] * x)
    }

    pub fn sigma2_at(&self, x: T) -> T {
        self.e[1] * (self.u2[1] + T::lit(2.0) * self.u2[2] * x)
    }

    /// Largest violation of the boundary conditions, balance equations,
    /// interface conditions and the contact block.
    pub fn residual(&self) -> T {
        let two = T::lit(2.0);
        let l = self.l;
        let interval = self.variant.interval(l + l);
        let mut worst = self.u1_at(self.a).abs().max(self.u2_at(self.b).abs());
        // σ' + f = 0
        worst = worst
            .max((two * self.e[0] * self.u1[2] + self.f[0]).abs())
            .max((two * self.e[1] * self.u2[2] + self.f[1]).abs());
        worst = worst
            .max((self.sigma1_at(-l) - self.s).abs())
            .max((self.sigma2_at(l) - self.s).abs())
            .max((self.u1_at(-l) - self.g1).abs())
            .max((self.u2_at(l) - self.g2).abs())
            .max((l + l - self.g1 + self.g2 - self.theta).abs());
        worst = worst
            .max(interval.lower - self.theta)
            .max(self.theta - interval.upper);
        // s = −p(θ) − μ with μ ≥ 0 at the lower bound, ≤ 0 at the upper
        let excess = self.s + self.spring.p(self.theta);
        let at_lower = self.theta == interval.lower;
        let at_upper = self.theta == interval.upper;
        let sign = match (at_lower, at_upper) {
            (true, true) => T::zero(),
            (true, false) => excess.max(T::zero()),
            (false, true) => (-excess).max(T::zero()),
            (false, false) => excess.abs(),
        };
        worst.max(sign)
    }
}

/// Closed-form equilibrium of the continuum problem with constant forces.
///
/// Each rod is integrated with the interface force `s` as unknown, giving
/// `θ = θ0 − κ s` with `κ = L1/E1 + L2/E2`. The scalar equation
/// `θ = θ0 + κ p(θ)` has a strictly increasing residual, so its root clamped to
/// the admissible interval is the solution.
pub fn analytic_solution<T: Scalar>(spec: &ProblemSpec<T>) -> AnalyticSolution<T> {
    let geo = spec.geometry();
    let (a, b, l) = (geo.a(), geo.b(), geo.l());
    let (l1, l2) = (geo.len1(), geo.len2());
    let (e1, e2) = (spec.material().e1(), spec.material().e2());
    let (f1, f2) = (spec.forces().f1(), spec.forces().f2());
    let spring = *spec.spring();
    let two = T::lit(2.0);
    let two_l = l + l;

    // interface displacements at s = 0
    let d1 = f1 * l1 * l1 / (two * e1);
    let d2 = f2 * l2 * l2 / (two * e2);
    let kappa = l1 / e1 + l2 / e2;
    let theta0 = two_l - d1 + d2;

    let k = if theta0 <= two_l { spring.k1() } else { spring.k2() };
    let free = (theta0 + kappa * k * two_l) / (T::one() + kappa * k);
    let interval = spec.variant().interval(two_l);
    let theta = interval.clamp(free);
    let s = (theta0 - theta) / kappa;

    let regime = if theta != free || interval.is_point() {
        if theta == T::zero() {
            AnalyticRegime::Contact
        } else {
            AnalyticRegime::BoundActive
        }
    } else if theta < two_l {
        AnalyticRegime::Compression
    } else {
        AnalyticRegime::Extension
    };

    let c2 = -f1 / (two * e1);
    let c1 = (s - f1 * l) / e1;
    let u1 = [-(c1 * a + c2 * a * a), c1, c2];
    let c2 = -f2 / (two * e2);
    let c1 = (s + f2 * l) / e2;
    let u2 = [-(c1 * b + c2 * b * b), c1, c2];

    let g1 = (s * l1 + f1 * l1 * l1 / two) / e1;
    let g2 = (-s * l2 + f2 * l2 * l2 / two) / e2;

    AnalyticSolution {
        u1,
        u2,
        g1,
        g2,
        theta,
        s,
        regime,
        e: [e1, e2],
        a,
        b,
        l,
        f: [f1, f2],
        spring,
        variant: spec.variant(),
    }
}

/// Lattice `lo, lo + step, …, hi` per DOF.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    ranges: Vec<(T, T)>,
    step: T,
}

impl<T: Scalar> GridSpec<T> {
    /// Same range for every DOF.
    pub fn uniform(lo: T, hi: T, step: T) -> Self {
        Self {
            ranges: vec![(lo, hi)],
            step,
        }
    }

    /// One range per DOF, in DOF order.
    pub fn per_dof(ranges: Vec<(T, T)>, step: T) -> Self {
        Self { ranges, step }
    }

    pub fn step(&self) -> T {
        self.step
    }

    fn range(&self, dof: usize) -> (T, T) {
        if self.ranges.len() == 1 {
            self.ranges[0]
        } else {
            self.ranges[dof]
        }
    }
}

pub const GRID_MAX_DOFS: usize = 6;
const GRID_MAX_POINTS: f64 = 5e8;

/// Feasible lattice point of smallest discrete energy.
///
/// For a point interval, `θ` is accepted within half a step of the target.
pub fn grid_search_minimizer<T: Scalar>(
    system: &DiscreteSystem<T>,
    spring: &SpringLaw<T>,
    variant: ConstraintVariant,
    grid: GridSpec<T>,
) -> Result<DofVector<T>, OracleError> {
    let n1 = system.mesh().n1();
    let n2 = system.mesh().n2();
    let dofs = n1 + n2;
    if dofs > GRID_MAX_DOFS {
        return Err(OracleError::TooManyDofs {
            dofs,
            max: GRID_MAX_DOFS,
        });
    }
    if grid.ranges.len() != 1 && grid.ranges.len() != dofs {
        return Err(OracleError::InvalidGrid(format!(
            "{} ranges for {dofs} DOFs",
            grid.ranges.len()
        )));
    }
    if !(grid.step > T::zero()) {
        return Err(OracleError::InvalidGrid(format!("step must be positive, got {}", grid.step)));
    }
    let mut lattices: Vec<Vec<T>> = Vec::with_capacity(dofs);
    let mut points = 1.0;
    for d in 0..dofs {
        let (lo, hi) = grid.range(d);
        if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(OracleError::InvalidGrid(format!("need lo <= hi, got [{lo}, {hi}]")));
        }
        let steps = ((hi - lo) / grid.step).round().as_f64();
        points *= steps + 1.0;
        if points > GRID_MAX_POINTS {
            return Err(OracleError::GridTooLarge {
                points,
                limit: GRID_MAX_POINTS,
            });
        }
        let steps = steps as usize;
        // interpolate instead of accumulating so symmetric grids hit 0 exactly
        lattices.push(
            (0..=steps)
                .map(|i| {
                    if steps == 0 {
                        lo
                    } else {
                        lo + (hi - lo) * T::lit(i as f64) / T::lit(steps as f64)
                    }
                })
                .collect(),
        );
    }

    // dense copy of the block-diagonal stiffness and load, in DOF order
    let mut a = vec![vec![T::zero(); dofs]; dofs];
    let mut rhs = vec![T::zero(); dofs];
    for (block, offset, n) in [
        (system.stiffness1(), 0, n1),
        (system.stiffness2(), n1, n2),
    ] {
        for i in 0..n {
            for j in 0..n {
                a[offset + i][offset + j] = block.get(i, j);
            }
        }
    }
    rhs[..n1].copy_from_slice(system.load1());
    rhs[n1..].copy_from_slice(system.load2());

    let l = system.l();
    let two_l = l + l;
    let interval = variant.interval(two_l);
    let slack = if interval.is_point() {
        grid.step * T::lit(0.5)
    } else {
        T::zero()
    };
    let (i_g1, i_g2) = (n1 - 1, n1);

    let half = T::lit(0.5);
    let mut index = vec![0usize; dofs];
    let mut x: Vec<T> = lattices.iter().map(|v| v[0]).collect();
    let mut best: Option<(T, Vec<T>)> = None;
    loop {
        let theta = two_l - x[i_g1] + x[i_g2];
        if interval.contains(theta, slack) {
            let mut energy = spring.potential(theta);
            for i in 0..dofs {
                let mut row = T::zero();
                for j in 0..dofs {
                    row += a[i][j] * x[j];
                }
                energy += x[i] * (half * row - rhs[i]);
            }
            if best.as_ref().map_or(true, |(e, _)| energy < *e) {
                best = Some((energy, x.clone()));
            }
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == dofs {
                let (_, x) = best.ok_or(OracleError::EmptyFeasibleGrid)?;
                return Ok(DofVector::from_parts(x[..n1].to_vec(), x[n1..].to_vec()));
            }
            index[d] += 1;
            if index[d] < lattices[d].len() {
                x[d] = lattices[d][index[d]];
                break;
            }
            index[d] = 0;
            x[d] = lattices[d][0];
            d += 1;
        }
    }
}
