//! Physical data of the spring-rods system and the scalar laws acting on the
//! spring length.
//!
//! Rod 1 occupies `[a, -l]`, rod 2 occupies `[l, b]`; the spring joins `-l` and
//! `l` and has natural length `2l`. The current spring length (the gap) is
//! `theta = 2l - u1(-l) + u2(l)`.

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid material: Young moduli must be positive (E1 = {e1}, E2 = {e2})")]
    Material { e1: f64, e2: f64 },
    #[error("invalid spring: stiffness coefficients must be positive (k1 = {k1}, k2 = {k2})")]
    Stiffness { k1: f64, k2: f64 },
    #[error("body force densities must be finite (f1 = {f1}, f2 = {f2})")]
    NonFiniteForce { f1: f64, f2: f64 },
    #[error("smallness condition violated: E1 + E2 = {m} must exceed 2 Lp L = {alpha}")]
    SmallnessViolation { m: f64, alpha: f64 },
    #[error("natural length {law} of the {what} law does not match 2l = {geometry}")]
    LengthMismatch {
        what: &'static str,
        law: f64,
        geometry: f64,
    },
}

/// Rod placement: rod 1 on `[a, -l]`, rod 2 on `[l, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    a: T,
    b: T,
    l: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn new(a: T, b: T, l: T) -> Result<Self, ModelError> {
        let finite = a.is_finite() && b.is_finite() && l.is_finite();
        if !finite || l <= T::zero() {
            return Err(ModelError::Geometry(format!(
                "half-gap l must be positive and finite, got l = {l}"
            )));
        }
        if !(a < -l) {
            return Err(ModelError::Geometry(format!(
                "left end a = {a} must lie strictly left of -l = {}",
                -l
            )));
        }
        if !(l < b) {
            return Err(ModelError::Geometry(format!(
                "right end b = {b} must lie strictly right of l = {l}"
            )));
        }
        Ok(Self { a, b, l })
    }

    /// The benchmark layout `a = -1, b = 1, l = 0.5`.
    pub fn benchmark() -> Self {
        Self::new(-T::one(), T::one(), T::lit(0.5)).expect("benchmark geometry is valid")
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn l(&self) -> T {
        self.l
    }

    /// Natural spring length `2l`.
    pub fn natural_length(&self) -> T {
        self.l + self.l
    }

    /// Length of rod 1, `-l - a`.
    pub fn len1(&self) -> T {
        -self.l - self.a
    }

    /// Length of rod 2, `b - l`.
    pub fn len2(&self) -> T {
        self.b - self.l
    }

    /// `max(L1, L2)`, the constant in the trace bound `|v(±l)| <= sqrt(L) ||v||_V`.
    pub fn max_len(&self) -> T {
        self.len1().max(self.len2())
    }
}

/// Linear elastic rods with constant Young moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material<T> {
    e1: T,
    e2: T,
}

impl<T: Scalar> Material<T> {
    pub fn new(e1: T, e2: T) -> Result<Self, ModelError> {
        if !(e1 > T::zero() && e2 > T::zero() && e1.is_finite() && e2.is_finite()) {
            return Err(ModelError::Material {
                e1: e1.as_f64(),
                e2: e2.as_f64(),
            });
        }
        Ok(Self { e1, e2 })
    }

    pub fn e1(&self) -> T {
        self.e1
    }

    pub fn e2(&self) -> T {
        self.e2
    }
}

/// Piecewise-linear spring: stiffness `k1` in compression, `k2` in extension.
///
/// `p(r) = -k1 (r - 2l)` for `r < 2l` and `-k2 (r - 2l)` otherwise, so the
/// spring pushes (`p > 0`) when shorter than its natural length and pulls
/// when longer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringLaw<T> {
    k1: T,
    k2: T,
    natural_length: T,
}

impl<T: Scalar> SpringLaw<T> {
    pub fn new(k1: T, k2: T, natural_length: T) -> Result<Self, ModelError> {
        if !(k1 > T::zero() && k2 > T::zero() && k1.is_finite() && k2.is_finite()) {
            return Err(ModelError::Stiffness {
                k1: k1.as_f64(),
                k2: k2.as_f64(),
            });
        }
        if !(natural_length > T::zero()) {
            return Err(ModelError::Geometry(format!(
                "spring natural length must be positive, got {natural_length}"
            )));
        }
        Ok(Self {
            k1,
            k2,
            natural_length,
        })
    }

    pub fn k1(&self) -> T {
        self.k1
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    pub fn natural_length(&self) -> T {
        self.natural_length
    }

    /// Lipschitz constant of `p`.
    pub fn lipschitz(&self) -> T {
        self.k1.max(self.k2)
    }

    /// Slope magnitude of `p` on the side of the breakpoint where `r` lies.
    pub fn stiffness_at(&self, r: T) -> T {
        if r < self.natural_length {
            self.k1
        } else {
            self.k2
        }
    }

    /// Spring force `p(r)`.
    pub fn p(&self, r: T) -> T {
        -self.stiffness_at(r) * (r - self.natural_length)
    }

    /// Potential `p̂(r) = -∫_{2l}^r p(s) ds`, convex with minimum 0 at `2l`.
    pub fn potential(&self, r: T) -> T {
        let d = r - self.natural_length;
        T::lit(0.5) * self.stiffness_at(r) * d * d
    }

    /// The law `p + q / lambda`, which is again piecewise linear with the
    /// penalty slope added on the side(s) where `q` is active.
    pub fn stiffened(&self, penalty: &PenaltyLaw<T>, lambda: T) -> Self {
        let extra = T::one() / lambda;
        let (c1, c2) = penalty.kind().slopes::<T>();
        Self {
            k1: self.k1 + c1 * extra,
            k2: self.k2 + c2 * extra,
            natural_length: self.natural_length,
        }
    }
}

/// Which side(s) of the natural length the penalty function acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    /// `q(r) = 2l - r` for `r < 2l`, zero otherwise.
    CompressionOnly,
    /// `q(r) = 2l - r` for `r >= 2l`, zero otherwise.
    ExtensionOnly,
    /// `q(r) = 2l - r` everywhere.
    TwoSided,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 3] = [
        PenaltyKind::CompressionOnly,
        PenaltyKind::ExtensionOnly,
        PenaltyKind::TwoSided,
    ];

    /// Slopes of `-q` below and above the natural length.
    fn slopes<T: Scalar>(self) -> (T, T) {
        match self {
            PenaltyKind::CompressionOnly => (T::one(), T::zero()),
            PenaltyKind::ExtensionOnly => (T::zero(), T::one()),
            PenaltyKind::TwoSided => (T::one(), T::one()),
        }
    }

    /// Constraint set the penalized solutions approach as `lambda -> 0`.
    pub fn limit_variant(self) -> ConstraintVariant {
        match self {
            PenaltyKind::CompressionOnly => ConstraintVariant::RigidCompression,
            PenaltyKind::ExtensionOnly => ConstraintVariant::RigidExtension,
            PenaltyKind::TwoSided => ConstraintVariant::FullyRigid,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::CompressionOnly => "compression-only",
            PenaltyKind::ExtensionOnly => "extension-only",
            PenaltyKind::TwoSided => "two-sided",
        }
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "compression-only" | "compression" => Ok(PenaltyKind::CompressionOnly),
            "extension-only" | "extension" => Ok(PenaltyKind::ExtensionOnly),
            "two-sided" | "both" => Ok(PenaltyKind::TwoSided),
            other => Err(format!(
                "unknown penalty `{other}` (expected compression-only, extension-only or two-sided)"
            )),
        }
    }
}

/// Penalty function `q` with Lipschitz constant 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyLaw<T> {
    kind: PenaltyKind,
    natural_length: T,
}

impl<T: Scalar> PenaltyLaw<T> {
    pub fn new(kind: PenaltyKind, natural_length: T) -> Self {
        Self {
            kind,
            natural_length,
        }
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn natural_length(&self) -> T {
        self.natural_length
    }

    pub fn lipschitz(&self) -> T {
        T::one()
    }

    fn slope_at(&self, r: T) -> T {
        let (below, above) = self.kind.slopes::<T>();
        if r < self.natural_length {
            below
        } else {
            above
        }
    }

    pub fn q(&self, r: T) -> T {
        self.slope_at(r) * (self.natural_length - r)
    }

    /// `q̂(r) = -∫_{2l}^r q(s) ds`.
    pub fn potential(&self, r: T) -> T {
        let d = r - self.natural_length;
        T::lit(0.5) * self.slope_at(r) * d * d
    }
}

/// Constant line-force densities on the two rods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyForce<T> {
    f1: T,
    f2: T,
}

impl<T: Scalar> BodyForce<T> {
    pub fn new(f1: T, f2: T) -> Result<Self, ModelError> {
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(ModelError::NonFiniteForce {
                f1: f1.as_f64(),
                f2: f2.as_f64(),
            });
        }
        Ok(Self { f1, f2 })
    }

    pub fn zero() -> Self {
        Self {
            f1: T::zero(),
            f2: T::zero(),
        }
    }

    pub fn f1(&self) -> T {
        self.f1
    }

    pub fn f2(&self) -> T {
        self.f2
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            f1: self.f1 * c,
            f2: self.f2 * c,
        }
    }
}

/// Admissible set for the spring length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintVariant {
    /// `theta >= 0`.
    NonPenetration,
    /// `theta >= 2l`: spring rigid in compression.
    RigidCompression,
    /// `0 <= theta <= 2l`: spring rigid in extension.
    RigidExtension,
    /// `theta = 2l`.
    FullyRigid,
}

/// Closed interval `[lower, upper]`; `upper` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaInterval<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> ThetaInterval<T> {
    pub fn contains(&self, theta: T, tol: T) -> bool {
        theta >= self.lower - tol && theta <= self.upper + tol
    }

    pub fn clamp(&self, theta: T) -> T {
        theta.max(self.lower).min(self.upper)
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }
}

impl ConstraintVariant {
    pub const ALL: [ConstraintVariant; 4] = [
        ConstraintVariant::NonPenetration,
        ConstraintVariant::RigidCompression,
        ConstraintVariant::RigidExtension,
        ConstraintVariant::FullyRigid,
    ];

    pub fn interval<T: Scalar>(self, natural_length: T) -> ThetaInterval<T> {
        let (lower, upper) = match self {
            ConstraintVariant::NonPenetration => (T::zero(), T::infinity()),
            ConstraintVariant::RigidCompression => (natural_length, T::infinity()),
            ConstraintVariant::RigidExtension => (T::zero(), natural_length),
            ConstraintVariant::FullyRigid => (natural_length, natural_length),
        };
        ThetaInterval { lower, upper }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintVariant::NonPenetration => "non-penetration",
            ConstraintVariant::RigidCompression => "rigid-compression",
            ConstraintVariant::RigidExtension => "rigid-extension",
            ConstraintVariant::FullyRigid => "fully-rigid",
        }
    }
}

impl std::str::FromStr for ConstraintVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "non-penetration" | "k" => Ok(ConstraintVariant::NonPenetration),
            "rigid-compression" | "k1" => Ok(ConstraintVariant::RigidCompression),
            "rigid-extension" | "k2" => Ok(ConstraintVariant::RigidExtension),
            "fully-rigid" | "k3" => Ok(ConstraintVariant::FullyRigid),
            other => Err(format!(
                "unknown variant `{other}` (expected non-penetration, rigid-compression, rigid-extension or fully-rigid)"
            )),
        }
    }
}

/// Spring length `2l - g1 + g2` from the inner-end displacements.
pub fn gap_theta<T: Scalar>(l: T, g1: T, g2: T) -> T {
    l + l - g1 + g2
}

/// A validated problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec<T> {
    geometry: Geometry<T>,
    material: Material<T>,
    spring: SpringLaw<T>,
    forces: BodyForce<T>,
    variant: ConstraintVariant,
}

impl<T: Scalar> ProblemSpec<T> {
    /// Checks cross-component consistency and the smallness condition
    /// `E1 + E2 > 2 Lp L`.
    pub fn new(
        geometry: Geometry<T>,
        material: Material<T>,
        spring: SpringLaw<T>,
        forces: BodyForce<T>,
        variant: ConstraintVariant,
    ) -> Result<Self, ModelError> {
        let two_l = geometry.natural_length();
        if (spring.natural_length() - two_l).abs() > T::rel_tol(two_l) {
            return Err(ModelError::LengthMismatch {
                what: "spring",
                law: spring.natural_length().as_f64(),
                geometry: two_l.as_f64(),
            });
        }
        let spec = Self {
            geometry,
            material,
            spring,
            forces,
            variant,
        };
        if !(spec.m() > spec.alpha()) {
            return Err(ModelError::SmallnessViolation {
                m: spec.m().as_f64(),
                alpha: spec.alpha().as_f64(),
            });
        }
        Ok(spec)
    }

    /// Benchmark data (`a = -1, b = 1, l = 0.5, E1 = E2 = 1`) with the given
    /// spring stiffnesses and forces.
    pub fn benchmark(
        k1: T,
        k2: T,
        f1: T,
        f2: T,
        variant: ConstraintVariant,
    ) -> Result<Self, ModelError> {
        let geometry = Geometry::benchmark();
        Self::new(
            geometry,
            Material::new(T::one(), T::one())?,
            SpringLaw::new(k1, k2, geometry.natural_length())?,
            BodyForce::new(f1, f2)?,
            variant,
        )
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn material(&self) -> &Material<T> {
        &self.material
    }

    pub fn spring(&self) -> &SpringLaw<T> {
        &self.spring
    }

    pub fn forces(&self) -> &BodyForce<T> {
        &self.forces
    }

    pub fn variant(&self) -> ConstraintVariant {
        self.variant
    }

    /// Monotonicity constant of the elasticity operator, `E1 + E2`.
    pub fn m(&self) -> T {
        self.material.e1() + self.material.e2()
    }

    /// Lipschitz constant of the spring term, `2 Lp L`.
    pub fn alpha(&self) -> T {
        T::lit(2.0) * self.spring.lipschitz() * self.geometry.max_len()
    }

    pub fn with_variant(&self, variant: ConstraintVariant) -> Self {
        Self { variant, ..*self }
    }

    pub fn with_forces(&self, forces: BodyForce<T>) -> Self {
        Self { forces, ..*self }
    }

    /// Replaces the spring and re-validates the smallness condition.
    pub fn with_spring(&self, spring: SpringLaw<T>) -> Result<Self, ModelError> {
        Self::new(
            self.geometry,
            self.material,
            spring,
            self.forces,
            self.variant,
        )
    }
}

/// Free-function form of [`ProblemSpec::new`].
pub fn make_problem<T: Scalar>(
    geometry: Geometry<T>,
    material: Material<T>,
    spring: SpringLaw<T>,
    forces: BodyForce<T>,
    variant: ConstraintVariant,
) -> Result<ProblemSpec<T>, ModelError> {
    ProblemSpec::new(geometry, material, spring, forces, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spring(k1: f64, k2: f64) -> SpringLaw<f64> {
        SpringLaw::new(k1, k2, 1.0).unwrap()
    }

    #[test]
    fn benchmark_problem_is_valid() {
        let spec = ProblemSpec::benchmark(1.0, 1.0, 0.0, 0.0, ConstraintVariant::NonPenetration)
            .unwrap();
        assert_eq!(spec.m(), 2.0);
        assert_eq!(spec.alpha(), 1.0);
        assert_eq!(spec.geometry().len1(), 0.5);
        assert_eq!(spec.geometry().len2(), 0.5);
        assert_eq!(spec.geometry().max_len(), 0.5);
    }

    #[test]
    fn stiff_spring_violates_smallness() {
        let err = ProblemSpec::benchmark(2.5, 1.0, 0.0, 0.0, ConstraintVariant::NonPenetration)
            .unwrap_err();
        assert!(matches!(err, ModelError::SmallnessViolation { m, alpha } if m == 2.0 && alpha == 2.5));
    }

    #[test]
    fn smallness_boundary_is_exclusive() {
        assert!(ProblemSpec::benchmark(2.0, 1.0, 0.0, 0.0, ConstraintVariant::NonPenetration).is_err());
        assert!(
            ProblemSpec::benchmark(1.999, 1.0, 0.0, 0.0, ConstraintVariant::NonPenetration).is_ok()
        );
    }

    #[test]
    fn misordered_geometry_is_rejected() {
        assert!(matches!(
            Geometry::new(-0.4, 1.0, 0.5),
            Err(ModelError::Geometry(_))
        ));
        assert!(Geometry::new(-1.0, 0.5, 0.5).is_err());
        assert!(Geometry::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn invalid_components_are_rejected() {
        assert!(Material::new(0.0, 1.0).is_err());
        assert!(SpringLaw::new(1.0, -1.0, 1.0).is_err());
        assert!(BodyForce::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn mismatched_spring_length_is_rejected() {
        let g = Geometry::benchmark();
        let err = ProblemSpec::new(
            g,
            Material::new(1.0, 1.0).unwrap(),
            SpringLaw::new(1.0, 1.0, 2.0).unwrap(),
            BodyForce::zero(),
            ConstraintVariant::NonPenetration,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::LengthMismatch { .. }));
    }

    #[test]
    fn spring_law_values() {
        assert_eq!(spring(1.0, 1.0).p(1.0), 0.0);
        assert_eq!(spring(1.0, 1.0).p(0.5), 0.5);
        assert_eq!(spring(1.0, 2.0).p(1.25), -0.5);
    }

    #[test]
    fn spring_potential_values() {
        assert_eq!(spring(1.0, 1.0).potential(1.0), 0.0);
        assert_eq!(spring(1.0, 1.0).potential(0.0), 0.5);
        assert_eq!(spring(1.0, 4.0).potential(2.0), 2.0);
    }

    #[test]
    fn penalty_law_values() {
        let c = PenaltyLaw::new(PenaltyKind::CompressionOnly, 1.0);
        assert_eq!((c.q(1.0), c.potential(1.0)), (0.0, 0.0));
        assert_eq!((c.q(0.5), c.potential(0.5)), (0.5, 0.125));
        assert_eq!(c.q(1.5), 0.0);
        let e = PenaltyLaw::new(PenaltyKind::ExtensionOnly, 1.0);
        assert_eq!((e.q(1.5), e.potential(1.5)), (-0.5, 0.125));
        assert_eq!(e.q(0.5), 0.0);
        let t = PenaltyLaw::new(PenaltyKind::TwoSided, 1.0);
        assert_eq!(t.q(0.25), 0.75);
        assert_eq!(t.q(1.25), -0.25);
    }

    #[test]
    fn penalty_zero_sets() {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        for kind in PenaltyKind::ALL {
            let q = PenaltyLaw::new(kind, 1.0);
            for &r in &grid {
                let zero = q.q(r) == 0.0;
                let expected = match kind {
                    PenaltyKind::CompressionOnly => r >= 1.0,
                    PenaltyKind::ExtensionOnly => r <= 1.0,
                    PenaltyKind::TwoSided => r == 1.0,
                };
                assert_eq!(zero, expected, "{kind:?} at r = {r}");
            }
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_theta(0.5, 0.0, 0.0), 1.0);
        assert_eq!(gap_theta(0.5, 0.5, -0.5), 0.0);
        // extension oracle for f = (-1, 1), k2 = 1
        assert_abs_diff_eq!(gap_theta(0.5, -0.0625, 0.0625), 1.125, epsilon = 1e-15);
    }

    #[test]
    fn stiffened_law_adds_penalty_slope() {
        let s = spring(1.0, 1.5);
        let q = PenaltyLaw::new(PenaltyKind::CompressionOnly, 1.0);
        let st = s.stiffened(&q, 0.5);
        assert_eq!((st.k1(), st.k2()), (3.0, 1.5));
        for r in [0.2, 0.9, 1.0, 1.7] {
            assert_abs_diff_eq!(st.p(r), s.p(r) + q.q(r) / 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn variant_intervals() {
        let iv = ConstraintVariant::RigidExtension.interval(1.0);
        assert_eq!((iv.lower, iv.upper), (0.0, 1.0));
        assert!(ConstraintVariant::FullyRigid.interval(1.0).is_point());
        assert!(ConstraintVariant::NonPenetration
            .interval(1.0f64)
            .upper
            .is_infinite());
        for v in ConstraintVariant::ALL {
            assert_eq!(v.name().parse::<ConstraintVariant>().unwrap(), v);
        }
    }

    #[test]
    fn f32_spring_law() {
        let s = SpringLaw::<f32>::new(1.0, 2.0, 1.0).unwrap();
        assert_eq!(s.p(1.25), -0.5);
        assert_eq!(s.potential(0.0), 0.5);
    }

    proptest! {
        #[test]
        fn spring_sign_and_monotonicity(
            k1 in 0.01f64..5.0, k2 in 0.01f64..5.0,
            r1 in -3.0f64..5.0, r2 in -3.0f64..5.0,
        ) {
            let s = spring(k1, k2);
            let sign = |x: f64| if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 };
            prop_assert_eq!(sign(s.p(r1)), sign(1.0 - r1));
            prop_assert!((s.p(r1) - s.p(r2)) * (r1 - r2) <= 0.0);
            prop_assert!((s.p(r1) - s.p(r2)).abs() <= s.lipschitz() * (r1 - r2).abs() * (1.0 + 1e-12));
        }

        #[test]
        fn penalty_sign_monotone_lipschitz(r1 in -3.0f64..5.0, r2 in -3.0f64..5.0) {
            for kind in PenaltyKind::ALL {
                let q = PenaltyLaw::new(kind, 1.0);
                prop_assert!((q.q(r1) - q.q(r2)) * (r1 - r2) <= 0.0);
                prop_assert!((q.q(r1) - q.q(r2)).abs() <= q.lipschitz() * (r1 - r2).abs() * (1.0 + 1e-12));
                if r1 <= 1.0 { prop_assert!(q.q(r1) >= 0.0); }
                if r1 >= 1.0 { prop_assert!(q.q(r1) <= 0.0); }
            }
        }

        #[test]
        fn gap_is_translation_invariant(g1 in -2.0f64..2.0, g2 in -2.0f64..2.0, d in -2.0f64..2.0) {
            let lhs = gap_theta(0.5, g1 + d, g2 + d);
            prop_assert!((lhs - gap_theta(0.5, g1, g2)).abs() <= 1e-14);
        }

        #[test]
        fn accepted_stiffness_set(k1 in 0.01f64..4.0, k2 in 0.01f64..4.0) {
            let ok = ProblemSpec::benchmark(k1, k2, 0.0, 0.0, ConstraintVariant::NonPenetration).is_ok();
            prop_assert_eq!(ok, k1.max(k2) < 2.0);
        }
    }

    #[test]
    fn potential_is_convex_and_integrates_p() {
        let s = spring(0.7, 1.6);
        let h = 1e-5;
        let mut r = -1.0;
        while r < 3.0 {
            let second = s.potential(r + 0.01) - 2.0 * s.potential(r) + s.potential(r - 0.01);
            assert!(second >= -1e-15, "second difference {second} at {r}");
            let deriv = (s.potential(r + h) - s.potential(r - h)) / (2.0 * h);
            let expected = -s.p(r);
            assert!(
                (deriv - expected).abs() <= 1e-6 * expected.abs().max(1e-3),
                "p̂'({r}) = {deriv}, -p = {expected}"
            );
            r += 0.0137;
        }
    }

    #[test]
    fn penalty_potential_derivative_is_minus_q() {
        let h = 1e-6;
        for kind in PenaltyKind::ALL {
            let q = PenaltyLaw::new(kind, 1.0);
            for i in 0..100 {
                let r = -0.5 + 0.0311 * i as f64;
                let deriv = (q.potential(r + h) - q.potential(r - h)) / (2.0 * h);
                assert!((deriv + q.q(r)).abs() <= 1e-6, "{kind:?} at {r}");
            }
        }
    }
}
