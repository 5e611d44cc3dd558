//! Uniform P1 finite elements on both rods, assembly, and condensation of the
//! discrete energy onto the interface displacements `g1 = u1(-l)`, `g2 = u2(l)`.
//!
//! DOF ordering: rod 1 nodes left to right without the clamped node `a`, then
//! rod 2 nodes left to right without the clamped node `b`. The interface DOFs
//! are the last entry of the rod-1 block and the first entry of the rod-2 block.

use std::ops::Sub;

use thiserror::Error;

use crate::linalg::{LinalgError, SymTridiagonal};
use crate::model::{gap_theta, BodyForce, Geometry, Material};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("each rod needs at least one element (n1 = {n1}, n2 = {n2})")]
    ZeroElements { n1: usize, n2: usize },
    #[error("singular stiffness: {0}")]
    SingularSystem(#[from] LinalgError),
    #[error("DOF vector does not conform to the mesh: expected ({n1}, {n2}), got ({got1}, {got2})")]
    Nonconforming {
        n1: usize,
        n2: usize,
        got1: usize,
        got2: usize,
    },
}

/// Uniform partitions of `[a, -l]` and `[l, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    geometry: Geometry<T>,
    nodes1: Vec<T>,
    nodes2: Vec<T>,
}

impl<T: Scalar> Mesh<T> {
    pub fn uniform(geometry: &Geometry<T>, n1: usize, n2: usize) -> Result<Self, FemError> {
        if n1 == 0 || n2 == 0 {
            return Err(FemError::ZeroElements { n1, n2 });
        }
        let partition = |x0: T, x1: T, n: usize| -> Vec<T> {
            let h = (x1 - x0) / T::from_usize(n).unwrap();
            (0..=n)
                .map(|i| {
                    if i == n {
                        x1
                    } else {
                        x0 + h * T::from_usize(i).unwrap()
                    }
                })
                .collect()
        };
        Ok(Self {
            geometry: *geometry,
            nodes1: partition(geometry.a(), -geometry.l(), n1),
            nodes2: partition(geometry.l(), geometry.b(), n2),
        })
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn n1(&self) -> usize {
        self.nodes1.len() - 1
    }

    pub fn n2(&self) -> usize {
        self.nodes2.len() - 1
    }

    /// Node coordinates of rod 1, from `a` to `-l`.
    pub fn nodes1(&self) -> &[T] {
        &self.nodes1
    }

    /// Node coordinates of rod 2, from `l` to `b`.
    pub fn nodes2(&self) -> &[T] {
        &self.nodes2
    }

    pub fn h1(&self) -> T {
        self.geometry.len1() / T::from_usize(self.n1()).unwrap()
    }

    pub fn h2(&self) -> T {
        self.geometry.len2() / T::from_usize(self.n2()).unwrap()
    }
}

pub fn build_mesh<T: Scalar>(
    geometry: &Geometry<T>,
    n1: usize,
    n2: usize,
) -> Result<Mesh<T>, FemError> {
    Mesh::uniform(geometry, n1, n2)
}

/// Free nodal displacements of both rods.
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector<T> {
    rod1: Vec<T>,
    rod2: Vec<T>,
}

impl<T: Scalar> DofVector<T> {
    pub fn zeros(n1: usize, n2: usize) -> Self {
        Self {
            rod1: vec![T::zero(); n1],
            rod2: vec![T::zero(); n2],
        }
    }

    pub fn from_parts(rod1: Vec<T>, rod2: Vec<T>) -> Self {
        assert!(
            !rod1.is_empty() && !rod2.is_empty(),
            "each rod carries at least its interface DOF"
        );
        Self { rod1, rod2 }
    }

    /// Values at rod-1 nodes `x_1, ..., x_{n1} = -l`.
    pub fn rod1(&self) -> &[T] {
        &self.rod1
    }

    /// Values at rod-2 nodes `x_0 = l, ..., x_{n2-1}`.
    pub fn rod2(&self) -> &[T] {
        &self.rod2
    }

    pub fn rod1_mut(&mut self) -> &mut [T] {
        &mut self.rod1
    }

    pub fn rod2_mut(&mut self) -> &mut [T] {
        &mut self.rod2
    }

    /// `u1(-l)`.
    pub fn g1(&self) -> T {
        *self.rod1.last().unwrap()
    }

    /// `u2(l)`.
    pub fn g2(&self) -> T {
        self.rod2[0]
    }

    pub fn theta(&self, l: T) -> T {
        gap_theta(l, self.g1(), self.g2())
    }

    pub fn len(&self) -> usize {
        self.rod1.len() + self.rod2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.rod1.iter().chain(self.rod2.iter())
    }

    /// Nodal values including the clamped end nodes, paired with coordinates.
    pub fn nodal_values(&self, mesh: &Mesh<T>) -> (Vec<(T, T)>, Vec<(T, T)>) {
        let rod1 = mesh
            .nodes1()
            .iter()
            .copied()
            .zip(std::iter::once(T::zero()).chain(self.rod1.iter().copied()))
            .collect();
        let rod2 = mesh
            .nodes2()
            .iter()
            .copied()
            .zip(self.rod2.iter().copied().chain(std::iter::once(T::zero())))
            .collect();
        (rod1, rod2)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.iter()
            .zip(other.iter())
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

impl<T: Scalar> Sub for &DofVector<T> {
    type Output = DofVector<T>;

    fn sub(self, rhs: Self) -> DofVector<T> {
        assert_eq!(self.rod1.len(), rhs.rod1.len());
        assert_eq!(self.rod2.len(), rhs.rod2.len());
        DofVector {
            rod1: self.rod1.iter().zip(&rhs.rod1).map(|(a, b)| *a - *b).collect(),
            rod2: self.rod2.iter().zip(&rhs.rod2).map(|(a, b)| *a - *b).collect(),
        }
    }
}

/// Per-rod stiffness and load.
#[derive(Debug, Clone, PartialEq)]
struct RodBlock<T> {
    stiffness: SymTridiagonal<T>,
    load: Vec<T>,
    unit: SymTridiagonal<T>,
}

/// Which end of the rod carries the interface DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InterfaceEnd {
    Last,
    First,
}

impl<T: Scalar> RodBlock<T> {
    fn stiffness_pattern(n: usize, h: T, end: InterfaceEnd, coeff: T) -> SymTridiagonal<T> {
        let k = coeff / h;
        let block = [[k, -k], [-k, k]];
        let mut m = SymTridiagonal::zeros(n);
        // element e joins global nodes e and e + 1
        for e in 0..n {
            match end {
                InterfaceEnd::Last => {
                    if e == 0 {
                        m.add_diag(0, k);
                    } else {
                        m.add_block(e - 1, block);
                    }
                }
                InterfaceEnd::First => {
                    if e + 1 == n {
                        m.add_diag(e, k);
                    } else {
                        m.add_block(e, block);
                    }
                }
            }
        }
        m
    }

    fn assemble(
        nodes: &[T],
        end: InterfaceEnd,
        modulus: T,
        load_at: impl Fn(T, T) -> [T; 2],
    ) -> Self {
        let n = nodes.len() - 1;
        let h = (nodes[n] - nodes[0]) / T::from_usize(n).unwrap();
        let mut load = vec![T::zero(); n];
        for e in 0..n {
            let [l0, l1] = load_at(nodes[e], nodes[e + 1]);
            // map global node index to free index
            let (i0, i1) = match end {
                InterfaceEnd::Last => (e.checked_sub(1), Some(e)),
                InterfaceEnd::First => (Some(e), (e + 1 < n).then_some(e + 1)),
            };
            if let Some(i) = i0 {
                load[i] += l0;
            }
            if let Some(i) = i1 {
                load[i] += l1;
            }
        }
        Self {
            stiffness: Self::stiffness_pattern(n, h, end, modulus),
            load,
            unit: Self::stiffness_pattern(n, h, end, T::one()),
        }
    }
}

/// Consistent element load for a constant density.
fn constant_load<T: Scalar>(f: T) -> impl Fn(T, T) -> [T; 2] {
    move |x0, x1| {
        let half = T::lit(0.5) * f * (x1 - x0);
        [half, half]
    }
}

/// Element load by two-point Gauss quadrature.
fn gauss_load<T: Scalar>(f: impl Fn(T) -> T) -> impl Fn(T, T) -> [T; 2] {
    move |x0, x1| {
        let h = x1 - x0;
        let mid = T::lit(0.5) * (x0 + x1);
        let offset = h / (T::lit(2.0) * T::lit(3.0).sqrt());
        let w = T::lit(0.5) * h;
        let mut out = [T::zero(); 2];
        for x in [mid - offset, mid + offset] {
            let fx = f(x) * w;
            out[0] += fx * (x1 - x) / h;
            out[1] += fx * (x - x0) / h;
        }
        out
    }
}

/// Assembled per-rod stiffness matrices and loads.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem<T> {
    mesh: Mesh<T>,
    material: Material<T>,
    rod1: RodBlock<T>,
    rod2: RodBlock<T>,
}

impl<T: Scalar> DiscreteSystem<T> {
    /// Assembly for constant body forces with exact load integration.
    pub fn assemble(mesh: &Mesh<T>, material: &Material<T>, forces: &BodyForce<T>) -> Self {
        Self {
            mesh: mesh.clone(),
            material: *material,
            rod1: RodBlock::assemble(
                mesh.nodes1(),
                InterfaceEnd::Last,
                material.e1(),
                constant_load(forces.f1()),
            ),
            rod2: RodBlock::assemble(
                mesh.nodes2(),
                InterfaceEnd::First,
                material.e2(),
                constant_load(forces.f2()),
            ),
        }
    }

    /// Assembly for spatially varying densities (two-point Gauss per element).
    pub fn assemble_with_load(
        mesh: &Mesh<T>,
        material: &Material<T>,
        f1: impl Fn(T) -> T,
        f2: impl Fn(T) -> T,
    ) -> Self {
        Self {
            mesh: mesh.clone(),
            material: *material,
            rod1: RodBlock::assemble(
                mesh.nodes1(),
                InterfaceEnd::Last,
                material.e1(),
                gauss_load(f1),
            ),
            rod2: RodBlock::assemble(
                mesh.nodes2(),
                InterfaceEnd::First,
                material.e2(),
                gauss_load(f2),
            ),
        }
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn material(&self) -> &Material<T> {
        &self.material
    }

    pub fn l(&self) -> T {
        self.mesh.geometry().l()
    }

    pub fn stiffness1(&self) -> &SymTridiagonal<T> {
        &self.rod1.stiffness
    }

    pub fn stiffness2(&self) -> &SymTridiagonal<T> {
        &self.rod2.stiffness
    }

    pub fn load1(&self) -> &[T] {
        &self.rod1.load
    }

    pub fn load2(&self) -> &[T] {
        &self.rod2.load
    }

    fn check(&self, u: &DofVector<T>) -> Result<(), FemError> {
        let (n1, n2) = (self.mesh.n1(), self.mesh.n2());
        if u.rod1().len() != n1 || u.rod2().len() != n2 {
            return Err(FemError::Nonconforming {
                n1,
                n2,
                got1: u.rod1().len(),
                got2: u.rod2().len(),
            });
        }
        Ok(())
    }

    pub fn zero_dofs(&self) -> DofVector<T> {
        DofVector::zeros(self.mesh.n1(), self.mesh.n2())
    }

    /// Quadratic part of the energy, `½ uᵀAu − bᵀu`.
    pub fn elastic_energy(&self, u: &DofVector<T>) -> T {
        let half = T::lit(0.5);
        let work = |load: &[T], x: &[T]| -> T { load.iter().zip(x).map(|(b, v)| *b * *v).sum() };
        half * (self.rod1.stiffness.quad_form(u.rod1()) + self.rod2.stiffness.quad_form(u.rod2()))
            - work(&self.rod1.load, u.rod1())
            - work(&self.rod2.load, u.rod2())
    }

    pub fn theta_of(&self, u: &DofVector<T>) -> T {
        u.theta(self.l())
    }

    /// Norm induced by `∫ u′v′` over both rods.
    pub fn v_norm(&self, u: &DofVector<T>) -> Result<T, FemError> {
        self.check(u)?;
        Ok((self.rod1.unit.quad_form(u.rod1()) + self.rod2.unit.quad_form(u.rod2()))
            .max(T::zero())
            .sqrt())
    }

    /// Residual `Au − b` per rod.
    pub fn residual(&self, u: &DofVector<T>) -> (Vec<T>, Vec<T>) {
        let sub = |a: Vec<T>, b: &[T]| -> Vec<T> { a.into_iter().zip(b).map(|(x, y)| x - *y).collect() };
        (
            sub(self.rod1.stiffness.mul_vec(u.rod1()), &self.rod1.load),
            sub(self.rod2.stiffness.mul_vec(u.rod2()), &self.rod2.load),
        )
    }

    /// Interface stresses `(σ1(-l), σ2(l))` recovered as boundary fluxes from
    /// the discrete equilibrium rows; exact for P1 in 1D.
    pub fn interface_stress(&self, u: &DofVector<T>) -> (T, T) {
        let (r1, r2) = self.residual(u);
        (*r1.last().unwrap(), -r2[0])
    }

    /// Element-constant stresses `E · du/dx` on each rod.
    pub fn stress_field(&self, u: &DofVector<T>) -> Result<(Vec<T>, Vec<T>), FemError> {
        self.check(u)?;
        let (h1, h2) = (self.mesh.h1(), self.mesh.h2());
        let (e1, e2) = (self.material.e1(), self.material.e2());
        let full1: Vec<T> = std::iter::once(T::zero()).chain(u.rod1().iter().copied()).collect();
        let full2: Vec<T> = u.rod2().iter().copied().chain(std::iter::once(T::zero())).collect();
        let slopes = |v: &[T], h: T, e: T| -> Vec<T> { v.windows(2).map(|w| e * (w[1] - w[0]) / h).collect() };
        Ok((slopes(&full1, h1, e1), slopes(&full2, h2, e2)))
    }

    pub fn schur_reduce(&self) -> Result<ReducedSystem<T>, FemError> {
        ReducedSystem::from_system(self)
    }
}

pub fn assemble<T: Scalar>(
    mesh: &Mesh<T>,
    material: &Material<T>,
    forces: &BodyForce<T>,
) -> DiscreteSystem<T> {
    DiscreteSystem::assemble(mesh, material, forces)
}

/// Interior response of one rod to its interface value `g`:
/// `interior = particular − g · unit_response`.
#[derive(Debug, Clone, PartialEq)]
struct Condensation<T> {
    particular: Vec<T>,
    unit_response: Vec<T>,
    stiffness: T,
    load: T,
    offset: T,
    norm: T,
}

impl<T: Scalar> Condensation<T> {
    fn compute(block: &RodBlock<T>, end: InterfaceEnd) -> Result<Self, FemError> {
        let n = block.stiffness.dim();
        // validates positive definiteness of the whole rod block
        block.stiffness.factor()?;
        let (g, coupling_idx) = match end {
            InterfaceEnd::Last => (n - 1, n.saturating_sub(2)),
            InterfaceEnd::First => (0, 0),
        };
        if n == 1 {
            return Ok(Self {
                particular: Vec::new(),
                unit_response: Vec::new(),
                stiffness: block.stiffness.diag()[0],
                load: block.load[0],
                offset: T::zero(),
                norm: block.unit.diag()[0],
            });
        }
        let (interior, interior_load, coupling, near) = match end {
            InterfaceEnd::Last => (
                block.stiffness.leading(n - 1),
                block.load[..n - 1].to_vec(),
                block.stiffness.off()[coupling_idx],
                n - 2,
            ),
            InterfaceEnd::First => (
                block.stiffness.trailing(n - 1),
                block.load[1..].to_vec(),
                block.stiffness.off()[0],
                0,
            ),
        };
        let factor = interior.factor()?;
        let particular = factor.solve(&interior_load);
        let mut e = vec![T::zero(); n - 1];
        e[near] = coupling;
        let unit_response = factor.solve(&e);

        let stiffness = block.stiffness.diag()[g] - coupling * unit_response[near];
        let load = block.load[g] - coupling * particular[near];
        let offset = -T::lit(0.5)
            * interior_load
                .iter()
                .zip(&particular)
                .map(|(b, z)| *b * *z)
                .sum::<T>();

        // V-norm² of the unit-interface state (interior = −unit_response)
        let mut state = vec![T::zero(); n];
        match end {
            InterfaceEnd::Last => {
                for (s, z) in state.iter_mut().zip(&unit_response) {
                    *s = -*z;
                }
                state[n - 1] = T::one();
            }
            InterfaceEnd::First => {
                state[0] = T::one();
                for (s, z) in state[1..].iter_mut().zip(&unit_response) {
                    *s = -*z;
                }
            }
        }
        let norm = block.unit.quad_form(&state);
        Ok(Self {
            particular,
            unit_response,
            stiffness,
            load,
            offset,
            norm,
        })
    }

    fn interior(&self, g: T) -> impl Iterator<Item = T> + '_ {
        self.particular
            .iter()
            .zip(&self.unit_response)
            .map(move |(p, z)| *p - g * *z)
    }
}

/// The discrete energy with interior DOFs eliminated:
/// `½ gᵀSg − rᵀg + offset` over `g = (g1, g2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem<T> {
    l: T,
    rod1: Condensation<T>,
    rod2: Condensation<T>,
}

impl<T: Scalar> ReducedSystem<T> {
    fn from_system(system: &DiscreteSystem<T>) -> Result<Self, FemError> {
        Ok(Self {
            l: system.l(),
            rod1: Condensation::compute(&system.rod1, InterfaceEnd::Last)?,
            rod2: Condensation::compute(&system.rod2, InterfaceEnd::First)?,
        })
    }

    pub fn l(&self) -> T {
        self.l
    }

    pub fn natural_length(&self) -> T {
        self.l + self.l
    }

    /// Condensed stiffness `S` (diagonal: the rods only couple through the spring).
    pub fn s(&self) -> [[T; 2]; 2] {
        [
            [self.rod1.stiffness, T::zero()],
            [T::zero(), self.rod2.stiffness],
        ]
    }

    /// Condensed load `r`.
    pub fn r(&self) -> [T; 2] {
        [self.rod1.load, self.rod2.load]
    }

    pub fn offset(&self) -> T {
        self.rod1.offset + self.rod2.offset
    }

    /// `∇θ` with respect to `(g1, g2)`.
    pub fn theta_gradient(&self) -> [T; 2] {
        [-T::one(), T::one()]
    }

    pub fn theta(&self, g: [T; 2]) -> T {
        gap_theta(self.l, g[0], g[1])
    }

    /// Interface compliance `cᵀS⁻¹c` with `c = ∇θ`: the change of `θ` per unit
    /// spring force.
    pub fn compliance(&self) -> T {
        T::one() / self.rod1.stiffness + T::one() / self.rod2.stiffness
    }

    pub fn quadratic(&self, g: [T; 2]) -> T {
        let half = T::lit(0.5);
        half * (self.rod1.stiffness * g[0] * g[0] + self.rod2.stiffness * g[1] * g[1])
            - self.rod1.load * g[0]
            - self.rod2.load * g[1]
            + self.offset()
    }

    /// `Sg − r`.
    pub fn gradient(&self, g: [T; 2]) -> [T; 2] {
        [
            self.rod1.stiffness * g[0] - self.rod1.load,
            self.rod2.stiffness * g[1] - self.rod2.load,
        ]
    }

    /// `(σ1(-l), σ2(l))` of the interior-minimizing state with interface values `g`.
    pub fn interface_stress(&self, g: [T; 2]) -> (T, T) {
        let grad = self.gradient(g);
        (grad[0], -grad[1])
    }

    /// V-norm of the difference between two interior-minimizing states.
    pub fn v_norm_diff(&self, g: [T; 2], h: [T; 2]) -> T {
        let d = [g[0] - h[0], g[1] - h[1]];
        (self.rod1.norm * d[0] * d[0] + self.rod2.norm * d[1] * d[1]).sqrt()
    }

    /// Diagonal of the V-norm Gram matrix on interface values.
    pub fn norm_weights(&self) -> [T; 2] {
        [self.rod1.norm, self.rod2.norm]
    }

    /// Full DOF vector whose interior values minimize the energy for fixed `g`.
    pub fn recover_full(&self, g1: T, g2: T) -> DofVector<T> {
        let mut rod1: Vec<T> = self.rod1.interior(g1).collect();
        rod1.push(g1);
        let rod2: Vec<T> = std::iter::once(g2).chain(self.rod2.interior(g2)).collect();
        DofVector::from_parts(rod1, rod2)
    }
}
