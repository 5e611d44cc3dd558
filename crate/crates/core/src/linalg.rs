//! Small dense and tridiagonal linear algebra used by assembly and condensation.

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular or not positive definite (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Scalar> SymTridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![T::zero(); n],
            off: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn from_parts(diag: Vec<T>, off: Vec<T>) -> Result<Self, LinalgError> {
        if off.len() + 1 != diag.len() && !(diag.is_empty() && off.is_empty()) {
            return Err(LinalgError::Dimension {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            T::zero()
        }
    }

    /// Adds a 2x2 element block coupling rows `i` and `i + 1`.
    pub(crate) fn add_block(&mut self, i: usize, k: [[T; 2]; 2]) {
        self.diag[i] += k[0][0];
        self.diag[i + 1] += k[1][1];
        self.off[i] += k[0][1];
    }

    pub(crate) fn add_diag(&mut self, i: usize, v: T) {
        self.diag[i] += v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            acc += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                acc += T::lit(2.0) * self.off[i] * x[i] * x[i + 1];
            }
        }
        acc
    }

    /// Leading principal submatrix of size `k`.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            diag: self.diag[..k].to_vec(),
            off: self.off[..k.saturating_sub(1)].to_vec(),
        }
    }

    /// Trailing principal submatrix of size `k`.
    pub fn trailing(&self, k: usize) -> Self {
        let n = self.dim();
        Self {
            diag: self.diag[n - k..].to_vec(),
            off: self.off[(n - k).min(self.off.len())..].to_vec(),
        }
    }

    /// `LDLᵀ` factorization; fails unless every pivot is positive.
    pub fn factor(&self) -> Result<LdlFactor<T>, LinalgError> {
        let n = self.dim();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut pivot = self.diag[i];
            if i > 0 {
                let li = self.off[i - 1] / d[i - 1];
                pivot -= li * self.off[i - 1];
                l.push(li);
            }
            if !(pivot > T::zero()) || !pivot.is_finite() {
                return Err(LinalgError::Singular {
                    row: i,
                    pivot: pivot.as_f64(),
                });
            }
            d.push(pivot);
        }
        Ok(LdlFactor { d, l })
    }

    pub fn is_symmetric(&self) -> bool {
        // band storage is symmetric by construction
        true
    }
}

/// Factor `A = L D Lᵀ` of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    d: Vec<T>,
    l: Vec<T>,
}

impl<T: Scalar> LdlFactor<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.d.len();
        debug_assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in 1..n {
            let li = self.l[i - 1];
            let prev = x[i - 1];
            x[i] -= li * prev;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.l[i] * next;
        }
        x
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }
}

/// Solves a 2x2 system by Cramer's rule.
pub fn solve2<T: Scalar>(m: [[T; 2]; 2], rhs: [T; 2]) -> Result<[T; 2], LinalgError> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs().max(m[1][1].abs()).max(T::min_positive_value());
    if det.abs() <= T::epsilon() * scale * scale || !det.is_finite() {
        return Err(LinalgError::Singular {
            row: 1,
            pivot: det.as_f64(),
        });
    }
    Ok([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Solves a 3x3 system by Gaussian elimination with partial pivoting.
pub fn solve3<T: Scalar>(m: [[T; 3]; 3], rhs: [T; 3]) -> Result<[T; 3], LinalgError> {
    let mut a = [[T::zero(); 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = rhs[i];
    }
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        a.swap(col, pivot_row);
        let p = a[col][col];
        if p.abs() <= T::epsilon() * scale || !p.is_finite() {
            return Err(LinalgError::Singular {
                row: col,
                pivot: p.as_f64(),
            });
        }
        for row in col + 1..3 {
            let f = a[row][col] / p;
            for k in col..4 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut acc = a[i][3];
        for k in i + 1..3 {
            acc -= a[i][k] * x[k];
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}

pub fn dot2<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

pub fn mat2_vec<T: Scalar>(m: [[T; 2]; 2], v: [T; 2]) -> [T; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Largest eigenvalue of a symmetric 2x2 matrix.
pub fn sym2_max_eigenvalue<T: Scalar>(m: [[T; 2]; 2]) -> T {
    let half_trace = T::lit(0.5) * (m[0][0] + m[1][1]);
    let half_diff = T::lit(0.5) * (m[0][0] - m[1][1]);
    half_trace + (half_diff * half_diff + m[0][1] * m[1][0]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal<f64> {
        SymTridiagonal::from_parts(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn ldl_solves_laplacian() {
        let a = laplacian(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_fails_to_factor() {
        let a = SymTridiagonal::from_parts(vec![1.0, 1.0], vec![2.0]).unwrap();
        assert!(matches!(a.factor(), Err(LinalgError::Singular { row: 1, .. })));
    }

    #[test]
    fn quad_form_matches_mul() {
        let a = laplacian(5);
        let x = [0.3, -1.0, 2.0, 0.5, 0.1];
        let ax = a.mul_vec(&x);
        let direct: f64 = ax.iter().zip(&x).map(|(p, q)| p * q).sum();
        assert!((direct - a.quad_form(&x)).abs() < 1e-14);
    }

    #[test]
    fn sub_blocks() {
        let a = SymTridiagonal::from_parts(vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(a.leading(2).diag(), &[1.0, 2.0]);
        assert_eq!(a.leading(2).off(), &[5.0]);
        assert_eq!(a.trailing(2).diag(), &[3.0, 4.0]);
        assert_eq!(a.trailing(2).off(), &[7.0]);
        assert_eq!(a.trailing(1).off().len(), 0);
        assert_eq!(a.get(2, 1), 6.0);
        assert_eq!(a.get(0, 3), 0.0);
    }

    #[test]
    fn dense_solves() {
        let x = solve2::<f64>([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve2([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_err());
        let y = solve3::<f64>(
            [[2.0, 0.0, -1.0], [0.0, 2.0, 1.0], [-1.0, 1.0, 0.0]],
            [0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!((2.0 * y[0] - y[2]).abs() < 1e-15);
        assert!((2.0 * y[1] + y[2]).abs() < 1e-15);
        assert!((-y[0] + y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_eigenvalue() {
        assert!((sym2_max_eigenvalue::<f64>([[2.0, 0.0], [0.0, 3.0]]) - 3.0).abs() < 1e-15);
        assert!((sym2_max_eigenvalue::<f64>([[2.0, 1.0], [1.0, 2.0]]) - 3.0).abs() < 1e-15);
    }
}
