//! Small dense complex square matrices.
//!
//! Storage is row-major. [`SquareMatrix::kron`] maps `|i⟩⊗|j⟩` to the basis
//! index `i·b.dim() + j`, which is the ordering every other module assumes.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Default entrywise tolerance for approximate comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest dimension accepted by [`SquareMatrix::determinant`].
pub const MAX_DET_DIM: usize = 8;

const EIG_MAX_ITER: usize = 2000;
const EIG_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl SquareMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLength {
                expected: 1,
                actual: 0,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidLength {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(SquareMatrix { dim, data: entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        SquareMatrix { dim, data }
    }

    /// Builds a matrix from real row-major entries scaled by `scale`.
    pub fn from_real(dim: usize, entries: &[f64], scale: f64) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self::from_fn(dim, |i, j| Complex::new(entries[i * dim + j] * scale, 0.0))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diag(values: &[Complex]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Complex> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    fn check_same_dim(&self, other: &SquareMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(SquareMatrix { dim: n, data: out })
    }

    /// Product of a sequence of matrices, left to right.
    pub fn product<'a>(mut factors: impl Iterator<Item = &'a SquareMatrix>) -> Result<SquareMatrix> {
        let first = factors
            .next()
            .ok_or_else(|| Error::InvalidParams("empty matrix product".into()))?;
        factors.try_fold(first.clone(), |acc, m| acc.matmul(m))
    }

    pub fn kron(&self, other: &SquareMatrix) -> SquareMatrix {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = vec![ZERO; n * n];
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a == ZERO {
                    continue;
                }
                for ib in 0..nb {
                    let row = ia * nb + ib;
                    for jb in 0..nb {
                        out[row * n + ja * nb + jb] = a * other.data[ib * nb + jb];
                    }
                }
            }
        }
        SquareMatrix { dim: n, data: out }
    }

    /// Tensor power `self^{⊗k}`; `k = 0` gives the 1×1 identity.
    pub fn kron_power(&self, k: usize) -> SquareMatrix {
        (0..k).fold(SquareMatrix::identity(1), |acc, _| acc.kron(self))
    }

    pub fn dagger(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_same_dim(other)?;
        Ok(SquareMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_same_dim(other)?;
        Ok(SquareMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &SquareMatrix) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &SquareMatrix, tol: f64) -> bool {
        matches!(self.max_abs_diff(other), Ok(d) if d <= tol)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).norm() <= tol))
    }

    /// Max-norm of `a†a − I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    s -= ONE;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Determinant by cofactor expansion up to 4×4 and LU with partial
    /// pivoting up to [`MAX_DET_DIM`].
    pub fn determinant(&self) -> Result<Complex> {
        match self.dim {
            0 => unreachable!(),
            1..=4 => Ok(cofactor_det(&self.data, self.dim)),
            n if n <= MAX_DET_DIM => Ok(lu_det(self.data.clone(), n)),
            n => Err(Error::UnsupportedSize {
                dim: n,
                max: MAX_DET_DIM,
            }),
        }
    }

    /// Eigenvalues of a 4×4 matrix, in no particular order.
    ///
    /// The characteristic polynomial is assembled from `tr(A^k)` with
    /// Newton's identities and solved by Durand–Kerner iteration. Clusters of
    /// roots that are numerically a single multiple root are replaced by their
    /// mean and refined on the matching derivative; the rest get Newton
    /// polishing on the polynomial itself.
    pub fn eigenvalues4(&self) -> Result<[Complex; 4]> {
        if self.dim != 4 {
            return Err(Error::DimensionMismatch {
                left: 4,
                right: self.dim,
            });
        }
        let poly = char_poly4(self)?;
        let roots = polynomial_roots(&poly)?;
        Ok([roots[0], roots[1], roots[2], roots[3]])
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = Complex;

    fn index(&self, (row, col): (usize, usize)) -> &Complex {
        &self.data[row * self.dim + col]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn cofactor_det(m: &[Complex], n: usize) -> Complex {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut det = ZERO;
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for col in 0..n {
                let a = m[col];
                if a == ZERO {
                    continue;
                }
                minor.clear();
                for r in 1..n {
                    for c in (0..n).filter(|&c| c != col) {
                        minor.push(m[r * n + c]);
                    }
                }
                let term = a * cofactor_det(&minor, n - 1);
                if col % 2 == 0 {
                    det += term;
                } else {
                    det -= term;
                }
            }
            det
        }
    }
}

fn lu_det(mut m: Vec<Complex>, n: usize) -> Complex {
    let mut det = ONE;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&a, &b| m[a * n + k].norm().total_cmp(&m[b * n + k].norm()))
            .unwrap();
        if m[pivot * n + k] == ZERO {
            return ZERO;
        }
        if pivot != k {
            for c in 0..n {
                m.swap(k * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for r in k + 1..n {
            let factor = m[r * n + k] / p;
            if factor == ZERO {
                continue;
            }
            for c in k..n {
                let v = m[k * n + c];
                m[r * n + c] -= factor * v;
            }
        }
    }
    det
}

/// Monic characteristic polynomial, coefficients in ascending degree.
fn char_poly4(a: &SquareMatrix) -> Result<[Complex; 5]> {
    let a2 = a.matmul(a)?;
    let a3 = a2.matmul(a)?;
    let a4 = a3.matmul(a)?;
    let p1 = a.trace();
    let p2 = a2.trace();
    let p3 = a3.trace();
    let p4 = a4.trace();
    let e1 = p1;
    let e2 = (e1 * p1 - p2) / 2.0;
    let e3 = (e2 * p1 - e1 * p2 + p3) / 3.0;
    let e4 = (e3 * p1 - e2 * p2 + e1 * p3 - p4) / 4.0;
    Ok([e4, -e3, e2, -e1, ONE])
}

/// Value of the `order`-th derivative of the polynomial at `z`.
fn poly_derivative(coeffs: &[Complex], order: usize, z: Complex) -> Complex {
    let mut acc = ZERO;
    for k in (order..coeffs.len()).rev() {
        let falling: f64 = ((k - order + 1)..=k).map(|x| x as f64).product();
        acc = acc * z + coeffs[k] * falling;
    }
    acc
}

/// Scale of the terms entering the `order`-th derivative at `z`, used to make
/// residuals relative.
fn poly_derivative_scale(coeffs: &[Complex], order: usize, z: Complex) -> f64 {
    let r = z.norm();
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let falling: f64 = ((k - order + 1)..=k).map(|x| x as f64).product();
        acc = acc * r + coeffs[k].norm() * falling;
    }
    acc
}

fn relative_residual(coeffs: &[Complex], z: Complex) -> f64 {
    let scale = poly_derivative_scale(coeffs, 0, z);
    if scale == 0.0 {
        return 0.0;
    }
    poly_derivative(coeffs, 0, z).norm() / scale
}

fn newton_polish(coeffs: &[Complex], order: usize, mut z: Complex) -> Complex {
    let mut last_step = f64::INFINITY;
    for _ in 0..50 {
        let f = poly_derivative(coeffs, order, z);
        let df = poly_derivative(coeffs, order + 1, z);
        if df == ZERO || f == ZERO {
            break;
        }
        let step = f / df;
        // stop once corrections stop shrinking
        if step.norm() >= last_step {
            break;
        }
        last_step = step.norm();
        z -= step;
        if step.norm() <= 1e-17 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Roots of a monic polynomial given in ascending coefficient order.
fn polynomial_roots(coeffs: &[Complex]) -> Result<Vec<Complex>> {
    let degree = coeffs.len() - 1;
    let radius = 1.0 + coeffs[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex> = (0..degree).map(|k| seed.powu(k as u32 + 1) * radius).collect();

    for _ in 0..EIG_MAX_ITER {
        let mut largest = 0.0f64;
        for k in 0..degree {
            let zk = roots[k];
            let mut denom = ONE;
            for (j, &zj) in roots.iter().enumerate() {
                if j != k {
                    denom *= zk - zj;
                }
            }
            if denom == ZERO {
                // coincident iterates; nudge apart
                roots[k] += Complex::new(1e-9, 1e-9) * radius;
                largest = f64::INFINITY;
                continue;
            }
            let step = poly_derivative(coeffs, 0, zk) / denom;
            roots[k] = zk - step;
            largest = largest.max(step.norm());
        }
        if largest <= 1e-15 * radius {
            break;
        }
    }

    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let clusters = cluster_roots(&roots, 1e-3 * scale);
    let mut refined = Vec::with_capacity(degree);
    for cluster in clusters {
        let members: Vec<Complex> = cluster.iter().map(|&i| roots[i]).collect();
        let k = members.len();
        if k > 1 {
            let mean = members.iter().sum::<Complex>() / k as f64;
            let center = newton_polish(coeffs, k - 1, mean);
            if is_multiple_root(coeffs, center, k) {
                refined.extend(std::iter::repeat_n(center, k));
                continue;
            }
        }
        refined.extend(members.into_iter().map(|z| newton_polish(coeffs, 0, z)));
    }

    let residuals: Vec<f64> = refined.iter().map(|&z| relative_residual(coeffs, z)).collect();
    if residuals.iter().any(|r| !(*r <= EIG_RESIDUAL_TOL)) {
        return Err(Error::NotConverged { residuals });
    }
    Ok(refined)
}

fn is_multiple_root(coeffs: &[Complex], z: Complex, multiplicity: usize) -> bool {
    (0..multiplicity).all(|order| {
        let scale = poly_derivative_scale(coeffs, order, z);
        scale == 0.0 || poly_derivative(coeffs, order, z).norm() <= 1e-11 * scale
    })
}

/// Groups indices of roots that lie within `radius` of each other
/// (transitively).
fn cluster_roots(roots: &[Complex], radius: f64) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (from, to) = (label[j], label[i]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups.iter_mut().find(|g| label[g[0]] == label[i]) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}
