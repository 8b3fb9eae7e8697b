//! Dense kernels: complex vector ops, a column-major complex matrix, a Jacobi
//! eigensolver for small symmetric systems, and power iteration.

use crate::scalar::Scalar;
use num_complex::Complex;

/// Conjugated inner product `a^H b`.
pub fn cdot<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.conj() * *y;
    }
    acc
}

/// Squared Euclidean norm `||a||²`.
pub fn norm_sq<T: Scalar>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `y += alpha * x` with a real coefficient.
pub fn axpy_real<T: Scalar>(alpha: T, x: &[Complex<T>], y: &mut [Complex<T>]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + *xi * alpha;
    }
}

/// Column-major complex matrix; column `j` is a contiguous slice.
#[derive(Clone, Debug)]
pub struct ColMat<T: Scalar> {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ColMat<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![Complex::new(T::zero(), T::zero()); n_rows * n_cols] }
    }

    pub fn col(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// `out = M q` for a real coefficient vector q (linear combination of columns).
    pub fn mul_real_vec(&self, q: &[T], out: &mut [Complex<T>]) {
        debug_assert_eq!(q.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        out.fill(Complex::new(T::zero(), T::zero()));
        for (j, &qj) in q.iter().enumerate() {
            if qj != T::zero() {
                axpy_real(qj, self.col(j), out);
            }
        }
    }
}

/// Symmetric real matrix-vector product; `a` is row-major `n × n`.
pub fn sym_matvec<T: Scalar>(a: &[T], n: usize, x: &[T], out: &mut [T]) {
    debug_assert_eq!(a.len(), n * n);
    for (i, o) in out.iter_mut().enumerate() {
        let row = &a[i * n..(i + 1) * n];
        *o = row.iter().zip(x).map(|(&aij, &xj)| aij * xj).sum();
    }
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the orthonormal eigenvector matrix V (column-major,
/// column i pairs with eigenvalue i). Intended for systems of a few dozen
/// rows at most; cost is O(n³) per sweep.
pub fn jacobi_eigh<T: Scalar>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    // v starts as the identity, accumulated rotations make it the eigenbasis.
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + m[i * n + j] * m[i * n + j];
            }
        }
        let scale: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<T>() + off + off;
        if off + off <= eps * eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::c(2.0) * apq);
                // stable tangent of the rotation angle
                let t = {
                    let s = theta.abs() + (theta * theta + T::one()).sqrt();
                    let t = T::one() / s;
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i * n + p];
                    let miq = m[i * n + q];
                    m[i * n + p] = c * mip - s * miq;
                    m[i * n + q] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[p * n + j];
                    let mqj = m[q * n + j];
                    m[p * n + j] = c * mpj - s * mqj;
                    m[q * n + j] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| m[i * n + i]).collect();
    // v is row-major with eigenvector i in column i; convert to column-major.
    let mut vc = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            vc[j * n + i] = v[i * n + j];
        }
    }
    (eig, vc)
}

/// Minimum-norm least-squares solution of the symmetric system `a x = b`
/// through the eigendecomposition, zeroing eigenvalues at or below `cut`.
pub fn sym_lstsq<T: Scalar>(a: &[T], n: usize, b: &[T], cut: T) -> Vec<T> {
    let (eig, v) = jacobi_eigh(a, n);
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        if eig[i].abs() <= cut {
            continue;
        }
        let col = &v[i * n..(i + 1) * n];
        let proj: T = col.iter().zip(b).map(|(&vi, &bi)| vi * bi).sum();
        let w = proj / eig[i];
        for (xj, &vj) in x.iter_mut().zip(col) {
            *xj = *xj + w * vj;
        }
    }
    x
}

/// Largest-eigenvalue estimate of a symmetric positive semidefinite operator
/// by power iteration from the deterministic start `1/√n`, capped at
/// `max_iters` with early exit on relative change below `rel_tol`.
pub fn power_iteration<T: Scalar>(
    n: usize,
    mut apply: impl FnMut(&[T], &mut [T]),
    max_iters: usize,
    rel_tol: T,
) -> T {
    let inv = T::one() / T::from_count(n).sqrt();
    let mut x = vec![inv; n];
    let mut y = vec![T::zero(); n];
    let mut lambda = T::zero();
    for _ in 0..max_iters {
        apply(&x, &mut y);
        let norm = y.iter().map(|&t| t * t).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        let next = y.iter().zip(&x).map(|(&yi, &xi)| yi * xi).sum::<T>();
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (next - lambda).abs() <= rel_tol * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}
