//! Convexified subproblem data built at an anchor beamformer v_ref.
//!
//! Linearizing each SNR constraint at v_ref yields the convex feasible set
//! {v : 2Re(f_k^H v) ≥ d_k} with f_k = g_k(g_k^H v_ref) and
//! d_k = γ + |g_k^H v_ref|², an inner approximation of the true constraint
//! set that touches it at v_ref. Minimizing ‖v‖² over it has the
//! nonnegative-multiplier dual: minimize Υ(q) = ‖F q‖² − dᵀq over q ⪰ 0,
//! whose optimum matches the subproblem optimum (Slater holds at v_ref) and
//! whose solution recovers the primal minimizer v = F q. The Gram form uses
//! A = 2·Re(F^H F), so Υ(q) = qᵀA q/2 − dᵀq and ∇Υ(q) = A q − d; the
//! coordinate Lipschitz constants are the diagonal L_k = A_kk = 2‖f_k‖².

use crate::error::{Error, Result};
use crate::linalg::{cdot, norm_sq, ColMat};
use crate::model::{Beamformer, ProblemInstance};
use crate::scalar::Scalar;
use num_complex::Complex;
use rayon::prelude::*;

/// Whether to precompute the K×K Gram matrix A = 2Re(F^H F).
///
/// With the Gram in memory a coordinate gradient costs O(K); without it the
/// solvers fall back to maintained F-side caches at O(N) per coordinate.
/// `Auto` precomputes while K² stays within a memory budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramMode {
    Precompute,
    MatrixFree,
    Auto,
}

/// Default `Auto` budget: number of Gram entries allowed in memory.
pub const GRAM_ENTRY_BUDGET: usize = 200_000_000;

#[derive(Clone, Debug)]
pub struct SurrogateModel<T: Scalar> {
    /// N×K, column k holds f_k = g_k·(g_k^H v_ref).
    pub f: ColMat<T>,
    /// d_k = γ + |g_k^H v_ref|² ≥ γ > 0.
    pub d: Vec<T>,
    /// Coordinate Lipschitz constants L_k = 2‖f_k‖².
    pub lips: Vec<T>,
    /// A = 2Re(F^H F), row-major K×K, exactly symmetric; column l of A is
    /// the contiguous slice `gram[l*K..(l+1)*K]`.
    pub gram: Option<Vec<T>>,
}

impl<T: Scalar> SurrogateModel<T> {
    pub fn n_antennas(&self) -> usize {
        self.f.n_rows
    }

    pub fn n_users(&self) -> usize {
        self.f.n_cols
    }

    /// Υ(q) = ‖Fq‖² − dᵀq, evaluated through the Gram matrix when present.
    pub fn dual_objective(&self, q: &[T]) -> T {
        let k = self.n_users();
        debug_assert_eq!(q.len(), k);
        let dq: T = self.d.iter().zip(q).map(|(&di, &qi)| di * qi).sum();
        match &self.gram {
            Some(a) => {
                let mut quad = T::zero();
                for (i, &qi) in q.iter().enumerate() {
                    if qi == T::zero() {
                        continue;
                    }
                    let row = &a[i * k..(i + 1) * k];
                    let aq: T = row.iter().zip(q).map(|(&aij, &qj)| aij * qj).sum();
                    quad = quad + qi * aq;
                }
                quad / T::c(2.0) - dq
            }
            None => {
                let mut fq = vec![Complex::new(T::zero(), T::zero()); self.n_antennas()];
                self.f.mul_real_vec(q, &mut fq);
                norm_sq(&fq) - dq
            }
        }
    }

    /// ∇Υ(q) = A q − d (computed as 2Re(F^H F q) − d in matrix-free mode).
    pub fn dual_gradient(&self, q: &[T]) -> Vec<T> {
        let k = self.n_users();
        debug_assert_eq!(q.len(), k);
        match &self.gram {
            Some(a) => (0..k)
                .map(|i| {
                    let row = &a[i * k..(i + 1) * k];
                    let aq: T = row.iter().zip(q).map(|(&aij, &qj)| aij * qj).sum();
                    aq - self.d[i]
                })
                .collect(),
            None => {
                let mut fq = vec![Complex::new(T::zero(), T::zero()); self.n_antennas()];
                self.f.mul_real_vec(q, &mut fq);
                (0..k)
                    .map(|i| T::c(2.0) * cdot(self.f.col(i), &fq).re - self.d[i])
                    .collect()
            }
        }
    }

    /// Single entry of the gradient. O(K) with the Gram matrix; O(NK) without
    /// (recomputes Fq — the solvers keep incremental caches instead).
    pub fn dual_gradient_coord(&self, q: &[T], l: usize) -> Result<T> {
        let k = self.n_users();
        if l >= k {
            return Err(Error::CoordIndexOutOfRange { index: l, n_coords: k });
        }
        match &self.gram {
            Some(a) => {
                let row = &a[l * k..(l + 1) * k];
                let aq: T = row.iter().zip(q).map(|(&aij, &qj)| aij * qj).sum();
                Ok(aq - self.d[l])
            }
            None => {
                let mut fq = vec![Complex::new(T::zero(), T::zero()); self.n_antennas()];
                self.f.mul_real_vec(q, &mut fq);
                Ok(T::c(2.0) * cdot(self.f.col(l), &fq).re - self.d[l])
            }
        }
    }

    /// Primal recovery v = F q.
    pub fn recover_beamformer(&self, q: &[T]) -> Beamformer<T> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.n_antennas()];
        self.f.mul_real_vec(q, &mut v);
        v
    }

    /// Margins of the linearized constraints: 2Re(f_k^H v) − d_k per user.
    pub fn margins(&self, v: &[Complex<T>]) -> Vec<T> {
        (0..self.n_users())
            .map(|k| T::c(2.0) * cdot(self.f.col(k), v).re - self.d[k])
            .collect()
    }

    /// Scale `v` onto the linearized-feasible set: s = max_k d_k/(2Re(f_k^H v)).
    /// Fails if any alignment 2Re(f_k^H v) is nonpositive — such a point
    /// cannot be made feasible by scaling.
    pub fn scale_to_feasible(&self, v: &[Complex<T>]) -> Result<(Beamformer<T>, T)> {
        let mut s = T::neg_infinity();
        for k in 0..self.n_users() {
            let align = T::c(2.0) * cdot(self.f.col(k), v).re;
            if !(align > T::zero()) {
                return Err(Error::NotScalable);
            }
            s = s.max(self.d[k] / align);
        }
        let scaled = v.iter().map(|x| *x * s).collect();
        Ok((scaled, s))
    }

    /// Optimality certificate at q: recover v = Fq, scale it feasible, and
    /// report gap = ‖s·v‖² + Υ(q). Weak duality makes the gap nonnegative;
    /// it vanishes exactly at the dual optimum.
    pub fn duality_gap(&self, q: &[T]) -> Result<GapReport<T>> {
        let v = self.recover_beamformer(q);
        let (sv, scale) = self.scale_to_feasible(&v)?;
        let primal = norm_sq(&sv);
        Ok(GapReport { gap: primal + self.dual_objective(q), scaled_primal_power: primal, scale })
    }
}

/// Output of [`SurrogateModel::duality_gap`].
#[derive(Clone, Copy, Debug)]
pub struct GapReport<T: Scalar> {
    pub gap: T,
    pub scaled_primal_power: T,
    pub scale: T,
}

/// Build the subproblem data at `v_ref`. The Gram matrix is computed when
/// `mode` asks for it (or fits the budget under `Auto`); columns of F and
/// entries of A are independent, so the build parallelizes without affecting
/// the result.
pub fn build_surrogate<T: Scalar>(
    inst: &ProblemInstance<T>,
    v_ref: &[Complex<T>],
    mode: GramMode,
) -> Result<SurrogateModel<T>> {
    let n = inst.n_antennas();
    let k = inst.n_users();
    if v_ref.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v_ref.len() });
    }
    if norm_sq(v_ref) == T::zero() {
        return Err(Error::DegenerateAnchor);
    }
    let gamma = inst.snr_target();
    let mut f = ColMat::zeros(n, k);
    let mut d = vec![T::zero(); k];
    let mut lips = vec![T::zero(); k];
    for j in 0..k {
        let g = inst.channel(j);
        let a = cdot(g, v_ref); // g_j^H v_ref
        let col = f.col_mut(j);
        for (c, gi) in col.iter_mut().zip(g) {
            *c = *gi * a;
        }
        d[j] = gamma + a.norm_sqr();
        lips[j] = T::c(2.0) * norm_sq(col);
    }
    let with_gram = match mode {
        GramMode::Precompute => true,
        GramMode::MatrixFree => false,
        GramMode::Auto => k.saturating_mul(k) <= GRAM_ENTRY_BUDGET,
    };
    let gram = with_gram.then(|| {
        let mut a = vec![T::zero(); k * k];
        // fill the upper triangle (row-parallel), then mirror exactly
        a.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            for j in i..k {
                row[j] = T::c(2.0) * cdot(f.col(i), f.col(j)).re;
            }
        });
        for i in 0..k {
            for j in (i + 1)..k {
                a[j * k + i] = a[i * k + j];
            }
        }
        a
    });
    Ok(SurrogateModel { f, d, lips, gram })
}
