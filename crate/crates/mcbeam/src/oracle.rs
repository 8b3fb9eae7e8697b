//! Ground-truth solvers for the dual subproblem, used to certify the
//! iterative methods.
//!
//! [`active_set_solve`] brute-forces the KKT system: it enumerates every
//! support S ⊆ {1..K}, solves the stationarity block A_SS·q_S = d_S, and
//! keeps the feasible candidate with the smallest Υ. Exponential in K, so
//! it is gated to K ≤ 14 and meant for validating the iterative solvers at
//! small scale. [`reference_solve`] is the medium-scale fallback: projected
//! gradient driven to a tight KKT residual rather than an objective-change
//! test, so its output quality is stated directly by the residual.

use crate::error::{Error, Result};
use crate::linalg::{sym_lstsq, sym_matvec};
use crate::scalar::Scalar;
use crate::solvers::full_lipschitz;
use crate::surrogate::SurrogateModel;
use rayon::prelude::*;

pub const ENUMERATION_LIMIT: usize = 14;

#[derive(Clone, Debug)]
pub struct OracleResult<T: Scalar> {
    /// Optimal multipliers; entries outside `active_set` are exactly 0.
    pub q_star: Vec<T>,
    /// Υ(q_star).
    pub objective: T,
    /// Support of the reported solution, ascending.
    pub active_set: Vec<usize>,
    /// max over coordinates of the violation of q ⪰ 0, ∇Υ(q) ⪰ 0, and
    /// q_j·[∇Υ(q)]_j = 0.
    pub kkt_residual: T,
    /// Gradient steps taken (0 for the direct enumeration).
    pub iterations: usize,
    /// False only for a `reference_solve` stopped by its iteration cap.
    pub converged: bool,
}

/// Worst complementarity-system violation at (q, g = ∇Υ(q)): for each
/// coordinate the natural residual |min(q_j, g_j)|, the complementarity
/// product |q_j·g_j|, and the orthant violation max(0, −q_j); maximum over
/// all of them. Zero exactly at a KKT point of min_{q ⪰ 0} Υ.
fn kkt_residual<T: Scalar>(q: &[T], grad: &[T]) -> T {
    q.iter().zip(grad).fold(T::zero(), |worst, (&qi, &gi)| {
        worst
            .max(qi.min(gi).abs())
            .max((qi * gi).abs())
            .max((-qi).max(T::zero()))
    })
}

/// Exhaustive active-set enumeration for min_{q ⪰ 0} Υ(q).
///
/// Every support is tried; singular stationarity blocks are solved in the
/// least-squares sense with a pseudo-inverse cut of 1e−12·max(diag A_SS).
/// A candidate is accepted when its multipliers are nonnegative, the
/// off-support gradient satisfies [Aq − d]_j ≥ −1e−9, and its KKT residual
/// is small (which also rejects inconsistent singular blocks). Ties in Υ
/// within 1e−12 go to the lexicographically smallest support.
pub fn active_set_solve<T: Scalar>(
    model: &SurrogateModel<T>,
    k_limit: usize,
) -> Result<OracleResult<T>> {
    let k = model.n_users();
    if k > k_limit {
        return Err(Error::EnumerationTooLarge { k, limit: k_limit });
    }
    let a = model.gram.as_ref().ok_or(Error::GramRequired)?;
    let d = &model.d;
    let dmax = d.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let accept_tol = T::c(1e-8) * (T::one() + dmax);

    struct Candidate<T> {
        support: Vec<usize>,
        q: Vec<T>,
        objective: T,
        residual: T,
        accepted: bool,
    }

    let evaluate = |mask: usize| -> Candidate<T> {
        let support: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let s = support.len();
        // stationarity block A_SS q_S = d_S
        let mut a_ss = vec![T::zero(); s * s];
        let mut d_s = vec![T::zero(); s];
        let mut max_diag = T::zero();
        for (r, &i) in support.iter().enumerate() {
            d_s[r] = d[i];
            max_diag = max_diag.max(a[i * k + i]);
            for (c, &j) in support.iter().enumerate() {
                a_ss[r * s + c] = a[i * k + j];
            }
        }
        let q_s = sym_lstsq(&a_ss, s, &d_s, T::c(1e-12) * max_diag);
        let mut q = vec![T::zero(); k];
        for (r, &i) in support.iter().enumerate() {
            q[i] = q_s[r];
        }
        let mut grad = vec![T::zero(); k];
        sym_matvec(a, k, &q, &mut grad);
        for (g, &di) in grad.iter_mut().zip(d) {
            *g -= di;
        }
        let residual = kkt_residual(&q, &grad);
        let accepted = q_s.iter().all(|&x| x >= T::zero())
            && (0..k)
                .filter(|j| mask >> j & 1 == 0)
                .all(|j| grad[j] >= T::c(-1e-9))
            && residual <= accept_tol;
        let objective = model.dual_objective(&q);
        Candidate { support, q, objective, residual, accepted }
    };

    let candidates: Vec<Candidate<T>> = (0..(1usize << k)).into_par_iter().map(evaluate).collect();

    let tie = T::c(1e-12);
    let mut best: Option<&Candidate<T>> = None;
    let mut nearest: Option<&Candidate<T>> = None; // for the degenerate error
    for cand in &candidates {
        if nearest.as_ref().is_none_or(|n| cand.residual < n.residual) {
            nearest = Some(cand);
        }
        if !cand.accepted {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                cand.objective < b.objective - tie
                    || ((cand.objective - b.objective).abs() <= tie && cand.support < b.support)
            }
        };
        if better {
            best = Some(cand);
        }
    }
    match best {
        Some(c) => Ok(OracleResult {
            q_star: c.q.clone(),
            objective: c.objective,
            active_set: c.support.clone(),
            kkt_residual: c.residual,
            iterations: 0,
            converged: true,
        }),
        None => {
            let n = nearest.expect("enumeration covers at least the empty support");
            Err(Error::OracleDegenerate {
                best_objective: n.objective.to_f64().unwrap_or(f64::NAN),
                best_residual: n.residual.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Tight-tolerance projected gradient for sizes past the enumeration limit.
///
/// Runs the same iteration as `pgd_solve` but stops on the KKT residual
/// itself, so a converged result carries `kkt_residual ≤ tol` by
/// construction (defaults: tol = 1e−10, max_iters = 10⁶).
pub fn reference_solve<T: Scalar>(
    model: &SurrogateModel<T>,
    tol: T,
    max_iters: usize,
) -> Result<OracleResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be positive".into()));
    }
    let k = model.n_users();
    let lf = full_lipschitz(model);
    if !(lf > T::zero()) {
        return Err(Error::DegenerateSurrogate(
            "all constraint columns vanish at the anchor; the dual is unbounded".into(),
        ));
    }
    let mut q = vec![T::zero(); k];
    let mut converged = false;
    let mut residual;
    let mut steps = 0;
    loop {
        let grad = model.dual_gradient(&q);
        residual = kkt_residual(&q, &grad);
        if residual <= tol {
            converged = true;
            break;
        }
        if steps >= max_iters {
            break;
        }
        for (qi, g) in q.iter_mut().zip(&grad) {
            *qi = (*qi - *g / lf).max(T::zero());
        }
        steps += 1;
    }
    Ok(OracleResult {
        objective: model.dual_objective(&q),
        active_set: (0..k).filter(|&j| q[j] > T::zero()).collect(),
        kkt_residual: residual,
        iterations: steps,
        q_star: q,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cdot, ColMat};
    use crate::model::{feasible_init, generate_instance, ProblemInstance};
    use crate::surrogate::{build_surrogate, GramMode};
    use num_complex::Complex;
    use rand::Rng;

    fn scalar_model() -> SurrogateModel<f64> {
        let inst = ProblemInstance::new(1, 1, vec![Complex::new(1.0, 0.0)], 1.0).unwrap();
        build_surrogate(&inst, &[Complex::new(1.0, 0.0)], GramMode::Precompute).unwrap()
    }

    fn random_model(n: usize, k: usize, seed: u64) -> SurrogateModel<f64> {
        let inst = generate_instance(n, k, -90.0, -80.0, 10.0, seed).unwrap();
        let v = feasible_init(&inst, seed).unwrap();
        build_surrogate(&inst, &v, GramMode::Precompute).unwrap()
    }

    #[test]
    fn scalar_model_kkt_solve() {
        let res = active_set_solve(&scalar_model(), ENUMERATION_LIMIT).unwrap();
        assert!((res.q_star[0] - 1.0).abs() < 1e-12);
        assert!((res.objective - (-1.0)).abs() < 1e-12);
        assert_eq!(res.active_set, vec![0]);
        assert!(res.kkt_residual < 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn nonpositive_d_gives_zero_solution() {
        // synthetic model (build_surrogate always has d ≥ γ > 0): gradient
        // at 0 is −d ⪰ 0, so q = 0 is the optimum with empty support
        let mut f = ColMat::zeros(2, 2);
        f.col_mut(0)[0] = Complex::new(1.0, 0.0);
        f.col_mut(1)[1] = Complex::new(0.5, 0.5);
        let lips: Vec<f64> = (0..2).map(|j| 2.0 * crate::linalg::norm_sq(f.col(j))).collect();
        let mut gram = vec![0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                gram[i * 2 + j] = 2.0 * cdot(f.col(i), f.col(j)).re;
            }
        }
        let model =
            SurrogateModel { f, d: vec![-1.0, -0.5], lips, gram: Some(gram) };
        let res = active_set_solve(&model, ENUMERATION_LIMIT).unwrap();
        assert_eq!(res.q_star, vec![0.0, 0.0]);
        assert_eq!(res.objective, 0.0);
        assert!(res.active_set.is_empty());
        assert_eq!(res.kkt_residual, 0.0);
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let m = random_model(4, 3, 1);
        assert!(matches!(
            active_set_solve(&m, 2),
            Err(Error::EnumerationTooLarge { k: 3, limit: 2 })
        ));
    }

    #[test]
    fn gram_matrix_is_required() {
        let inst = generate_instance::<f64>(4, 3, -90.0, -80.0, 10.0, 1).unwrap();
        let v = feasible_init(&inst, 1).unwrap();
        let m = build_surrogate(&inst, &v, GramMode::MatrixFree).unwrap();
        assert!(matches!(active_set_solve(&m, ENUMERATION_LIMIT), Err(Error::GramRequired)));
    }

    #[test]
    fn oracle_beats_random_probes() {
        let m = random_model(8, 6, 7);
        let res = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
        let mut rng = crate::rng::instance_rng(99);
        let scale = res.q_star.iter().cloned().fold(0.0f64, f64::max).max(1.0);
        for _ in 0..1000 {
            let q: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 * scale).collect();
            assert!(m.dual_objective(&q) >= res.objective - 1e-9 * (1.0 + res.objective.abs()));
        }
    }

    #[test]
    fn support_entries_and_complementarity() {
        for seed in [3, 5, 8, 13] {
            let m = random_model(10, 7, seed);
            let res = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
            for (j, &qj) in res.q_star.iter().enumerate() {
                assert!(qj >= 0.0);
                if !res.active_set.contains(&j) {
                    assert_eq!(qj, 0.0, "entry outside the support must be exactly zero");
                }
            }
            let grad = m.dual_gradient(&res.q_star);
            for (j, &g) in grad.iter().enumerate() {
                let slack = res.q_star[j] * g;
                assert!(slack.abs() <= 1e-8, "complementarity at {j}: {slack}");
                assert!(g >= -1e-8, "dual feasibility at {j}: {g}");
            }
        }
    }

    #[test]
    fn duplicated_users_tie_break_lexicographically() {
        // two identical channels make A singular with a continuum of dual
        // optima; supports {0}, {1}, {0,1} share the optimal Υ and the
        // lexicographically smallest accepted support must win
        let g = vec![
            Complex::new(0.6, -0.3),
            Complex::new(0.1, 0.9),
            Complex::new(0.6, -0.3),
            Complex::new(0.1, 0.9),
        ];
        let inst = ProblemInstance::new(2, 2, g, 2.0).unwrap();
        let v_ref = vec![Complex::new(0.4, 0.2), Complex::new(-0.8, 0.5)];
        let m = build_surrogate(&inst, &v_ref, GramMode::Precompute).unwrap();
        let res = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
        assert_eq!(res.active_set, vec![0]);
        assert_eq!(res.q_star[1], 0.0);
        assert!(res.kkt_residual <= 1e-8);
    }

    #[test]
    fn weak_duality_against_feasible_points() {
        let m = random_model(9, 5, 21);
        let res = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
        let mut rng = crate::rng::instance_rng(5);
        for _ in 0..50 {
            let q: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let v = m.recover_beamformer(&q);
            if let Ok((sv, _)) = m.scale_to_feasible(&v) {
                let p = crate::linalg::norm_sq(&sv);
                assert!(p >= -res.objective - 1e-8 * (1.0 + res.objective.abs()));
            }
        }
    }

    #[test]
    fn oracle_is_deterministic() {
        let m = random_model(8, 6, 31);
        let a = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
        let b = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
        assert_eq!(a.q_star, b.q_star);
        assert_eq!(a.active_set, b.active_set);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn reference_matches_enumeration() {
        for seed in [2, 11, 17] {
            let m = random_model(12, 8, seed);
            let exact = active_set_solve(&m, ENUMERATION_LIMIT).unwrap();
            let refd = reference_solve(&m, 1e-10, 1_000_000).unwrap();
            assert!(refd.converged);
            assert!(refd.kkt_residual <= 1e-10);
            assert!(
                (refd.objective - exact.objective).abs() <= 1e-8 * (1.0 + exact.objective.abs()),
                "seed {seed}: {} vs {}",
                refd.objective,
                exact.objective
            );
        }
    }

    #[test]
    fn reference_solves_scalar_model() {
        let res = reference_solve(&scalar_model(), 1e-10, 100_000).unwrap();
        assert!(res.converged);
        assert!((res.q_star[0] - 1.0).abs() < 1e-10);
        assert_eq!(res.active_set, vec![0]);
    }

    #[test]
    fn reference_reports_iteration_cap() {
        let m = random_model(10, 6, 41);
        let res = reference_solve(&m, 1e-13, 5).unwrap();
        assert!(!res.converged);
        assert!(res.kkt_residual > 1e-13);
    }

    #[test]
    fn reference_works_matrix_free() {
        let inst = generate_instance::<f64>(10, 6, -90.0, -80.0, 10.0, 51).unwrap();
        let v = feasible_init(&inst, 51).unwrap();
        let mf = build_surrogate(&inst, &v, GramMode::MatrixFree).unwrap();
        let mg = build_surrogate(&inst, &v, GramMode::Precompute).unwrap();
        let a = reference_solve(&mf, 1e-10, 1_000_000).unwrap();
        let b = reference_solve(&mg, 1e-10, 1_000_000).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.objective - b.objective).abs() <= 1e-8 * (1.0 + b.objective.abs()));
    }
}
