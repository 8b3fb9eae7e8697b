//! The outer majorization-minimization loop.
//!
//! Starting from a strictly feasible beamformer, each round linearizes the
//! SNR constraints at the current iterate, solves the resulting convex
//! subproblem through its nonnegative dual with the selected inner solver,
//! and advances to the recovered primal point. Because the linearized
//! feasible set is an inner approximation of the true one that contains
//! the current iterate, the power trace never increases and every iterate
//! stays feasible for the original constraints; the dual optimum is warm
//! started across rounds, which is what keeps the later inner solves cheap.
//!
//! Descent is enforced, not assumed: the exact subproblem optimum can never
//! exceed the anchor power (the anchor is feasible for its own
//! linearization), so a candidate whose power is higher than the current
//! iterate's can only be inner-solver slop. Such a candidate is discarded
//! and the loop stops — the remaining progress is below what the inner
//! accuracy can certify.

use crate::admm::{admm_solve, DEFAULT_ADMM_MAX_ITERS, DEFAULT_ADMM_TOL};
use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::model::{feasible_init, is_feasible, Beamformer, ProblemInstance};
use crate::oracle::{active_set_solve, reference_solve, ENUMERATION_LIMIT};
use crate::scalar::Scalar;
use crate::solvers::{arcd_solve, pgd_solve, rcd_solve, SolveReport, SolverOptions};
use crate::surrogate::{build_surrogate, GramMode};
use rand_distr::{Distribution, StandardNormal};
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSolver {
    /// Accelerated random coordinate descent (the default).
    Arcd,
    /// Plain random coordinate descent.
    Rcd,
    /// Full projected gradient.
    Pgd,
    /// Consensus ADMM directly in beamformer space.
    Admm,
    /// Exact enumeration when K permits, tight projected gradient beyond.
    Oracle,
}

impl InnerSolver {
    pub fn name(self) -> &'static str {
        match self {
            InnerSolver::Arcd => "arcd",
            InnerSolver::Rcd => "rcd",
            InnerSolver::Pgd => "pgd",
            InnerSolver::Admm => "admm",
            InnerSolver::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MmOptions<T: Scalar> {
    pub inner_solver: InnerSolver,
    /// Outer iteration budget (default 20).
    pub mm_max_iters: usize,
    /// Stop when |Δ power| ≤ mm_rel_tol · power (default 1e−5).
    pub mm_rel_tol: T,
    pub inner: SolverOptions<T>,
    pub gram_mode: GramMode,
}

impl<T: Scalar> MmOptions<T> {
    pub fn new(n_users: usize) -> Self {
        MmOptions {
            inner_solver: InnerSolver::Arcd,
            mm_max_iters: 20,
            mm_rel_tol: T::c(1e-5),
            inner: SolverOptions::new(n_users),
            gram_mode: GramMode::Auto,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MmReport<T: Scalar> {
    pub beamformer: Beamformer<T>,
    /// ‖v‖² of the returned beamformer.
    pub power: T,
    /// ‖v^[n]‖² per outer iterate; length mm_iters + 1.
    pub power_trace: Vec<T>,
    /// Worst SNR margin (min_k |g_k^H v^[n]|² − γ) per outer iterate,
    /// aligned with `power_trace`.
    pub min_margin_trace: Vec<T>,
    /// Completed outer iterations (accepted advances). A terminal round
    /// whose candidate was rejected for ascending still contributes to
    /// `inner_reports` and `total_inner_iters`, but not here.
    pub mm_iters: usize,
    pub total_inner_iters: usize,
    pub inner_reports: Vec<SolveReport<T>>,
    /// Final per-user SNR margins for the original constraints.
    pub margins: Vec<T>,
    pub min_margin: T,
    /// True when the relative power change met mm_rel_tol before the cap.
    pub converged: bool,
    pub wall: Duration,
}

/// Run the MM loop on `instance`. `seed` drives the feasible initializer
/// and, combined with `opts.inner.schedule_seed` and the outer iteration
/// index, the per-round coordinate schedules — so a (instance, opts, seed)
/// triple always reproduces the same report.
pub fn mm_solve<T: Scalar>(
    inst: &ProblemInstance<T>,
    opts: &MmOptions<T>,
    seed: u64,
) -> Result<MmReport<T>>
where
    StandardNormal: Distribution<T>,
{
    let start = Instant::now();
    if opts.mm_max_iters == 0 {
        return Err(Error::InvalidArgument("mm_max_iters must be at least 1".into()));
    }
    if opts.mm_rel_tol < T::zero() {
        return Err(Error::InvalidArgument("mm_rel_tol must be nonnegative".into()));
    }
    let k = inst.n_users();

    let mut v = feasible_init(inst, seed)?;
    let mut q_star = vec![T::zero(); k];
    let mut power_trace = vec![norm_sq(&v)];
    let mut min_margin_trace = vec![is_feasible(inst, &v, T::zero())?.min_margin];
    let mut inner_reports: Vec<SolveReport<T>> = Vec::new();
    let mut converged = false;

    for outer in 0..opts.mm_max_iters {
        let model = build_surrogate(inst, &v, opts.gram_mode)?;
        if model.lips.iter().any(|&l| l == T::zero()) {
            // d_l = γ > 0 with f_l = 0 makes Υ unbounded below along e_l;
            // cannot happen at a feasible anchor, but fail loudly if a
            // caller drives the loop somewhere degenerate
            return Err(Error::DegenerateSurrogate(
                "anchor is orthogonal to a user channel; the dual subproblem is unbounded".into(),
            ));
        }
        let mut inner = opts.inner.clone();
        inner.schedule_seed =
            opts.inner.schedule_seed.wrapping_add(seed).wrapping_add(outer as u64);

        let next_v;
        match opts.inner_solver {
            InnerSolver::Admm => {
                // ADMM works in beamformer space: warm start from the
                // current iterate, and its output is already scaled onto
                // the linearized constraint set
                let (vn, rep) =
                    admm_solve(inst, &model, &v, T::c(DEFAULT_ADMM_TOL), DEFAULT_ADMM_MAX_ITERS)?;
                next_v = vn;
                inner_reports.push(rep.solve);
            }
            InnerSolver::Arcd | InnerSolver::Rcd | InnerSolver::Pgd => {
                let (q, rep) = match opts.inner_solver {
                    InnerSolver::Arcd => arcd_solve(&model, &q_star, &inner)?,
                    InnerSolver::Rcd => rcd_solve(&model, &q_star, &inner)?,
                    _ => pgd_solve(&model, &q_star, inner.tol, inner.max_iters)?,
                };
                // the recovered point is feasibility-scaled even after a
                // converged inner solve (the multiplicative correction is
                // O(tol) there), so monotone descent and feasibility hold
                // no matter how the inner solve ended
                let (vn, _) = model.scale_to_feasible(&model.recover_beamformer(&q))?;
                next_v = vn;
                q_star = q;
                inner_reports.push(rep);
            }
            InnerSolver::Oracle => {
                let start_obj = model.dual_objective(&q_star);
                let res = if k <= ENUMERATION_LIMIT && model.gram.is_some() {
                    active_set_solve(&model, ENUMERATION_LIMIT)?
                } else {
                    reference_solve(&model, T::c(1e-10), 1_000_000)?
                };
                let (vn, _) = model.scale_to_feasible(&model.recover_beamformer(&res.q_star))?;
                next_v = vn;
                q_star = res.q_star;
                inner_reports.push(SolveReport {
                    objective: res.objective,
                    iterations: res.iterations,
                    converged: res.converged,
                    trace: vec![start_obj, res.objective],
                    wall: Duration::ZERO,
                    skipped_coords: Vec::new(),
                });
            }
        }

        let power = norm_sq(&next_v);
        let prev = *power_trace.last().expect("trace holds the initial power");
        if power > prev {
            // inner accuracy floor: the candidate can only be worse than
            // the anchor through unfinished inner work, so keep the
            // current iterate and stop
            converged = true;
            break;
        }
        v = next_v;
        power_trace.push(power);
        min_margin_trace.push(is_feasible(inst, &v, T::zero())?.min_margin);
        if prev - power <= opts.mm_rel_tol * prev {
            converged = true;
            break;
        }
    }

    let feas = is_feasible(inst, &v, T::c(1e-6))?;
    Ok(MmReport {
        power: norm_sq(&v),
        beamformer: v,
        mm_iters: power_trace.len() - 1,
        total_inner_iters: inner_reports.iter().map(|r| r.iterations).sum(),
        power_trace,
        min_margin_trace,
        inner_reports,
        margins: feas.margins,
        min_margin: feas.min_margin,
        converged,
        wall: start.elapsed(),
    })
}
