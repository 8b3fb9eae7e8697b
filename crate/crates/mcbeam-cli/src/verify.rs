//! Built-in correctness checks behind the `verify` subcommand: quick
//! oracle-equivalence and invariant sweeps on small instances, one printed
//! PASS/FAIL line per check.

use mcbeam::{
    active_set_solve, arcd_solve, build_surrogate, feasible_init, generate_instance, mm_solve,
    pgd_solve, rcd_solve, update_momentum_scalar, GramMode, InnerSolver, MmOptions64,
    SolverOptions64, SurrogateModel64,
};

struct Ledger {
    all_ok: bool,
}

impl Ledger {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        let mark = if ok { "PASS" } else { "FAIL" };
        println!("{mark} {name}: {detail}");
        self.all_ok &= ok;
    }
}

fn small_surrogate(n: usize, k: usize, seed: u64) -> SurrogateModel64 {
    let inst = generate_instance(n, k, -90.0, -80.0, 10.0, seed).unwrap();
    let v = feasible_init(&inst, seed).unwrap();
    build_surrogate(&inst, &v, GramMode::Precompute).unwrap()
}

/// Mix a few deterministic pseudo-random values out of a seed without
/// dragging in an RNG: splitmix-style, good enough for probe points.
fn mix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
}

fn momentum_identity() -> (bool, String) {
    let mut c = 0.2f64;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let next = update_momentum_scalar(c);
        worst = worst.max((next * next - c * c * (1.0 - next)).abs());
        c = next;
    }
    (worst <= 1e-12, format!("worst identity residual {worst:.3e} over 10000 steps"))
}

fn gradient_matches_differences() -> (bool, String) {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let k = 2 + (seed as usize % 7);
        let model = small_surrogate(6 + (seed as usize % 9), k, 1000 + seed);
        let mut s = seed;
        let q: Vec<f64> = (0..k).map(|_| 2.0 * mix(&mut s)).collect();
        let grad = model.dual_gradient(&q);
        for l in 0..k {
            let h = 1e-5 * (1.0 + q[l].abs());
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[l] += h;
            qm[l] -= h;
            let fd = (model.dual_objective(&qp) - model.dual_objective(&qm)) / (2.0 * h);
            let rel = (grad[l] - fd).abs() / (1.0 + grad[l].abs());
            worst = worst.max(rel);
        }
    }
    (worst <= 1e-6, format!("worst gradient vs central differences {worst:.3e}"))
}

fn smoothness_is_tight() -> (bool, String) {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let k = 2 + (seed as usize % 6);
        let model = small_surrogate(5 + (seed as usize % 8), k, 2000 + seed);
        let mut s = seed.wrapping_mul(77);
        let q: Vec<f64> = (0..k).map(|_| mix(&mut s)).collect();
        let l = (seed as usize) % k;
        let t = 0.3 + mix(&mut s);
        let mut qt = q.clone();
        qt[l] += t;
        let before = model.dual_gradient(&q)[l];
        let after = model.dual_gradient(&qt)[l];
        // the partial gradient is affine in the coordinate with slope
        // exactly L_l, so the change must equal L_l·t
        let lhs = (after - before).abs();
        let rhs = model.lips[l] * t;
        worst = worst.max((lhs - rhs).abs() / rhs.max(1e-30));
    }
    (worst <= 1e-9, format!("worst |Δgrad| vs L·t relative error {worst:.3e}"))
}

fn solvers_match_enumeration() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut worst_gap = 0.0f64;
    for seed in 0..12u64 {
        let k = 2 + (seed as usize % 7);
        let model = small_surrogate(6 + (seed as usize % 11), k, 3000 + seed);
        let exact = active_set_solve(&model, mcbeam::ENUMERATION_LIMIT).unwrap();
        let mut opts = SolverOptions64::new(k);
        opts.tol = 1e-12;
        opts.max_iters = 300_000;
        let q0 = vec![0.0; k];
        let runs = [
            arcd_solve(&model, &q0, &opts).unwrap(),
            rcd_solve(&model, &q0, &opts).unwrap(),
            pgd_solve(&model, &q0, opts.tol, opts.max_iters).unwrap(),
        ];
        for (q, rep) in &runs {
            worst = worst.max((rep.objective - exact.objective).abs());
            let gap = model.duality_gap(q).unwrap();
            worst_gap = worst_gap.max(gap.gap / (1.0 + gap.scaled_primal_power));
        }
    }
    (
        worst <= 1e-5 && worst_gap <= 1e-4,
        format!("worst |Υ−Υ*| {worst:.3e}, worst normalized duality gap {worst_gap:.3e}"),
    )
}

fn mm_descends_across_solvers() -> (bool, String) {
    let mut ok = true;
    let mut worst_spread = 0.0f64;
    for seed in [5u64, 6] {
        let inst = generate_instance(12, 5, -90.0, -80.0, 10.0, seed).unwrap();
        let mut powers = Vec::new();
        for solver in [
            InnerSolver::Arcd,
            InnerSolver::Rcd,
            InnerSolver::Pgd,
            InnerSolver::Admm,
            InnerSolver::Oracle,
        ] {
            let mut opts = MmOptions64::new(5);
            opts.inner_solver = solver;
            let rep = mm_solve(&inst, &opts, seed).unwrap();
            ok &= rep.power_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9);
            ok &= rep.min_margin >= -1e-6 * inst.snr_target();
            powers.push(rep.power);
        }
        let base = powers[4]; // oracle-inner reference
        for p in &powers {
            worst_spread = worst_spread.max((p - base).abs() / base);
        }
    }
    ok &= worst_spread <= 5e-3;
    (ok, format!("worst relative power spread across solvers {worst_spread:.3e}"))
}

/// Run every check; returns true when all pass.
pub fn run_verification() -> bool {
    let mut ledger = Ledger { all_ok: true };
    let (ok, detail) = momentum_identity();
    ledger.record("momentum-recursion", ok, detail);
    let (ok, detail) = gradient_matches_differences();
    ledger.record("gradient-finite-differences", ok, detail);
    let (ok, detail) = smoothness_is_tight();
    ledger.record("coordinate-smoothness", ok, detail);
    let (ok, detail) = solvers_match_enumeration();
    ledger.record("oracle-equivalence", ok, detail);
    let (ok, detail) = mm_descends_across_solvers();
    ledger.record("mm-descent-feasibility-parity", ok, detail);
    ledger.all_ok
}
