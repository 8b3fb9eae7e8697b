//! Acceptance gate: one test per shipping criterion, each printing a
//! single `ACCEPTANCE PASS|FAIL <name>` line (visible under
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Heavy or wall-clock-sensitive tests serialize on a shared lock so the
//! harness's test parallelism cannot distort timing comparisons.

use mcbeam::{
    active_set_solve, arcd_solve, build_surrogate, feasible_init, generate_instance, mm_solve,
    pgd_solve, rcd_solve, reference_solve, update_momentum_scalar, GramMode, InnerSolver,
    MmOptions64, ProblemInstance64, SolverOptions64, SurrogateModel64,
};
use std::sync::Mutex;
use std::time::Instant;

static TIMING: Mutex<()> = Mutex::new(());

fn timing_lock() -> std::sync::MutexGuard<'static, ()> {
    TIMING.lock().unwrap_or_else(|e| e.into_inner())
}

fn gate(name: &str, ok: bool, detail: &str) {
    println!("ACCEPTANCE {}: {name} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn instance(n: usize, k: usize, gamma_db: f64, seed: u64) -> ProblemInstance64 {
    generate_instance(n, k, -90.0, -80.0, gamma_db, seed).unwrap()
}

fn surrogate(n: usize, k: usize, seed: u64) -> SurrogateModel64 {
    let inst = instance(n, k, 10.0, seed);
    let v = feasible_init(&inst, seed).unwrap();
    build_surrogate(&inst, &v, GramMode::Precompute).unwrap()
}

/// Splitmix-style value stream for probe points (no RNG dependency).
fn mix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// A probe multiplier vector at the model's natural scale d_l / A_ll.
fn probe_q(model: &SurrogateModel64, state: &mut u64) -> Vec<f64> {
    (0..model.n_users())
        .map(|l| {
            let scale = if model.lips[l] > 0.0 { model.d[l] / model.lips[l] } else { 1.0 };
            2.0 * mix(state) * scale.abs().max(f64::MIN_POSITIVE)
        })
        .collect()
}

#[test]
fn single_user_matches_analytic_optimum() {
    let _g = timing_lock();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [1usize, 8, 64] {
        for seed in [1u64, 2, 3] {
            let inst = instance(n, 1, 10.0, seed);
            let rep = mm_solve(&inst, &MmOptions64::new(1), seed).unwrap();
            let expected = inst.snr_target() / mcbeam::power(inst.channel(0));
            worst = worst.max((rep.power - expected).abs() / expected);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        "single_user_matches_analytic_optimum",
        worst <= 1e-6 && elapsed < 1.0,
        &format!("worst relative error {worst:.3e} vs matched filter, {elapsed:.3}s"),
    );
}

/// 60 small surrogates; shared by the enumeration-equivalence and
/// duality-gap criteria.
fn equivalence_corpus() -> Vec<SurrogateModel64> {
    (1..=60u64)
        .map(|seed| {
            let n = 8 + (seed as usize) % 9; // 8..=16
            let k = 2 + (seed as usize) % 9; // 2..=10
            surrogate(n, k, seed)
        })
        .collect()
}

#[test]
fn small_surrogates_agree_with_enumeration_oracle() {
    let _g = timing_lock();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for model in &equivalence_corpus() {
        let k = model.n_users();
        let exact = active_set_solve(model, mcbeam::ENUMERATION_LIMIT).unwrap();
        let mut opts = SolverOptions64::new(k);
        opts.tol = 1e-12;
        opts.max_iters = 300_000;
        let q0 = vec![0.0; k];
        let solves = [
            arcd_solve(model, &q0, &opts).unwrap(),
            rcd_solve(model, &q0, &opts).unwrap(),
            pgd_solve(model, &q0, opts.tol, opts.max_iters).unwrap(),
        ];
        for (_, rep) in &solves {
            worst = worst.max((rep.objective - exact.objective).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        "small_surrogates_agree_with_enumeration_oracle",
        worst <= 1e-5 && elapsed < 30.0,
        &format!("worst |objective − enumeration| {worst:.3e} over 60 surrogates × 3 solvers, {elapsed:.1}s"),
    );
}

#[test]
fn duality_gap_certificate_tight() {
    let mut worst = 0.0f64;
    for model in &equivalence_corpus() {
        let k = model.n_users();
        let mut opts = SolverOptions64::new(k);
        opts.tol = 1e-12;
        opts.max_iters = 300_000;
        let (q, _) = arcd_solve(model, &vec![0.0; k], &opts).unwrap();
        let gap = model.duality_gap(&q).unwrap();
        worst = worst.max(gap.gap / (1.0 + gap.scaled_primal_power));
    }
    gate(
        "duality_gap_certificate_tight",
        worst <= 1e-4,
        &format!("worst duality gap {worst:.3e} of (1 + scaled primal power)"),
    );
}

#[test]
fn gradient_matches_finite_differences() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 4 + (i as usize) % 13;
        let k = 2 + (i as usize) % 9;
        let model = surrogate(n, k, 4000 + i);
        let mut s = i;
        let q = probe_q(&model, &mut s);
        let grad = model.dual_gradient(&q);
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(f64::MIN_POSITIVE);
        for l in 0..k {
            let h = 1e-4 * (1.0 + q[l].abs());
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[l] += h;
            qm[l] -= h;
            let fd = (model.dual_objective(&qp) - model.dual_objective(&qm)) / (2.0 * h);
            worst = worst.max((fd - grad[l]).abs() / gmax);
        }
    }
    gate(
        "gradient_matches_finite_differences",
        worst <= 1e-6,
        &format!("worst relative deviation {worst:.3e} over 100 (model, q) pairs"),
    );
}

#[test]
fn smoothness_constants_match_quadratic_growth() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 3 + (i as usize) % 14;
        let k = 1 + (i as usize) % 10;
        let model = surrogate(n, k, 5000 + i);
        let mut s = i.wrapping_mul(101);
        let q = probe_q(&model, &mut s);
        let l = (i as usize) % k;
        if model.lips[l] == 0.0 {
            continue;
        }
        // step at the coordinate's own scale so the identity is exercised
        // where the gradient terms have comparable magnitude
        let t = (0.5 + mix(&mut s)) * (model.d[l] / model.lips[l]).abs().max(1e-12);
        let mut qt = q.clone();
        qt[l] += t;
        let before = model.dual_gradient_coord(&q, l).unwrap();
        let after = model.dual_gradient_coord(&qt, l).unwrap();
        let growth = (after - before).abs();
        let expect = model.lips[l] * t;
        worst = worst.max((growth - expect).abs() / expect);
    }
    gate(
        "smoothness_constants_match_quadratic_growth",
        worst <= 1e-9,
        &format!("worst relative mismatch {worst:.3e} between |Δ gradient| and L·|t|"),
    );
}

#[test]
fn momentum_recursion_identity() {
    let mut c = 0.2f64;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let next = update_momentum_scalar(c);
        worst = worst.max((next * next - c * c * (1.0 - next)).abs());
        c = next;
    }
    gate(
        "momentum_recursion_identity",
        worst <= 1e-12,
        &format!("worst |c⁺² − c²(1 − c⁺)| = {worst:.3e} over 10000 steps from 0.2"),
    );
}

#[test]
fn mm_descent_monotone_and_feasible() {
    let _g = timing_lock();
    let mut worst_ascent = f64::NEG_INFINITY;
    let mut worst_margin = f64::INFINITY;
    let mut gamma = 0.0f64;
    for seed in 1..=20u64 {
        let inst = instance(64, 32, 10.0, seed);
        gamma = inst.snr_target();
        let rep = mm_solve(&inst, &MmOptions64::new(32), seed).unwrap();
        for w in rep.power_trace.windows(2) {
            worst_ascent = worst_ascent.max(w[1] - w[0]);
        }
        for &m in &rep.min_margin_trace {
            worst_margin = worst_margin.min(m);
        }
    }
    gate(
        "mm_descent_monotone_and_feasible",
        worst_ascent <= 1e-9 && worst_margin >= -1e-6 * gamma,
        &format!(
            "worst power ascent {worst_ascent:.3e} (allowed 1e-9), worst margin {worst_margin:.3e} (allowed {:.3e}) over 20 instances",
            -1e-6 * gamma
        ),
    );
}

#[test]
fn arcd_power_parity_with_oracle_inner() {
    let _g = timing_lock();
    let mut details = Vec::new();
    let mut ok = true;
    for k in [16usize, 32] {
        let mut arcd_mean = 0.0;
        let mut oracle_mean = 0.0;
        for seed in 1..=10u64 {
            let inst = instance(64, k, 10.0, seed);
            let mut opts = MmOptions64::new(k);
            opts.inner_solver = InnerSolver::Arcd;
            arcd_mean += mm_solve(&inst, &opts, seed).unwrap().power / 10.0;
            opts.inner_solver = InnerSolver::Oracle; // reference fallback at K > 14
            oracle_mean += mm_solve(&inst, &opts, seed).unwrap().power / 10.0;
        }
        let rel = (arcd_mean - oracle_mean).abs() / oracle_mean;
        ok &= rel <= 5e-3;
        details.push(format!("K={k}: {:.4}%", 100.0 * rel));
    }
    gate(
        "arcd_power_parity_with_oracle_inner",
        ok,
        &format!("mean power deviation from reference-inner runs — {}", details.join(", ")),
    );
}

#[test]
fn acceleration_beats_plain_rcd() {
    let _g = timing_lock();
    let mut arcd_iters = Vec::new();
    let mut rcd_iters = Vec::new();
    let mut arcd_errs = Vec::new();
    let mut rcd_errs = Vec::new();
    for seed in 1..=20u64 {
        let model = surrogate(64, 50, seed);
        let q0 = vec![0.0; 50];
        let mut opts = SolverOptions64::new(50);
        opts.tol = 1e-7;
        let (_, a) = arcd_solve(&model, &q0, &opts).unwrap();
        let (_, r) = rcd_solve(&model, &q0, &opts).unwrap();
        arcd_iters.push(a.iterations as f64);
        rcd_iters.push(r.iterations as f64);

        let best = reference_solve(&model, 1e-10, 1_000_000).unwrap().objective;
        let mut budget = SolverOptions64::new(50);
        budget.tol = f64::MIN_POSITIVE; // run out the fixed budget
        budget.max_iters = 500;
        let (_, a500) = arcd_solve(&model, &q0, &budget).unwrap();
        let (_, r500) = rcd_solve(&model, &q0, &budget).unwrap();
        arcd_errs.push(a500.objective - best);
        rcd_errs.push(r500.objective - best);
    }
    let (ai, ri) = (median(arcd_iters), median(rcd_iters));
    let (ae, re) = (median(arcd_errs), median(rcd_errs));
    gate(
        "acceleration_beats_plain_rcd",
        ai < ri && re > ae,
        &format!(
            "median iterations to tol 1e-7: {ai} vs {ri}; median objective error at 500 iterations: {ae:.3e} vs {re:.3e}"
        ),
    );
}

#[test]
fn arcd_faster_than_admm_at_scale() {
    let _g = timing_lock();
    let mut arcd_walls = Vec::new();
    let mut admm_walls = Vec::new();
    let mut slow_runs = 0usize;
    for k in [50usize, 100, 200] {
        for seed in 1..=5u64 {
            let inst = instance(200, k, 10.0, seed);
            let mut opts = MmOptions64::new(k);
            opts.inner_solver = InnerSolver::Arcd;
            let a = mm_solve(&inst, &opts, seed).unwrap();
            opts.inner_solver = InnerSolver::Admm;
            let b = mm_solve(&inst, &opts, seed).unwrap();
            let wall = a.wall.as_secs_f64();
            if wall > 2.0 {
                slow_runs += 1;
            }
            arcd_walls.push(wall);
            admm_walls.push(b.wall.as_secs_f64());
        }
    }
    let (ma, md) = (median(arcd_walls), median(admm_walls));
    let speedup = md / ma;
    let mut detail = format!(
        "median wall {ma:.3}s vs ADMM {md:.3}s (speedup {speedup:.1}×), {slow_runs} runs over 2s"
    );
    if speedup < 3.0 {
        detail.push_str(" [flag: speedup below 3×]"); // reported, not failed
    }
    gate("arcd_faster_than_admm_at_scale", ma < md && slow_runs == 0, &detail);
}

#[test]
fn deterministic_rows_across_thread_counts() {
    let tmp = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let cfg_path = tmp.join("sweep.toml");
    std::fs::write(
        &cfg_path,
        r#"
        [experiment]
        grid = [[8, 1, 10.0], [16, 10, 10.0]]
        seeds = "1..=5"
        solvers = ["arcd", "rcd", "pgd", "admm", "oracle"]
        [run]
        timing = "redact"
        "#,
    )
    .unwrap();
    let run = |threads: &str, out: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_mcbeam"))
            .args(["bench", "--config"])
            .arg(&cfg_path)
            .args(["--threads", threads, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "bench --threads {threads} exited with {status}");
    };
    let (one, eight) = (tmp.join("t1"), tmp.join("t8"));
    run("1", &one);
    run("8", &eight);
    let rows1 = std::fs::read(one.join("rows.csv")).unwrap();
    let rows8 = std::fs::read(eight.join("rows.csv")).unwrap();
    let sum1 = std::fs::read(one.join("summary.csv")).unwrap();
    let sum8 = std::fs::read(eight.join("summary.csv")).unwrap();
    gate(
        "deterministic_rows_across_thread_counts",
        rows1 == rows8 && sum1 == sum8,
        &format!(
            "rows.csv {} bytes, identical across --threads 1 and --threads 8: {}",
            rows1.len(),
            rows1 == rows8
        ),
    );
}
