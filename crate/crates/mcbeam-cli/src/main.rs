//! Command-line front end for the multicast beamforming solvers: single
//! runs (`solve`), config-driven seeded sweeps (`bench`), and built-in
//! correctness checks (`verify`).
//!
//! Exit codes: 0 success, 1 configuration error, 2 any run failed, 3
//! verification failure.

mod config;
mod runner;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::{parse_seeds, solver_from_name, ConfigError, ExperimentConfig, GridTriple};
use runner::{run_experiments, RunError, ROWS_HEADER};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mcbeam",
    version,
    about = "QoS-constrained multicast beamforming: power-minimization solvers and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one (N, K, γ, seed) instance and print its result row
    Solve(SolveArgs),
    /// Run the sweep described by a config file and write CSV outputs
    Bench(BenchArgs),
    /// Run the built-in oracle-equivalence and invariant checks
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (TOML); flags below override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use a single solver: arcd, rcd, pgd, admm, or oracle
    #[arg(long)]
    solver: Option<String>,
    /// Antenna count; overrides every grid triple
    #[arg(long)]
    n: Option<usize>,
    /// User count; overrides every grid triple
    #[arg(long)]
    k: Option<usize>,
    /// SNR target in dB; overrides every grid triple
    #[arg(long)]
    gamma_db: Option<f64>,
    /// Output directory for rows.csv, summary.csv, plotdata.csv, traces
    #[arg(long)]
    out: Option<PathBuf>,
    /// Outer iteration budget
    #[arg(long)]
    mm_iters: Option<usize>,
    /// Inner solver stopping tolerance
    #[arg(long)]
    inner_tol: Option<f64>,
    /// Coordinate batch fraction: Y = max(1, floor(batch_frac·K))
    #[arg(long)]
    batch_frac: Option<f64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel and initializer seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seed list: "1,2,9", "1..100" (half-open), or "1..=100"
    #[arg(long)]
    seeds: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, RunError> {
    Err(RunError::Config(ConfigError(msg.into())))
}

fn load_base(common: &CommonArgs) -> Result<ExperimentConfig, RunError> {
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(ConfigError(format!("--config {}: {e}", path.display())))
            })?;
            Ok(config::parse_config(&text)?)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, common: &CommonArgs) -> Result<(), RunError> {
    if let Some(name) = &common.solver {
        cfg.solvers = vec![solver_from_name(name)?];
    }
    if cfg.grid.is_empty() {
        match (common.n, common.k) {
            (Some(n), Some(k)) => {
                cfg.grid.push(GridTriple { n, k, gamma_db: common.gamma_db.unwrap_or(10.0) });
            }
            _ => return config_err("experiment.grid: pass --config, or both --n and --k"),
        }
    } else {
        for t in &mut cfg.grid {
            if let Some(n) = common.n {
                t.n = n;
            }
            if let Some(k) = common.k {
                t.k = k;
            }
            if let Some(g) = common.gamma_db {
                t.gamma_db = g;
            }
        }
    }
    if let Some(out) = &common.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(x) = common.mm_iters {
        cfg.mm_max_iters = x;
    }
    if let Some(x) = common.inner_tol {
        cfg.inner_tol = x;
    }
    if let Some(x) = common.batch_frac {
        cfg.batch_frac = x;
    }
    if let Some(x) = common.threads {
        cfg.threads = x;
    }
    cfg.validate()?;
    Ok(())
}

/// Run `f` on a dedicated pool of `threads` workers, or on the default
/// global pool when threads = 0.
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Data(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_solve(args: SolveArgs) -> Result<i32, RunError> {
    let mut cfg = load_base(&args.common)?;
    apply_overrides(&mut cfg, &args.common)?;
    cfg.seeds = vec![args.seed];
    if cfg.grid.len() != 1 {
        return config_err(format!(
            "experiment.grid: solve runs a single triple, the config has {} — pass --n/--k",
            cfg.grid.len()
        ));
    }
    if cfg.solvers.len() != 1 {
        return config_err(format!(
            "experiment.solvers: solve uses a single solver, the config lists {} — pass --solver",
            cfg.solvers.len()
        ));
    }
    let sweep = with_pool(cfg.threads, || run_experiments(&cfg))??;
    println!("{ROWS_HEADER}");
    for row in &sweep.rows {
        println!("{}", row.to_csv());
    }
    Ok(if sweep.any_failed { 2 } else { 0 })
}

fn cmd_bench(args: BenchArgs) -> Result<i32, RunError> {
    let mut cfg = load_base(&args.common)?;
    apply_overrides(&mut cfg, &args.common)?;
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
        cfg.validate()?;
    }
    if cfg.out_dir.is_none() {
        return config_err("experiment.out_dir: required for bench (set it in the config or pass --out)");
    }
    let sweep = with_pool(cfg.threads, || run_experiments(&cfg))??;
    let out = cfg.out_dir.as_ref().unwrap();
    let failures = sweep.rows.iter().filter(|r| !r.converged).count();
    println!(
        "wrote {} rows to {} (summary.csv, plotdata.csv, per-run traces alongside)",
        sweep.rows.len(),
        out.join("rows.csv").display()
    );
    if failures > 0 {
        println!("{failures} run(s) did not converge");
    }
    Ok(if sweep.any_failed { 2 } else { 0 })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, RunError> {
    let ok = with_pool(args.threads, verify::run_verification)?;
    Ok(if ok {
        println!("verification passed");
        0
    } else {
        println!("verification FAILED");
        3
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit(); // exits 0
            }
            let _ = e.print();
            std::process::exit(1);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(match e {
                RunError::Config(_) => 1,
                _ => 2,
            });
        }
    }
}
