//! Sweep executor and CSV emission.
//!
//! Runs the cross product grid × solvers × seeds, one mm_solve per job,
//! in deterministic row order regardless of thread count: jobs are mapped
//! in parallel with an order-preserving collect and the shared CSV files
//! are written by this module after the join. Per-run trace files are
//! written from inside the owning job (each job owns its paths, so nothing
//! interleaves). A run that errors becomes a row with converged=false and
//! NaN measurements rather than aborting the sweep; such rows are excluded
//! from summary means.

use crate::config::{ExperimentConfig, GridTriple, TimingMode};
use mcbeam::{generate_instance, is_feasible, linear_to_db, InnerSolver, MmOptions64};
use rayon::prelude::*;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lib(#[from] mcbeam::Error),
    #[error("{0}")]
    Data(String),
}

pub const ROWS_HEADER: &str =
    "solver,n,k,gamma_db,seed,power_mw,power_dbm,mm_iters,inner_iters,wall_s,min_margin,converged";
pub const SUMMARY_HEADER: &str = "solver,n,k,gamma_db,runs,converged,mean_power_dbm,\
min_power_dbm,max_power_dbm,mean_wall_s,mean_mm_iters,mean_inner_iters";
pub const PLOTDATA_HEADER: &str = "k,solver,mean_power_dbm,mean_time_s";

/// Inner traces longer than this are log-subsampled for storage.
pub const TRACE_SUBSAMPLE_THRESHOLD: usize = 100_000;
/// Target point count after subsampling.
pub const TRACE_SUBSAMPLE_TARGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub solver: &'static str,
    pub n: usize,
    pub k: usize,
    pub gamma_db: f64,
    pub seed: u64,
    pub power_mw: f64,
    pub power_dbm: f64,
    pub mm_iters: usize,
    pub inner_iters: usize,
    pub wall_s: f64,
    pub min_margin: f64,
    pub converged: bool,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            self.n,
            self.k,
            self.gamma_db,
            self.seed,
            self.power_mw,
            self.power_dbm,
            self.mm_iters,
            self.inner_iters,
            self.wall_s,
            self.min_margin,
            self.converged
        )
    }

    pub fn parse(line: &str) -> Result<ResultRow, RunError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(RunError::Data(format!(
                "rows.csv: expected 12 fields, got {} in {line:?}",
                fields.len()
            )));
        }
        let bad = |what: &str| RunError::Data(format!("rows.csv: bad {what} in {line:?}"));
        Ok(ResultRow {
            solver: crate::config::solver_from_name(fields[0])
                .map_err(|_| bad("solver"))?
                .name(),
            n: fields[1].parse().map_err(|_| bad("n"))?,
            k: fields[2].parse().map_err(|_| bad("k"))?,
            gamma_db: fields[3].parse().map_err(|_| bad("gamma_db"))?,
            seed: fields[4].parse().map_err(|_| bad("seed"))?,
            power_mw: fields[5].parse().map_err(|_| bad("power_mw"))?,
            power_dbm: fields[6].parse().map_err(|_| bad("power_dbm"))?,
            mm_iters: fields[7].parse().map_err(|_| bad("mm_iters"))?,
            inner_iters: fields[8].parse().map_err(|_| bad("inner_iters"))?,
            wall_s: fields[9].parse().map_err(|_| bad("wall_s"))?,
            min_margin: fields[10].parse().map_err(|_| bad("min_margin"))?,
            converged: match fields[11] {
                "true" => true,
                "false" => false,
                _ => return Err(bad("converged")),
            },
        })
    }
}

/// Parse a full rows.csv back into rows (header checked exactly).
pub fn parse_rows(text: &str) -> Result<Vec<ResultRow>, RunError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ROWS_HEADER => {}
        other => {
            return Err(RunError::Data(format!("rows.csv: unexpected header {other:?}")));
        }
    }
    lines.map(ResultRow::parse).collect()
}

pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    /// True when any run errored or emitted an infeasible beamformer.
    /// Exhausting the outer iteration budget is not a failure: fixed-budget
    /// sweeps are the normal benchmark protocol (the row still records
    /// converged=false).
    pub any_failed: bool,
}

struct Job {
    triple: GridTriple,
    solver: InnerSolver,
    seed: u64,
    /// Directory for this run's trace files, when emission is on.
    dir: Option<PathBuf>,
}

/// Directory name for one grid triple.
fn triple_dir_name(t: &GridTriple) -> String {
    format!("n{}_k{}_g{}", t.n, t.k, t.gamma_db)
}

/// Execute the whole sweep and, when `cfg.out_dir` is set, write rows.csv,
/// summary.csv, plotdata.csv, and per-run trace files beneath it.
pub fn run_experiments(cfg: &ExperimentConfig) -> Result<SweepOutput, RunError> {
    cfg.validate()?;
    let out = cfg.out_dir.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for t in &cfg.grid {
            fs::create_dir_all(dir.join(triple_dir_name(t)))?;
        }
    }

    let mut jobs = Vec::new();
    for t in &cfg.grid {
        for &solver in &cfg.solvers {
            for &seed in &cfg.seeds {
                jobs.push(Job {
                    triple: *t,
                    solver,
                    seed,
                    dir: out.map(|d| d.join(triple_dir_name(t))),
                });
            }
        }
    }

    let outcomes: Vec<Result<(ResultRow, bool), RunError>> =
        jobs.par_iter().map(|job| run_one(cfg, job)).collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut any_failed = false;
    for outcome in outcomes {
        let (row, ok) = outcome?;
        any_failed |= !ok;
        rows.push(row);
    }

    if let Some(dir) = out {
        let rows_path = dir.join("rows.csv");
        write_lines(&rows_path, ROWS_HEADER, rows.iter().map(|r| r.to_csv()))?;
        let summary = summarize(&rows)?;
        let summary_lines: Vec<String> = summary.iter().map(|s| s.to_csv()).collect();
        write_lines(&dir.join("summary.csv"), SUMMARY_HEADER, summary_lines.iter().cloned())?;
        write_lines(
            &dir.join("plotdata.csv"),
            PLOTDATA_HEADER,
            summary.iter().map(|s| s.to_plotdata_csv()),
        )?;
        // the artifact must survive its own round trip: re-reading rows.csv
        // and re-summarizing has to reproduce summary.csv line for line
        let reread = parse_rows(&fs::read_to_string(&rows_path)?)?;
        let redone: Vec<String> = summarize(&reread)?.iter().map(|s| s.to_csv()).collect();
        if redone != summary_lines {
            return Err(RunError::Data(
                "summary.csv failed its round-trip re-check against rows.csv".into(),
            ));
        }
    }
    Ok(SweepOutput { rows, any_failed })
}

/// One job: generate the instance, run the MM loop, re-verify feasibility
/// from the returned beamformer, and write this run's trace files.
fn run_one(cfg: &ExperimentConfig, job: &Job) -> Result<(ResultRow, bool), RunError> {
    let t = job.triple;
    let inst =
        generate_instance(t.n, t.k, cfg.pathloss_db, cfg.noise_dbm, t.gamma_db, job.seed)?;

    let mut opts = MmOptions64::new(t.k);
    opts.inner_solver = job.solver;
    opts.mm_max_iters = cfg.mm_max_iters;
    opts.mm_rel_tol = cfg.mm_rel_tol;
    opts.gram_mode = cfg.gram;
    opts.inner.batch_size = cfg.batch_size(t.k);
    opts.inner.tol = cfg.inner_tol;
    opts.inner.max_iters = cfg.inner_max_iters;
    opts.inner.cache_refresh_period = cfg.cache_refresh_period;

    let mut row = ResultRow {
        solver: job.solver.name(),
        n: t.n,
        k: t.k,
        gamma_db: t.gamma_db,
        seed: job.seed,
        power_mw: f64::NAN,
        power_dbm: f64::NAN,
        mm_iters: 0,
        inner_iters: 0,
        wall_s: f64::NAN,
        min_margin: f64::NAN,
        converged: false,
    };

    let rep = match mcbeam::mm_solve(&inst, &opts, job.seed) {
        Ok(rep) => rep,
        Err(_) => return Ok((row, false)), // recorded, sweep continues
    };

    // emitted powers are re-verified from the stored beamformer, not
    // trusted from the report
    let feas = is_feasible(&inst, &rep.beamformer, 1e-6)?;
    row.power_mw = rep.power;
    row.power_dbm = linear_to_db(rep.power);
    row.mm_iters = rep.mm_iters;
    row.inner_iters = rep.total_inner_iters;
    row.wall_s = match cfg.timing {
        TimingMode::Report => rep.wall.as_secs_f64(),
        TimingMode::Redact => 0.0,
    };
    row.min_margin = feas.min_margin;
    row.converged = rep.converged && feas.feasible;
    let ok = feas.feasible;

    if let Some(dir) = &job.dir {
        let objective: Vec<f64> =
            rep.inner_reports.iter().flat_map(|r| r.trace.iter().copied()).collect();
        write_trace(
            &dir.join(format!("trace_{}_{}.csv", row.solver, row.seed)),
            "iter,objective",
            &objective,
        )?;
        write_trace(
            &dir.join(format!("power_{}_{}.csv", row.solver, row.seed)),
            "iter,power_mw",
            &rep.power_trace,
        )?;
    }
    Ok((row, ok))
}

fn write_lines<I: Iterator<Item = String>>(
    path: &Path,
    header: &str,
    lines: I,
) -> Result<(), RunError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Indices kept when storing a trace of length `len`: everything when it
/// fits, otherwise ~`target` log-spaced points including both endpoints.
pub fn subsample_indices(len: usize, target: usize) -> Vec<usize> {
    if len <= target.max(2) {
        return (0..len).collect();
    }
    let mut idx = vec![0];
    let lmax = ((len - 1) as f64).ln();
    for j in 0..target {
        let x = (lmax * j as f64 / (target - 1) as f64).exp();
        let i = (x.round() as usize).min(len - 1);
        if i > *idx.last().unwrap() {
            idx.push(i);
        }
    }
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

fn write_trace(path: &Path, header: &str, values: &[f64]) -> Result<(), RunError> {
    let keep = if values.len() > TRACE_SUBSAMPLE_THRESHOLD {
        subsample_indices(values.len(), TRACE_SUBSAMPLE_TARGET)
    } else {
        (0..values.len()).collect()
    };
    write_lines(path, header, keep.into_iter().map(|i| format!("{},{}", i, values[i])))
}

// ---- Aggregation -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryLine {
    pub solver: &'static str,
    pub n: usize,
    pub k: usize,
    pub gamma_db: f64,
    pub runs: usize,
    pub converged: usize,
    pub mean_power_dbm: f64,
    pub min_power_dbm: f64,
    pub max_power_dbm: f64,
    pub mean_wall_s: f64,
    pub mean_mm_iters: f64,
    pub mean_inner_iters: f64,
}

impl SummaryLine {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            self.n,
            self.k,
            self.gamma_db,
            self.runs,
            self.converged,
            self.mean_power_dbm,
            self.min_power_dbm,
            self.max_power_dbm,
            self.mean_wall_s,
            self.mean_mm_iters,
            self.mean_inner_iters
        )
    }

    pub fn to_plotdata_csv(&self) -> String {
        format!("{},{},{},{}", self.k, self.solver, self.mean_power_dbm, self.mean_wall_s)
    }
}

/// Group rows by (solver, N, K, γ) in first-appearance order and aggregate.
/// Powers are averaged in linear mW and reported in dBm; rows from errored
/// runs (NaN power) count toward `runs` but not toward any mean.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryLine>, RunError> {
    if rows.is_empty() {
        return Err(RunError::Data("summarize: no rows to aggregate".into()));
    }
    let key = |r: &ResultRow| (r.solver, r.n, r.k, r.gamma_db.to_bits());
    let mut order: Vec<(&'static str, usize, usize, u64)> = Vec::new();
    for r in rows {
        if !order.contains(&key(r)) {
            order.push(key(r));
        }
    }
    let mut out = Vec::with_capacity(order.len());
    for k in order {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| key(r) == k).collect();
        let measured: Vec<&&ResultRow> =
            group.iter().filter(|r| r.power_mw.is_finite()).collect();
        let m = measured.len() as f64;
        let mean = |f: &dyn Fn(&ResultRow) -> f64| {
            measured.iter().map(|r| f(r)).sum::<f64>() / m
        };
        let fold = |init: f64, f: &dyn Fn(f64, f64) -> f64| {
            measured.iter().map(|r| r.power_mw).fold(init, |a, b| f(a, b))
        };
        out.push(SummaryLine {
            solver: k.0,
            n: k.1,
            k: k.2,
            gamma_db: f64::from_bits(k.3),
            runs: group.len(),
            converged: group.iter().filter(|r| r.converged).count(),
            mean_power_dbm: linear_to_db(mean(&|r| r.power_mw)),
            min_power_dbm: linear_to_db(fold(f64::INFINITY, &f64::min)),
            max_power_dbm: linear_to_db(fold(f64::NEG_INFINITY, &f64::max)),
            mean_wall_s: mean(&|r| r.wall_s),
            mean_mm_iters: mean(&|r| r.mm_iters as f64),
            mean_inner_iters: mean(&|r| r.inner_iters as f64),
        });
    }
    Ok(out)
}
