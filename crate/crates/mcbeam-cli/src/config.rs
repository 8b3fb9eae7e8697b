//! Experiment configuration: TOML schema, validation, and flag overrides.
//!
//! A config describes a sweep as the cross product of a (N, K, γ) grid,
//! a solver list, and a seed list. Every key has a default except the grid
//! and the output directory, so a minimal file is just a few lines; any
//! value can be overridden from the command line.

use mcbeam::{GramMode, InnerSolver};
use serde::Deserialize;
use std::fmt;
use std::path::PathBuf;

/// Configuration or validation failure; the message names the offending key.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridTriple {
    pub n: usize,
    pub k: usize,
    pub gamma_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimingMode {
    /// Emit measured wall times.
    Report,
    /// Emit 0 for every wall time so outputs are byte-comparable across
    /// machines and thread counts.
    Redact,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub out_dir: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<InnerSolver>,
    pub grid: Vec<GridTriple>,
    pub pathloss_db: f64,
    pub noise_dbm: f64,
    pub mm_max_iters: usize,
    pub mm_rel_tol: f64,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Batch fraction: Y = max(1, floor(batch_frac·K)).
    pub batch_frac: f64,
    pub cache_refresh_period: usize,
    pub gram: GramMode,
    /// 0 = use all available cores.
    pub threads: usize,
    pub timing: TimingMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            out_dir: None,
            seeds: vec![1],
            solvers: vec![InnerSolver::Arcd],
            grid: Vec::new(),
            pathloss_db: -90.0,
            noise_dbm: -80.0,
            mm_max_iters: 20,
            mm_rel_tol: 1e-5,
            inner_tol: 1e-7,
            inner_max_iters: 50_000,
            batch_frac: 0.2,
            cache_refresh_period: 1000,
            gram: GramMode::Auto,
            threads: 0,
            timing: TimingMode::Report,
        }
    }
}

// ---- TOML shape ------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSchema {
    experiment: ExperimentSection,
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    mm: MmSection,
    #[serde(default)]
    inner: InnerSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    out_dir: Option<String>,
    seeds: Option<SeedSpec>,
    solvers: Option<Vec<String>>,
    /// Array of [n, k, gamma_db] triples.
    grid: Vec<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    List(Vec<u64>),
    Range(String),
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    pathloss_db: Option<f64>,
    noise_dbm: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MmSection {
    max_iters: Option<usize>,
    rel_tol: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InnerSection {
    tol: Option<f64>,
    max_iters: Option<usize>,
    batch_frac: Option<f64>,
    cache_refresh_period: Option<usize>,
    gram: Option<String>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    threads: Option<usize>,
    timing: Option<String>,
}

pub fn solver_from_name(name: &str) -> Result<InnerSolver, ConfigError> {
    match name {
        "arcd" => Ok(InnerSolver::Arcd),
        "rcd" => Ok(InnerSolver::Rcd),
        "pgd" => Ok(InnerSolver::Pgd),
        "admm" => Ok(InnerSolver::Admm),
        "oracle" => Ok(InnerSolver::Oracle),
        other => err(format!(
            "solvers: unknown solver {other:?} (expected arcd, rcd, pgd, admm, or oracle)"
        )),
    }
}

fn gram_from_name(name: &str) -> Result<GramMode, ConfigError> {
    match name {
        "auto" => Ok(GramMode::Auto),
        "precompute" => Ok(GramMode::Precompute),
        "matrix-free" => Ok(GramMode::MatrixFree),
        other => err(format!(
            "inner.gram: unknown mode {other:?} (expected auto, precompute, or matrix-free)"
        )),
    }
}

/// Parse a seed list: "3", "1,2,9", "1..8" (half-open), "1..=8" (inclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, ConfigError> {
    let text = text.trim();
    let parse_one = |s: &str| -> Result<u64, ConfigError> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| ConfigError(format!("seeds: {s:?} is not a nonnegative integer")))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo = parse_one(lo)?;
        let (hi, inclusive) = match hi.strip_prefix('=') {
            Some(rest) => (parse_one(rest)?, true),
            None => (parse_one(hi)?, false),
        };
        let end = if inclusive { hi.checked_add(1) } else { Some(hi) };
        let end = end.ok_or_else(|| ConfigError("seeds: range end overflows".into()))?;
        if end <= lo {
            return err(format!("seeds: empty range {text:?}"));
        }
        return Ok((lo..end).collect());
    }
    text.split(',').map(parse_one).collect()
}

fn triple_from_row(row: &[f64; 3], idx: usize) -> Result<GridTriple, ConfigError> {
    let as_count = |x: f64, field: &str| -> Result<usize, ConfigError> {
        if x.fract() != 0.0 || x < 1.0 || x > 1e9 {
            return err(format!(
                "experiment.grid[{idx}]: {field} must be a positive integer, got {x}"
            ));
        }
        Ok(x as usize)
    };
    Ok(GridTriple {
        n: as_count(row[0], "N")?,
        k: as_count(row[1], "K")?,
        gamma_db: row[2],
    })
}

/// Parse and validate a TOML config file's contents.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let file: FileSchema =
        toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
    let mut cfg = ExperimentConfig::default();

    cfg.out_dir = file.experiment.out_dir.map(PathBuf::from);
    if let Some(seeds) = file.experiment.seeds {
        cfg.seeds = match seeds {
            SeedSpec::List(v) => v,
            SeedSpec::Range(s) => parse_seeds(&s)?,
        };
    }
    if let Some(names) = file.experiment.solvers {
        cfg.solvers = names.iter().map(|s| solver_from_name(s)).collect::<Result<_, _>>()?;
    }
    cfg.grid = file
        .experiment
        .grid
        .iter()
        .enumerate()
        .map(|(i, row)| triple_from_row(row, i))
        .collect::<Result<_, _>>()?;

    if let Some(x) = file.channel.pathloss_db {
        cfg.pathloss_db = x;
    }
    if let Some(x) = file.channel.noise_dbm {
        cfg.noise_dbm = x;
    }
    if let Some(x) = file.mm.max_iters {
        cfg.mm_max_iters = x;
    }
    if let Some(x) = file.mm.rel_tol {
        cfg.mm_rel_tol = x;
    }
    if let Some(x) = file.inner.tol {
        cfg.inner_tol = x;
    }
    if let Some(x) = file.inner.max_iters {
        cfg.inner_max_iters = x;
    }
    if let Some(x) = file.inner.batch_frac {
        cfg.batch_frac = x;
    }
    if let Some(x) = file.inner.cache_refresh_period {
        cfg.cache_refresh_period = x;
    }
    if let Some(name) = file.inner.gram {
        cfg.gram = gram_from_name(&name)?;
    }
    if let Some(x) = file.run.threads {
        cfg.threads = x;
    }
    if let Some(name) = file.run.timing {
        cfg.timing = match name.as_str() {
            "report" => TimingMode::Report,
            "redact" => TimingMode::Redact,
            other => {
                return err(format!(
                    "run.timing: unknown mode {other:?} (expected report or redact)"
                ))
            }
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Check every invariant; call again after flag overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.is_empty() {
            return err("experiment.grid: must list at least one [N, K, gamma_db] triple");
        }
        if self.seeds.is_empty() {
            return err("experiment.seeds: must list at least one seed");
        }
        if self.solvers.is_empty() {
            return err("experiment.solvers: must list at least one solver");
        }
        for (i, t) in self.grid.iter().enumerate() {
            if t.n == 0 || t.k == 0 {
                return err(format!("experiment.grid[{i}]: N and K must be positive"));
            }
            if !t.gamma_db.is_finite() {
                return err(format!("experiment.grid[{i}]: gamma_db must be finite"));
            }
        }
        if self.solvers.contains(&InnerSolver::Oracle) {
            if let Some(t) = self.grid.iter().find(|t| t.k > mcbeam::ENUMERATION_LIMIT) {
                return err(format!(
                    "experiment.solvers: oracle requires K ≤ {} (grid has K={})",
                    mcbeam::ENUMERATION_LIMIT,
                    t.k
                ));
            }
        }
        if self.mm_max_iters == 0 {
            return err("mm.max_iters: must be at least 1");
        }
        if !(self.mm_rel_tol >= 0.0) {
            return err("mm.rel_tol: must be nonnegative");
        }
        if !(self.inner_tol > 0.0) {
            return err("inner.tol: must be positive");
        }
        if self.inner_max_iters == 0 {
            return err("inner.max_iters: must be at least 1");
        }
        if !(self.batch_frac > 0.0 && self.batch_frac <= 1.0) {
            return err(format!("inner.batch_frac: must be in (0, 1], got {}", self.batch_frac));
        }
        if self.cache_refresh_period == 0 {
            return err("inner.cache_refresh_period: must be at least 1");
        }
        Ok(())
    }

    /// Batch size for a given K under this config.
    pub fn batch_size(&self, k: usize) -> usize {
        ((self.batch_frac * k as f64).floor() as usize).max(1)
    }
}

impl fmt::Display for GridTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} K={} gamma={} dB", self.n, self.k, self.gamma_db)
    }
}
