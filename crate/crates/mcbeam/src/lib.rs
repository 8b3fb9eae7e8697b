//! Power-minimization multicast beamforming under per-user SNR constraints.
//!
//! An N-antenna transmitter sends one common stream to K single-antenna
//! users over channels g_k; the task is the smallest-power beamformer v
//! with |g_k^H v|² ≥ γ for every user. The constraint set is nonconvex, so
//! the crate solves it by majorization-minimization: each outer round
//! linearizes the constraints at the current iterate and solves the convex
//! subproblem through its nonnegative dual — minimize Υ(q) = ‖F q‖² − dᵀq
//! over q ⪰ 0 — for which several inner solvers are provided:
//!
//! * accelerated random coordinate descent ([`arcd_solve`]) — random
//!   Y-coordinate batches with momentum, the workhorse at large K;
//! * plain random coordinate descent ([`rcd_solve`]) and full projected
//!   gradient ([`pgd_solve`]) as first-order baselines;
//! * consensus ADMM in beamformer space ([`admm_solve`]);
//! * exact ground truth by active-set enumeration ([`active_set_solve`],
//!   K ≤ 14) or tight-tolerance projected gradient ([`reference_solve`]).
//!
//! [`mm_solve`] ties a chosen inner solver into the outer loop and reports
//! the power trace, per-round diagnostics, and final feasibility margins.
//! Everything is generic over [`f32`]/[`f64`] through the [`Scalar`] trait
//! and fully deterministic given the instance and schedule seeds: one
//! seed fixes the channels, the initializer, and every coordinate draw,
//! across any thread count.
//!
//! ```
//! use mcbeam::{generate_instance, mm_solve, MmOptions64};
//!
//! // 8 antennas, 3 users, −90 dB pathloss, −80 dBm noise, 10 dB SNR target
//! let inst = generate_instance(8, 3, -90.0, -80.0, 10.0, 7).unwrap();
//! let report = mm_solve(&inst, &MmOptions64::new(inst.n_users()), 7).unwrap();
//! assert!(report.converged);
//! // every user meets the target (up to the driver's feasibility slack)
//! assert!(report.min_margin >= -1e-6 * inst.snr_target());
//! ```

pub mod admm;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod solvers;
pub mod surrogate;

pub use admm::{admm_solve, halfspace_project, AdmmReport, AdmmState};
pub use driver::{mm_solve, InnerSolver, MmOptions, MmReport};
pub use error::{Error, Result};
pub use model::{
    db_to_linear, feasible_init, generate_instance, is_feasible, linear_to_db, power, snr_of,
    Beamformer, Feasibility, ProblemInstance,
};
pub use oracle::{active_set_solve, reference_solve, OracleResult, ENUMERATION_LIMIT};
pub use scalar::Scalar;
pub use solvers::{
    arcd_solve, pgd_solve, rcd_solve, sample_coordinate_set, update_momentum_scalar, DualPoint,
    DualState, SolveReport, SolverOptions,
};
pub use surrogate::{build_surrogate, GapReport, GramMode, SurrogateModel};

// Concrete-precision aliases; f64 is what the benchmarks run on, f32
// exists for memory-bound experiments.
pub type ProblemInstance64 = model::ProblemInstance<f64>;
pub type ProblemInstance32 = model::ProblemInstance<f32>;
pub type Beamformer64 = model::Beamformer<f64>;
pub type Beamformer32 = model::Beamformer<f32>;
pub type SurrogateModel64 = surrogate::SurrogateModel<f64>;
pub type SurrogateModel32 = surrogate::SurrogateModel<f32>;
pub type SolverOptions64 = solvers::SolverOptions<f64>;
pub type SolverOptions32 = solvers::SolverOptions<f32>;
pub type SolveReport64 = solvers::SolveReport<f64>;
pub type SolveReport32 = solvers::SolveReport<f32>;
pub type OracleResult64 = oracle::OracleResult<f64>;
pub type OracleResult32 = oracle::OracleResult<f32>;
pub type MmOptions64 = driver::MmOptions<f64>;
pub type MmOptions32 = driver::MmOptions<f32>;
pub type MmReport64 = driver::MmReport<f64>;
pub type MmReport32 = driver::MmReport<f32>;
