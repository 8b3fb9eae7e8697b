//! Problem data: a single-group multicast instance (channels, SNR target),
//! feasibility checks, and a feasible starting beamformer.
//!
//! One transmitter with N antennas sends a common stream to K single-antenna
//! users. The design variable is a complex weight vector v of length N; the
//! goal elsewhere in this crate is to minimize the transmit power ‖v‖² while
//! every user's received SNR |g_k^H v|² stays at or above the target γ.
//! All powers are handled in linear milliwatts; dB enters only at the edges.

use crate::error::{Error, Result};
use crate::linalg::{axpy_real, cdot, norm_sq};
use crate::rng;
use crate::scalar::Scalar;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Complex antenna-weight vector; entries are amplitudes in √mW.
pub type Beamformer<T> = Vec<Complex<T>>;

/// Transmit power ‖v‖² in mW.
pub fn power<T: Scalar>(v: &[Complex<T>]) -> T {
    norm_sq(v)
}

/// `10^(x/10)`: dB ratio to linear factor, or dBm to milliwatts.
pub fn db_to_linear<T: Scalar>(x_db: T) -> Result<T> {
    if !x_db.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite dB value {x_db}")));
    }
    Ok(T::c(10.0).powf(x_db / T::c(10.0)))
}

/// `10·log10(x)`: linear factor to dB, or milliwatts to dBm.
pub fn linear_to_db<T: Scalar>(x: T) -> T {
    T::c(10.0) * x.log10()
}

/// One multicast instance: K noise-normalized channels of length N and a
/// common SNR target γ (linear).
#[derive(Clone, Debug)]
pub struct ProblemInstance<T: Scalar> {
    n_antennas: usize,
    n_users: usize,
    /// Row-major K×N: user k's channel g_k occupies `k*N..(k+1)*N`.
    channels: Vec<Complex<T>>,
    snr_target: T,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(
        n_antennas: usize,
        n_users: usize,
        channels: Vec<Complex<T>>,
        snr_target: T,
    ) -> Result<Self> {
        if n_antennas == 0 || n_users == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if channels.len() != n_antennas * n_users {
            return Err(Error::DimensionMismatch {
                expected: n_antennas * n_users,
                got: channels.len(),
            });
        }
        if !(snr_target > T::zero()) {
            return Err(Error::InvalidArgument("SNR target must be positive".into()));
        }
        let inst = Self { n_antennas, n_users, channels, snr_target };
        for k in 0..n_users {
            if inst.channel(k).iter().all(|c| c.norm_sqr() == T::zero()) {
                return Err(Error::InvalidArgument(format!("channel {k} is identically zero")));
            }
        }
        Ok(inst)
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn snr_target(&self) -> T {
        self.snr_target
    }

    pub fn channel(&self, k: usize) -> &[Complex<T>] {
        &self.channels[k * self.n_antennas..(k + 1) * self.n_antennas]
    }
}

/// Draw an instance with i.i.d. circularly-symmetric complex Gaussian
/// channels: per-entry variance `10^(pathloss_db/10)`, then normalized by the
/// noise amplitude from `noise_dbm`. Deterministic in `seed` (stream 0).
pub fn generate_instance<T: Scalar>(
    n_antennas: usize,
    n_users: usize,
    pathloss_db: T,
    noise_dbm: T,
    gamma_db: T,
    seed: u64,
) -> Result<ProblemInstance<T>>
where
    StandardNormal: Distribution<T>,
{
    if n_antennas == 0 || n_users == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let pathloss = db_to_linear(pathloss_db)?;
    let noise = db_to_linear(noise_dbm)?;
    let gamma = db_to_linear(gamma_db)?;
    // h ~ CN(0, ϱ): real and imaginary parts i.i.d. N(0, ϱ/2); g = h/σ.
    let part_std = (pathloss / T::c(2.0)).sqrt() / noise.sqrt();
    let mut rng = rng::instance_rng(seed);
    let channels = (0..n_antennas * n_users)
        .map(|_| {
            let re: T = rng.sample(StandardNormal);
            let im: T = rng.sample(StandardNormal);
            Complex::new(re * part_std, im * part_std)
        })
        .collect();
    ProblemInstance::new(n_antennas, n_users, channels, gamma)
}

/// Received SNR of user `k`: |g_k^H v|².
pub fn snr_of<T: Scalar>(inst: &ProblemInstance<T>, v: &[Complex<T>], k: usize) -> Result<T> {
    if k >= inst.n_users {
        return Err(Error::UserIndexOutOfRange { index: k, n_users: inst.n_users });
    }
    if v.len() != inst.n_antennas {
        return Err(Error::DimensionMismatch { expected: inst.n_antennas, got: v.len() });
    }
    Ok(cdot(inst.channel(k), v).norm_sqr())
}

/// Result of a feasibility check: per-user margins |g_k^H v|² − γ.
#[derive(Clone, Debug)]
pub struct Feasibility<T: Scalar> {
    pub feasible: bool,
    pub margins: Vec<T>,
    pub min_margin: T,
}

/// True iff `min_k |g_k^H v|² ≥ γ·(1 − slack_tol)`.
pub fn is_feasible<T: Scalar>(
    inst: &ProblemInstance<T>,
    v: &[Complex<T>],
    slack_tol: T,
) -> Result<Feasibility<T>> {
    if v.len() != inst.n_antennas {
        return Err(Error::DimensionMismatch { expected: inst.n_antennas, got: v.len() });
    }
    let gamma = inst.snr_target;
    let mut margins = Vec::with_capacity(inst.n_users);
    let mut min_snr = T::infinity();
    for k in 0..inst.n_users {
        let snr = cdot(inst.channel(k), v).norm_sqr();
        min_snr = min_snr.min(snr);
        margins.push(snr - gamma);
    }
    Ok(Feasibility {
        feasible: min_snr >= gamma * (T::one() - slack_tol),
        min_margin: min_snr - gamma,
        margins,
    })
}

const INIT_RETRIES: usize = 16;

/// Construct a strictly feasible beamformer: aim along u = Σ_k g_k/‖g_k‖²
/// and scale so the worst user sits exactly on the SNR target. If some user
/// is numerically orthogonal to u, retry with a small random perturbation
/// (relative size 1e-3, stream 2 of `seed`), up to 16 times.
pub fn feasible_init<T: Scalar>(inst: &ProblemInstance<T>, seed: u64) -> Result<Beamformer<T>>
where
    StandardNormal: Distribution<T>,
{
    let n = inst.n_antennas;
    let mut u = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 0..inst.n_users {
        let g = inst.channel(k);
        axpy_real(T::one() / norm_sq(g), g, &mut u);
    }
    let mut rng = rng::init_rng(seed);
    for _ in 0..=INIT_RETRIES {
        let u_norm = norm_sq(&u).sqrt();
        let mut min_align = T::infinity();
        for k in 0..inst.n_users {
            let g = inst.channel(k);
            let align = cdot(g, &u).norm();
            if align < T::c(1e-12) * norm_sq(g).sqrt() * u_norm {
                min_align = T::neg_infinity();
                break;
            }
            min_align = min_align.min(align);
        }
        if min_align > T::zero() && min_align.is_finite() {
            let t = inst.snr_target.sqrt() / min_align;
            let mut v = u;
            for x in v.iter_mut() {
                *x = *x * t;
            }
            return Ok(v);
        }
        // perturb u by 1e-3 of its norm in a random complex direction
        let mut w: Vec<Complex<T>> = (0..n)
            .map(|_| {
                let re: T = rng.sample(StandardNormal);
                let im: T = rng.sample(StandardNormal);
                Complex::new(re, im)
            })
            .collect();
        let w_norm = norm_sq(&w).sqrt();
        let scale = T::c(1e-3) * u_norm / w_norm;
        for (ui, wi) in u.iter_mut().zip(w.iter_mut()) {
            *ui = *ui + *wi * scale;
        }
    }
    Err(Error::DegenerateInstance { retries: INIT_RETRIES })
}
