//! Rotating-frame Bloch equations for the driven, dissipative two-level
//! spin and their average over a quasi-static Gaussian detuning ensemble.
//!
//! With emission and absorption at equal rate `gamma1` and pure dephasing
//! contributing `gamma2` to the coherence decay, the Bloch vector obeys
//!
//! ```text
//! dx/dt = -delta y - G2 x
//! dy/dt =  delta x - Omega z - G2 y
//! dz/dt =  Omega y - G1 z
//! ```
//!
//! with `G1 = 2 gamma1` and `G2 = gamma1 + gamma2`. The system is linear with
//! no inhomogeneous term (the bath is at infinite temperature), so a single
//! step is an exact matrix exponential and there is no step-size control to
//! tune.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::params::SpinParams;
use crate::quadrature::{integrate_adaptive, GaussHermite, MAX_HERMITE_NODES};
use crate::scalar::{compensated_sum, Real};

/// Constant drive in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams<T> {
    /// Rabi amplitude, rad/s.
    pub omega_rabi: T,
    /// Drive detuning `omega_drive - omega0`, rad/s.
    pub delta: T,
}

impl<T: Real> DriveParams<T> {
    pub fn new(omega_rabi: T, delta: T) -> Self {
        Self { omega_rabi, delta }
    }

    pub fn resonant(omega_rabi: T) -> Self {
        Self::new(omega_rabi, T::zero())
    }

    pub fn free() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.omega_rabi.is_nan() && !self.delta.is_nan(), || {
            Error::Domain("NaN in drive parameters".into())
        })?;
        ensure(self.omega_rabi >= T::zero() && self.omega_rabi.is_finite(), || {
            Error::Domain(format!("Rabi amplitude must be finite and >= 0, got {:e}", self.omega_rabi))
        })?;
        ensure(self.delta.is_finite(), || Error::Domain("detuning must be finite".into()))
    }
}

/// Bloch vector `(<sigma_x>, <sigma_y>, <sigma_z>)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochState<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Spin polarized along +z (the optically initialized state).
    pub fn up() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// Equal superposition along +x, as prepared by an ideal pi/2 pulse.
    pub fn plus_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Ideal instantaneous pi rotation about x.
    pub fn rotate_x_pi(&self) -> Self {
        Self::new(self.x, -self.y, -self.z)
    }

    pub fn as_array(&self) -> Vec3<T> {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: Vec3<T>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    fn validate(&self) -> Result<()> {
        let n = self.norm();
        ensure(n.is_finite(), || Error::Domain("non-finite initial state".into()))?;
        ensure(n <= T::one() + T::lit(1e-9), || {
            Error::Domain(format!("initial Bloch vector outside the ball (|r| = {n})"))
        })
    }
}

/// Bloch states sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<BlochState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn z(&self) -> Vec<T> {
        self.states.iter().map(|s| s.z).collect()
    }

    pub fn x(&self) -> Vec<T> {
        self.states.iter().map(|s| s.x).collect()
    }
}

/// Generator `M` of `d r/dt = M r`.
pub fn generator<T: Real>(spin: &SpinParams<T>, drive: &DriveParams<T>) -> Mat3<T> {
    let g1 = spin.population_decay_rate();
    let g2 = spin.coherence_decay_rate();
    let (w, d) = (drive.omega_rabi, drive.delta);
    let z = T::zero();
    Mat3([[-g2, -d, z], [d, -g2, -w], [z, w, -g1]])
}

/// Exact propagator over `dt`.
pub fn propagator<T: Real>(spin: &SpinParams<T>, drive: &DriveParams<T>, dt: T) -> Mat3<T> {
    generator(spin, drive).scale(dt).expm()
}

pub(crate) fn validate_grid<T: Real>(times: &[T], what: &str) -> Result<()> {
    ensure(!times.is_empty(), || Error::Argument(format!("empty {what} grid")))?;
    ensure(times.iter().all(|t| t.is_finite()), || {
        Error::Argument(format!("non-finite value in {what} grid"))
    })?;
    ensure(times[0] >= T::zero(), || {
        Error::Argument(format!("{what} grid must start at a non-negative value"))
    })?;
    ensure(times.windows(2).all(|w| w[1] > w[0]), || {
        Error::Argument(format!("{what} grid must be strictly increasing"))
    })
}

/// Propagates `initial` (taken at t = 0) and samples it at every grid time.
fn propagate_samples<T: Real>(
    m: &Mat3<T>,
    initial: &BlochState<T>,
    times: &[T],
) -> Vec<BlochState<T>> {
    let mut out = Vec::with_capacity(times.len());
    let mut state = initial.as_array();
    let mut prev_t = T::zero();
    let mut cached: Option<(T, Mat3<T>)> = None;
    for &t in times {
        let dt = t - prev_t;
        if dt > T::zero() {
            let step = match cached {
                Some((h, p)) if (h - dt).abs() <= T::lit(1e-13) * dt => p,
                _ => {
                    let p = m.scale(dt).expm();
                    cached = Some((dt, p));
                    p
                }
            };
            state = step.apply(&state);
        }
        out.push(BlochState::from_array(state));
        prev_t = t;
    }
    out
}

/// Evolves a single detuning realization.
///
/// `initial` is the state at t = 0; the returned trajectory holds the state
/// at each entry of `times` (which may start at 0).
pub fn evolve<T: Real>(
    spin: &SpinParams<T>,
    drive: &DriveParams<T>,
    initial: &BlochState<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    validate_grid(times, "time")?;
    check_rates(spin)?;
    drive.validate()?;
    initial.validate()?;
    let m = generator(spin, drive);
    Ok(Trajectory {
        times: times.to_vec(),
        states: propagate_samples(&m, initial, times),
    })
}

fn check_rates<T: Real>(spin: &SpinParams<T>) -> Result<()> {
    for v in [spin.gamma1, spin.gamma2, spin.gamma2_star] {
        ensure(!v.is_nan(), || Error::Domain("NaN in spin rates".into()))?;
        ensure(v >= T::zero() && v.is_finite(), || {
            Error::Domain("spin rates must be finite and non-negative".into())
        })?;
    }
    Ok(())
}

/// How to integrate over the detuning distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMethod {
    /// Gauss–Hermite quadrature with `n_nodes` nodes.
    GaussHermite,
    /// Seeded Monte-Carlo draws, `n_nodes` samples.
    MonteCarlo,
    /// Adaptive Gauss–Kronrod over the standardized detuning, refined around
    /// the drive resonance. `n_nodes` caps the number of segments.
    Adaptive,
}

impl std::str::FromStr for EnsembleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-hermite" => Ok(Self::GaussHermite),
            "monte-carlo" => Ok(Self::MonteCarlo),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::Argument(format!("unknown ensemble method '{other}'"))),
        }
    }
}

impl std::fmt::Display for EnsembleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GaussHermite => "gauss-hermite",
            Self::MonteCarlo => "monte-carlo",
            Self::Adaptive => "adaptive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub method: EnsembleMethod,
    pub n_nodes: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self::gauss_hermite(64)
    }
}

impl EnsembleConfig {
    pub fn gauss_hermite(n_nodes: usize) -> Self {
        Self { method: EnsembleMethod::GaussHermite, n_nodes, seed: 0 }
    }

    pub fn monte_carlo(n_nodes: usize, seed: u64) -> Self {
        Self { method: EnsembleMethod::MonteCarlo, n_nodes, seed }
    }

    /// Adaptive quadrature with the default segment budget.
    pub fn adaptive() -> Self {
        Self { method: EnsembleMethod::Adaptive, n_nodes: 20_000, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n_nodes >= 1, || Error::Argument("n_nodes must be >= 1".into()))?;
        if self.method == EnsembleMethod::GaussHermite {
            ensure(self.n_nodes <= MAX_HERMITE_NODES, || {
                Error::Argument(format!(
                    "gauss-hermite n_nodes must be <= {MAX_HERMITE_NODES}, got {}",
                    self.n_nodes
                ))
            })?;
        }
        Ok(())
    }
}

/// Ensemble mean of per-realization outputs plus, for Monte Carlo, the
/// standard error of that mean.
#[derive(Debug, Clone)]
pub struct EnsembleEstimate<T> {
    pub mean: Vec<BlochState<T>>,
    pub std_error: Option<Vec<BlochState<T>>>,
}

fn flatten<T: Real>(states: &[BlochState<T>]) -> Vec<T> {
    states.iter().flat_map(|s| s.as_array()).collect()
}

fn unflatten<T: Real>(v: &[T]) -> Vec<BlochState<T>> {
    v.chunks_exact(3).map(|c| BlochState::new(c[0], c[1], c[2])).collect()
}

/// Averages `realize(delta)` over `delta ~ N(center, (sqrt 2 gamma2*)^2)`.
///
/// `realize` maps one detuning to a list of Bloch states (one per output
/// sample). Nodes are evaluated in parallel and reduced in node order.
pub fn ensemble_mean<T, F>(
    spin: &SpinParams<T>,
    center: T,
    cfg: &EnsembleConfig,
    realize: F,
) -> Result<EnsembleEstimate<T>>
where
    T: Real,
    F: Fn(T) -> Result<Vec<BlochState<T>>> + Sync,
{
    cfg.validate()?;
    check_rates(spin)?;
    let sd = spin.detuning_spread();
    if sd == T::zero() {
        return Ok(EnsembleEstimate { mean: realize(center)?, std_error: None });
    }
    match cfg.method {
        EnsembleMethod::GaussHermite => {
            let gh = GaussHermite::<T>::new(cfg.n_nodes)?;
            let nodes: Vec<(T, T)> = gh.normal_nodes(center, sd).collect();
            let samples: Vec<Vec<T>> = nodes
                .par_iter()
                .map(|&(d, _)| realize(d).map(|s| flatten(&s)))
                .collect::<Result<_>>()?;
            let dim = samples[0].len();
            let mean = (0..dim)
                .map(|k| compensated_sum(samples.iter().zip(&nodes).map(|(s, (_, w))| *w * s[k])))
                .collect::<Vec<_>>();
            Ok(EnsembleEstimate { mean: unflatten(&mean), std_error: None })
        }
        EnsembleMethod::MonteCarlo => {
            let normal = Normal::new(center.to_f64_lossy(), sd.to_f64_lossy())
                .map_err(|e| Error::Domain(format!("detuning distribution: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let draws: Vec<T> = (0..cfg.n_nodes).map(|_| T::lit(normal.sample(&mut rng))).collect();
            let samples: Vec<Vec<T>> = draws
                .par_iter()
                .map(|&d| realize(d).map(|s| flatten(&s)))
                .collect::<Result<_>>()?;
            let n = T::from_usize_lossy(samples.len());
            let dim = samples[0].len();
            let mut mean = Vec::with_capacity(dim);
            let mut se = Vec::with_capacity(dim);
            for k in 0..dim {
                let m = compensated_sum(samples.iter().map(|s| s[k])) / n;
                let var = if samples.len() > 1 {
                    compensated_sum(samples.iter().map(|s| (s[k] - m) * (s[k] - m)))
                        / (n - T::one())
                } else {
                    T::zero()
                };
                mean.push(m);
                se.push((var / n).sqrt());
            }
            Ok(EnsembleEstimate { mean: unflatten(&mean), std_error: Some(unflatten(&se)) })
        }
        EnsembleMethod::Adaptive => {
            // Integrate over u with delta = center + sd * u, weight phi(u).
            const U_MAX: f64 = 9.0;
            let norm = T::one() / (T::TAU()).sqrt();
            let f = |u: T| -> Result<Vec<T>> {
                let w = norm * (-(u * u) * T::half()).exp();
                let s = realize(center + sd * u)?;
                Ok(flatten(&s).into_iter().map(|v| v * w).collect())
            };
            let breaks = resonance_breaks(center, sd, resonance_width(spin), U_MAX);
            let atol = T::default_rtol().max(T::epsilon() * T::lit(64.0));
            let v = integrate_adaptive(f, &breaks, atol, cfg.n_nodes)?;
            Ok(EnsembleEstimate { mean: unflatten(&v), std_error: None })
        }
    }
}

fn resonance_width<T: Real>(spin: &SpinParams<T>) -> T {
    (spin.coherence_decay_rate() + spin.population_decay_rate()).max(T::lit(1e-300))
}

/// Initial partition in standardized detuning `u`, clustered geometrically
/// around the drive resonance at `u0 = -center / sd`.
fn resonance_breaks<T: Real>(center: T, sd: T, width: T, u_max: f64) -> Vec<T> {
    let u_max = T::lit(u_max);
    let u0 = -center / sd;
    let mut pts = vec![-u_max, u_max, T::zero()];
    if u0.abs() < u_max {
        pts.push(u0);
        let mut w = width / sd;
        while w < u_max * T::two() {
            for p in [u0 - w, u0 + w] {
                if p.abs() < u_max {
                    pts.push(p);
                }
            }
            w *= T::lit(4.0);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * T::lit(16.0));
    pts
}

/// Pointwise ensemble average of [`evolve`] over the inhomogeneous detuning.
///
/// `drive.delta` is the mean of the detuning distribution; its standard
/// deviation is `sqrt(2) * spin.gamma2_star`.
pub fn ensemble_average<T: Real>(
    spin: &SpinParams<T>,
    drive: &DriveParams<T>,
    initial: &BlochState<T>,
    times: &[T],
    cfg: &EnsembleConfig,
) -> Result<Trajectory<T>> {
    Ok(ensemble_estimate(spin, drive, initial, times, cfg)?.0)
}

/// Like [`ensemble_average`], also returning the Monte-Carlo standard error.
pub fn ensemble_estimate<T: Real>(
    spin: &SpinParams<T>,
    drive: &DriveParams<T>,
    initial: &BlochState<T>,
    times: &[T],
    cfg: &EnsembleConfig,
) -> Result<(Trajectory<T>, Option<Vec<BlochState<T>>>)> {
    validate_grid(times, "time")?;
    drive.validate()?;
    initial.validate()?;
    let est = ensemble_mean(spin, drive.delta, cfg, |d| {
        let m = generator(spin, &DriveParams::new(drive.omega_rabi, d));
        Ok(propagate_samples(&m, initial, times))
    })?;
    Ok((Trajectory { times: times.to_vec(), states: est.mean }, est.std_error))
}
