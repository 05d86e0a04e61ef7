//! End-to-end pulse-sequence experiments on the ensemble: Rabi drive, T1
//! relaxometry under beam drive, pulsed ODMR and Hahn echo.
//!
//! Native signals (before any readout map):
//! * Rabi and relaxometry record `<sigma_z>`;
//! * ODMR records the bright-state population `(1 + <sigma_z>)/2`, so the
//!   resonance shows up as a dip below 1;
//! * Hahn echo records the refocused coherence along the preparation axis,
//!   with the setting equal to the total free-evolution time `2 tau`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::dynamics::{
    ensemble_average, ensemble_mean, generator, validate_grid, BlochState, DriveParams,
    EnsembleConfig, Trajectory,
};
use crate::error::{ensure, Error, Result};
use crate::params::SpinParams;
use crate::scalar::{compensated_sum, Real};

/// One point of a measured or simulated sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountsRecord<T> {
    /// Swept quantity: wait time (s) or MW angular frequency (rad/s).
    pub setting: T,
    /// Expected signal per shot.
    pub mean_signal: T,
    /// Detected counts summed over `shots`, when shot noise was applied.
    pub counts: Option<u64>,
    pub shots: u64,
}

impl<T: Real> CountsRecord<T> {
    pub fn noiseless(setting: T, mean_signal: T) -> Self {
        Self { setting, mean_signal, counts: None, shots: 1 }
    }

    /// Observed per-shot signal: `counts / shots` when counts exist.
    pub fn observed(&self) -> T {
        match self.counts {
            Some(c) => T::lit(c as f64) / T::lit(self.shots as f64),
            None => self.mean_signal,
        }
    }

    /// Poisson variance of [`observed`](Self::observed), floored at one count.
    pub fn poisson_variance(&self) -> Option<T> {
        self.counts.map(|c| {
            let n = T::lit(self.shots as f64);
            T::lit((c.max(1)) as f64) / (n * n)
        })
    }
}

/// Map from spin observable to recorded signal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Readout {
    /// Keep the native signal of each sequence.
    #[default]
    Native,
    /// Photon counts `baseline * (1 + contrast * (z + 1)/2)` using the spin's
    /// readout parameters.
    Fluorescence,
}

impl Readout {
    /// Recorded signal for a native signal and the matching `<sigma_z>`.
    pub fn apply<T: Real>(&self, spin: &SpinParams<T>, native: T, z: T) -> T {
        match self {
            Readout::Native => native,
            Readout::Fluorescence => {
                spin.baseline_counts * (T::one() + spin.readout_contrast * (z + T::one()) * T::half())
            }
        }
    }
}

/// Axis of the ideal refocusing pi pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefocusingPulse {
    #[default]
    X,
    Y,
}

impl RefocusingPulse {
    fn apply<T: Real>(&self, s: &BlochState<T>) -> BlochState<T> {
        match self {
            RefocusingPulse::X => s.rotate_x_pi(),
            RefocusingPulse::Y => BlochState::new(-s.x, s.y, -s.z),
        }
    }

    /// Sign of the refocused coherence along +x.
    fn echo_sign<T: Real>(&self) -> T {
        match self {
            RefocusingPulse::X => T::one(),
            RefocusingPulse::Y => -T::one(),
        }
    }
}

/// Experiment description.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec<T> {
    Rabi { mw_rabi: T, times: Vec<T> },
    Relaxometry { beam_rabi: T, beam_detuning: T, taus: Vec<T> },
    Odmr { mw_rabi: T, pulse_length: T, frequencies: Vec<T>, zeeman_split: Vec<T> },
    HahnEcho { pulse: RefocusingPulse, taus: Vec<T> },
}

impl<T: Real> SequenceSpec<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            SequenceSpec::Rabi { .. } => "rabi",
            SequenceSpec::Relaxometry { .. } => "relaxometry",
            SequenceSpec::Odmr { .. } => "odmr",
            SequenceSpec::HahnEcho { .. } => "hahn-echo",
        }
    }
}

/// Result of [`run_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutput<T> {
    pub records: Vec<CountsRecord<T>>,
    /// Full ensemble trajectory, for sequences that have one (Rabi).
    pub trajectory: Option<Trajectory<T>>,
}

pub fn run_sequence<T: Real>(
    spin: &SpinParams<T>,
    spec: &SequenceSpec<T>,
    cfg: &EnsembleConfig,
    readout: Readout,
) -> Result<SequenceOutput<T>> {
    match spec {
        SequenceSpec::Rabi { mw_rabi, times } => {
            let tr = simulate_rabi(spin, &DriveParams::resonant(*mw_rabi), times, cfg)?;
            let records = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(&t, s)| CountsRecord::noiseless(t, readout.apply(spin, s.z, s.z)))
                .collect();
            Ok(SequenceOutput { records, trajectory: Some(tr) })
        }
        SequenceSpec::Relaxometry { beam_rabi, beam_detuning, taus } => {
            let drive = DriveParams::new(*beam_rabi, *beam_detuning);
            let records = simulate_relaxometry_with(spin, &drive, taus, cfg, readout)?;
            Ok(SequenceOutput { records, trajectory: None })
        }
        SequenceSpec::Odmr { mw_rabi, pulse_length, frequencies, zeeman_split } => {
            let records =
                simulate_odmr_with(spin, *mw_rabi, *pulse_length, frequencies, cfg, zeeman_split, readout)?;
            Ok(SequenceOutput { records, trajectory: None })
        }
        SequenceSpec::HahnEcho { pulse, taus } => {
            let records = simulate_hahn_echo_with(spin, *pulse, taus, cfg, readout)?;
            Ok(SequenceOutput { records, trajectory: None })
        }
    }
}

/// Ensemble-averaged Rabi oscillation from `z = 1` under a constant drive.
pub fn simulate_rabi<T: Real>(
    spin: &SpinParams<T>,
    drive: &DriveParams<T>,
    times: &[T],
    cfg: &EnsembleConfig,
) -> Result<Trajectory<T>> {
    ensure(drive.omega_rabi > T::zero(), || {
        Error::Argument("Rabi sequence needs a positive drive amplitude".into())
    })?;
    ensemble_average(spin, drive, &BlochState::up(), times, cfg)
}

/// T1 relaxometry: `<sigma_z>(tau)` after initialization to `z = 1` with only
/// the beam drive applied.
pub fn simulate_relaxometry<T: Real>(
    spin: &SpinParams<T>,
    beam_drive: &DriveParams<T>,
    taus: &[T],
    cfg: &EnsembleConfig,
) -> Result<Vec<CountsRecord<T>>> {
    simulate_relaxometry_with(spin, beam_drive, taus, cfg, Readout::Native)
}

pub fn simulate_relaxometry_with<T: Real>(
    spin: &SpinParams<T>,
    beam_drive: &DriveParams<T>,
    taus: &[T],
    cfg: &EnsembleConfig,
    readout: Readout,
) -> Result<Vec<CountsRecord<T>>> {
    validate_grid(taus, "tau")?;
    let tr = ensemble_average(spin, beam_drive, &BlochState::up(), taus, cfg)?;
    Ok(tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(&t, s)| CountsRecord::noiseless(t, readout.apply(spin, s.z, s.z)))
        .collect())
}

/// Pulsed ODMR: a square MW pulse of fixed length at each angular frequency,
/// recording the bright-state population.
///
/// With a non-empty `zeeman_split`, each offset shifts the transition and
/// the spectra of the shifted transitions are averaged with equal weight.
pub fn simulate_odmr<T: Real>(
    spin: &SpinParams<T>,
    mw_rabi: T,
    pulse_length: T,
    frequencies: &[T],
    cfg: &EnsembleConfig,
    zeeman_split: &[T],
) -> Result<Vec<CountsRecord<T>>> {
    simulate_odmr_with(spin, mw_rabi, pulse_length, frequencies, cfg, zeeman_split, Readout::Native)
}

pub fn simulate_odmr_with<T: Real>(
    spin: &SpinParams<T>,
    mw_rabi: T,
    pulse_length: T,
    frequencies: &[T],
    cfg: &EnsembleConfig,
    zeeman_split: &[T],
    readout: Readout,
) -> Result<Vec<CountsRecord<T>>> {
    ensure(pulse_length > T::zero() && pulse_length.is_finite(), || {
        Error::Argument("ODMR pulse length must be positive".into())
    })?;
    ensure(mw_rabi >= T::zero(), || Error::Argument("MW amplitude must be >= 0".into()))?;
    ensure(!frequencies.is_empty(), || Error::Argument("empty frequency grid".into()))?;
    ensure(frequencies.windows(2).all(|w| w[1] > w[0]), || {
        Error::Argument("frequency grid must be strictly increasing".into())
    })?;
    let offsets: Vec<T> = if zeeman_split.is_empty() { vec![T::zero()] } else { zeeman_split.to_vec() };
    let mut out = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let mut zs = Vec::with_capacity(offsets.len());
        for &off in &offsets {
            let detuning = f - (spin.omega0 + off);
            let est = ensemble_mean(spin, detuning, cfg, |d| {
                let m = generator(spin, &DriveParams::new(mw_rabi, d));
                let p = m.scale(pulse_length).expm();
                Ok(vec![BlochState::from_array(p.apply(&BlochState::<T>::up().as_array()))])
            })?;
            zs.push(est.mean[0].z);
        }
        let z = compensated_sum(zs.iter().copied()) / T::from_usize_lossy(zs.len());
        let native = (T::one() + z) * T::half();
        out.push(CountsRecord::noiseless(f, readout.apply(spin, native, z)));
    }
    Ok(out)
}

/// Hahn echo `pi/2 - tau - pi - tau` with ideal instantaneous pulses and no
/// drive during free evolution. Records are indexed by `2 tau`.
pub fn simulate_hahn_echo<T: Real>(
    spin: &SpinParams<T>,
    pulse: RefocusingPulse,
    taus: &[T],
    cfg: &EnsembleConfig,
) -> Result<Vec<CountsRecord<T>>> {
    simulate_hahn_echo_with(spin, pulse, taus, cfg, Readout::Native)
}

pub fn simulate_hahn_echo_with<T: Real>(
    spin: &SpinParams<T>,
    pulse: RefocusingPulse,
    taus: &[T],
    cfg: &EnsembleConfig,
    readout: Readout,
) -> Result<Vec<CountsRecord<T>>> {
    validate_grid(taus, "tau")?;
    let est = ensemble_mean(spin, T::zero(), cfg, |d| {
        let m = generator(spin, &DriveParams::new(T::zero(), d));
        let mut states = Vec::with_capacity(taus.len());
        for &tau in taus {
            let p = m.scale(tau).expm();
            let half = BlochState::from_array(p.apply(&BlochState::<T>::plus_x().as_array()));
            let flipped = pulse.apply(&half);
            states.push(BlochState::from_array(p.apply(&flipped.as_array())));
        }
        Ok(states)
    })?;
    let sign = pulse.echo_sign::<T>();
    Ok(taus
        .iter()
        .zip(&est.mean)
        .map(|(&tau, s)| {
            let amp = sign * s.x;
            // A final pi/2 maps the echo amplitude onto the population axis.
            CountsRecord::noiseless(T::two() * tau, readout.apply(spin, amp, amp))
        })
        .collect())
}

/// Replaces expected signals with Poisson counts over `shots` repetitions.
pub fn apply_shot_noise<T: Real>(
    records: &[CountsRecord<T>],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountsRecord<T>>> {
    ensure(shots >= 1, || Error::Argument("shots must be >= 1".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .iter()
        .map(|r| {
            let lambda = r.mean_signal.to_f64_lossy().max(0.0) * shots as f64;
            ensure(lambda.is_finite(), || Error::Numerical("non-finite mean signal".into()))?;
            let counts = if lambda == 0.0 {
                0
            } else {
                let d = Poisson::new(lambda)
                    .map_err(|e| Error::Numerical(format!("Poisson({lambda}): {e}")))?;
                d.sample(&mut rng) as u64
            };
            Ok(CountsRecord { counts: Some(counts), shots, ..*r })
        })
        .collect()
}
