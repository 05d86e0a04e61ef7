//! Analytic predictions: the Voigt profile, the beam-enhanced relaxation
//! rate, relaxometry contrast and the inverse map from a measured T1 ratio
//! to an upper bound on the coupling.
//!
//! The enhanced rate is
//!
//! ```text
//! gamma1_beam = gamma1 + pi * Omega_R^2 * V(delta; sqrt(2) gamma2*, gamma2)
//! ```
//!
//! where `V(x; sigma, gamma)` is the unit-area Voigt profile. `delta = 0` is
//! resonant modulation; non-zero detunings evaluate the profile off-centre.
//! All rates are angular (rad/s) and `gamma1` is the jump rate, so the
//! observable lifetime is `1/(2 gamma1_beam)`.

use num_complex::Complex;

use crate::coupling::{current_for_rabi, rabi_frequency};
use crate::error::{ensure, Error, Result};
use crate::faddeeva::faddeeva;
use crate::params::{BeamParams, SpinParams};
use crate::scalar::Real;

/// Arguments of the Voigt profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoigtArgs<T> {
    pub x: T,
    /// Gaussian standard deviation.
    pub sigma: T,
    /// Lorentzian half width at half maximum.
    pub gamma: T,
}

impl<T: Real> VoigtArgs<T> {
    pub fn new(x: T, sigma: T, gamma: T) -> Self {
        Self { x, sigma, gamma }
    }
}

/// Unit-area convolution of a centred Gaussian and Lorentzian, evaluated at `x`.
pub fn voigt<T: Real>(args: VoigtArgs<T>) -> Result<T> {
    let VoigtArgs { x, sigma, gamma } = args;
    ensure(sigma >= T::zero() && gamma >= T::zero(), || {
        Error::Domain(format!("Voigt widths must be non-negative (sigma={sigma:e}, gamma={gamma:e})"))
    })?;
    ensure(sigma > T::zero() || gamma > T::zero(), || {
        Error::Domain("Voigt profile needs a non-zero width".into())
    })?;
    ensure(x.is_finite() && sigma.is_finite() && gamma.is_finite(), || {
        Error::Domain("non-finite Voigt argument".into())
    })?;
    let x = x.abs();
    if gamma == T::zero() {
        let u = x / sigma;
        return Ok((-(u * u) * T::half()).exp() / (sigma * T::TAU().sqrt()));
    }
    if sigma == T::zero() {
        return Ok(gamma / (T::PI() * (x * x + gamma * gamma)));
    }
    let s2 = sigma * T::SQRT_2();
    let w = faddeeva(Complex::new(x / s2, gamma / s2));
    Ok(w.re / (sigma * T::TAU().sqrt()))
}

/// Full width at half maximum of a Voigt profile (Olivero–Longbothum
/// approximation, accurate to ~2e-4).
pub fn voigt_fwhm<T: Real>(sigma: T, gamma: T) -> T {
    let fg = T::two() * (T::two() * T::LN_2()).sqrt() * sigma;
    let fl = T::two() * gamma;
    T::lit(0.5346) * fl + (T::lit(0.2166) * fl * fl + fg * fg).sqrt()
}

/// Beam-enhanced jump rate for Rabi amplitude `omega_rabi` at drive
/// detuning `delta`.
pub fn beam_relaxation_rate<T: Real>(spin: &SpinParams<T>, omega_rabi: T, delta: T) -> Result<T> {
    ensure(omega_rabi >= T::zero() && omega_rabi.is_finite(), || {
        Error::Domain(format!("Rabi amplitude must be finite and >= 0, got {omega_rabi:e}"))
    })?;
    let v = voigt(VoigtArgs::new(delta, spin.detuning_spread(), spin.gamma2))?;
    Ok(spin.gamma1 + T::PI() * omega_rabi * omega_rabi * v)
}

/// `T1_beam / T1` for a resonantly modulated beam.
pub fn t1_reduction_ratio<T: Real>(spin: &SpinParams<T>, beam: &BeamParams<T>) -> Result<T> {
    t1_reduction_ratio_at(spin, rabi_frequency(beam)?, T::zero())
}

/// `T1_beam / T1` for an explicit Rabi amplitude and detuning.
pub fn t1_reduction_ratio_at<T: Real>(spin: &SpinParams<T>, omega_rabi: T, delta: T) -> Result<T> {
    ensure(spin.gamma1 > T::zero(), || {
        Error::Domain("T1 ratio undefined for gamma1 = 0".into())
    })?;
    Ok(spin.gamma1 / beam_relaxation_rate(spin, omega_rabi, delta)?)
}

/// Integration window for the relaxometry contrast.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ContrastHorizon<T> {
    /// Integrate the exponentials to infinity: contrast = 1 - T1_beam/T1.
    #[default]
    Infinite,
    /// Integrate to `k * T1` of the reference decay.
    ReferenceLifetimes(T),
}

/// `1 - integral(z_beam) / integral(z_ref)` on the closed-form exponentials.
pub fn integrated_contrast<T: Real>(spin: &SpinParams<T>, beam: &BeamParams<T>) -> Result<T> {
    integrated_contrast_with(spin, beam, ContrastHorizon::Infinite)
}

pub fn integrated_contrast_with<T: Real>(
    spin: &SpinParams<T>,
    beam: &BeamParams<T>,
    horizon: ContrastHorizon<T>,
) -> Result<T> {
    let ratio = t1_reduction_ratio(spin, beam)?;
    contrast_from_ratio(ratio, horizon)
}

/// Contrast for a known lifetime ratio `T1_beam / T1`.
pub fn contrast_from_ratio<T: Real>(ratio: T, horizon: ContrastHorizon<T>) -> Result<T> {
    match horizon {
        ContrastHorizon::Infinite => Ok(T::one() - ratio),
        ContrastHorizon::ReferenceLifetimes(k) => {
            ensure(k > T::zero(), || Error::Argument("horizon must be positive".into()))?;
            // In units of the reference T1: integral_0^k exp(-t/r) dt = r (1 - exp(-k/r)).
            let beam = ratio * (T::one() - (-k / ratio).exp());
            let reference = T::one() - (-k).exp();
            Ok(T::one() - beam / reference)
        }
    }
}

/// Largest Rabi amplitude compatible with a lower bound `ratio_lower_bound`
/// on `T1_beam / T1`.
pub fn invert_coupling_bound<T: Real>(ratio_lower_bound: T, spin: &SpinParams<T>) -> Result<T> {
    ensure(ratio_lower_bound > T::zero() && ratio_lower_bound <= T::one(), || {
        Error::Domain(format!("ratio bound must lie in (0, 1], got {ratio_lower_bound}"))
    })?;
    if ratio_lower_bound == T::one() {
        return Ok(T::zero());
    }
    let v = voigt(VoigtArgs::new(T::zero(), spin.detuning_spread(), spin.gamma2))?;
    let excess = spin.gamma1 * (T::one() / ratio_lower_bound - T::one());
    Ok((excess / (T::PI() * v)).sqrt())
}

/// Resonant current bound equivalent to `omega_max` at impact parameter `rho0`.
pub fn equivalent_current<T: Real>(omega_max: T, rho0: T) -> Result<T> {
    current_for_rabi(omega_max, rho0)
}
