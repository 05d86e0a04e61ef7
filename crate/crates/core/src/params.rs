//! Parameter containers for the qubit and the electron beam.
//!
//! All rates and frequencies are stored in angular units (rad/s). Values
//! quoted in cyclic units (Hz, MHz) must go through [`hz_to_angular`] at
//! ingestion; lifetimes go through the `from_*` constructors which apply the
//! `T1 = 1/(2 gamma1)` and `T2 = 1/gamma2` relations.

use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

/// Converts a cyclic frequency in Hz to rad/s.
pub fn hz_to_angular<T: Real>(hz: T) -> T {
    hz * T::TAU()
}

/// Converts an angular frequency in rad/s to Hz.
pub fn angular_to_hz<T: Real>(w: T) -> T {
    w / T::TAU()
}

/// Spin-qubit rates and readout model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams<T> {
    /// Longitudinal jump rate; `T1 = 1/(2 gamma1)`.
    pub gamma1: T,
    /// Homogeneous coherence decay rate; `T2 = 1/gamma2`.
    pub gamma2: T,
    /// Inhomogeneous dephasing rate. Detunings are drawn with standard
    /// deviation `sqrt(2) * gamma2_star`.
    pub gamma2_star: T,
    /// Spin transition angular frequency.
    pub omega0: T,
    /// Fractional fluorescence contrast between the two spin states.
    pub readout_contrast: T,
    /// Mean photons per shot at the dark-state level.
    pub baseline_counts: T,
}

impl<T: Real> SpinParams<T> {
    /// Builds parameters from lifetimes (s) and a cyclic inhomogeneous
    /// linewidth rate (Hz), which is converted by 2 pi.
    pub fn from_lifetimes(t1: T, t2: T, gamma2_star_hz: T) -> Result<Self> {
        ensure(t1 > T::zero() && t2 > T::zero(), || {
            Error::Domain(format!("lifetimes must be positive (t1={t1:e}, t2={t2:e})"))
        })?;
        let p = Self {
            gamma1: T::one() / (T::two() * t1),
            gamma2: T::one() / t2,
            gamma2_star: hz_to_angular(gamma2_star_hz),
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_omega0(mut self, omega0: T) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_readout(mut self, contrast: T, baseline_counts: T) -> Self {
        self.readout_contrast = contrast;
        self.baseline_counts = baseline_counts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma2_star", self.gamma2_star),
        ];
        for (name, v) in rates {
            ensure(v.is_finite() && v >= T::zero(), || {
                Error::Domain(format!("{name} must be finite and non-negative, got {v:e}"))
            })?;
        }
        ensure(self.omega0.is_finite() && self.omega0 > T::zero(), || {
            Error::Domain(format!("omega0 must be positive, got {:e}", self.omega0))
        })?;
        ensure(
            self.readout_contrast >= T::zero() && self.readout_contrast <= T::one(),
            || Error::Domain(format!("readout_contrast {} outside [0, 1]", self.readout_contrast)),
        )?;
        ensure(
            self.baseline_counts.is_finite() && self.baseline_counts >= T::zero(),
            || Error::Domain("baseline_counts must be non-negative".into()),
        )
    }

    /// Soft consistency checks that do not invalidate the parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.gamma2 < self.gamma1 {
            out.push(format!(
                "gamma2 ({:e}) below gamma1 ({:e}); unusual for NV ensembles",
                self.gamma2, self.gamma1
            ));
        }
        out
    }

    /// Energy relaxation time `1/(2 gamma1)`.
    pub fn t1(&self) -> T {
        T::one() / (T::two() * self.gamma1)
    }

    /// Homogeneous coherence time `1/gamma2`.
    pub fn t2(&self) -> T {
        T::one() / self.gamma2
    }

    /// Decay rate of the population difference `<sigma_z>`.
    pub fn population_decay_rate(&self) -> T {
        T::two() * self.gamma1
    }

    /// Decay rate of the transverse Bloch components.
    pub fn coherence_decay_rate(&self) -> T {
        self.gamma1 + self.gamma2
    }

    /// Standard deviation of the quasi-static detuning distribution.
    pub fn detuning_spread(&self) -> T {
        T::SQRT_2() * self.gamma2_star
    }
}

impl<T: Real> Default for SpinParams<T> {
    fn default() -> Self {
        Self {
            gamma1: T::zero(),
            gamma2: T::zero(),
            gamma2_star: T::zero(),
            omega0: hz_to_angular(T::lit(2.87e9)),
            readout_contrast: T::lit(0.3),
            baseline_counts: T::one(),
        }
    }
}

/// Average current and geometry of a modulated electron beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    /// Average current, A.
    pub i0: T,
    /// Bunching factor; 1 is a perfect delta-comb.
    pub bunching: T,
    /// Fraction of the bunched current delivered at the spin.
    pub delivery_efficiency: T,
    /// Impact parameter, m.
    pub rho0: T,
    /// Modulation angular frequency, rad/s.
    pub omega_i: T,
}

impl<T: Real> BeamParams<T> {
    /// Perfectly bunched, fully delivered beam resonant with `omega0`.
    pub fn perfectly_bunched(i0: T, rho0: T, omega0: T) -> Self {
        Self {
            i0,
            bunching: T::one(),
            delivery_efficiency: T::one(),
            rho0,
            omega_i: omega0,
        }
    }

    pub fn with_current(mut self, i0: T) -> Self {
        self.i0 = i0;
        self
    }

    pub fn with_rho0(mut self, rho0: T) -> Self {
        self.rho0 = rho0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.i0.is_finite() && self.i0 >= T::zero(), || {
            Error::Domain(format!("beam current must be non-negative, got {:e}", self.i0))
        })?;
        let unit = |v: T| v >= T::zero() && v <= T::one();
        ensure(unit(self.bunching), || {
            Error::Domain(format!("bunching {} outside [0, 1]", self.bunching))
        })?;
        ensure(unit(self.delivery_efficiency), || {
            Error::Domain(format!(
                "delivery_efficiency {} outside [0, 1]",
                self.delivery_efficiency
            ))
        })?;
        ensure(self.rho0.is_finite() && self.rho0 > T::zero(), || {
            Error::Domain(format!("impact parameter must be positive, got {:e}", self.rho0))
        })?;
        ensure(self.omega_i.is_finite(), || {
            Error::Domain("modulation frequency must be finite".into())
        })
    }

    /// Detuning `omega_i - omega0` of the modulation from the spin line.
    pub fn detuning(&self, spin: &SpinParams<T>) -> T {
        self.omega_i - spin.omega0
    }
}

/// Reference parameter sets quoted for the NV ensemble and the beam line.
pub mod presets {
    use super::*;

    /// Impact parameter used throughout the worked examples, m.
    pub const RHO0_M: f64 = 10e-6;

    /// Single-NV sensing example: T1 = 5 ms, T2 = 100 us, 1.9 MHz inhomogeneous rate.
    pub fn sensing_example<T: Real>() -> SpinParams<T> {
        SpinParams::from_lifetimes(T::lit(5e-3), T::lit(100e-6), T::lit(1.9e6))
            .expect("valid preset")
    }

    /// Coherent-control example: T1 = 5 ms, T2 = 3.3 ms, 1.9 MHz inhomogeneous rate.
    pub fn control_example<T: Real>() -> SpinParams<T> {
        SpinParams::from_lifetimes(T::lit(5e-3), T::lit(3.3e-3), T::lit(1.9e6))
            .expect("valid preset")
    }

    /// Measured ensemble: T1 = 5.7 ms, T2 = 10.6 us, gamma2* = 12 MHz.
    pub fn measured_ensemble<T: Real>() -> SpinParams<T> {
        SpinParams::from_lifetimes(T::lit(5.7e-3), T::lit(10.6e-6), T::lit(12e6))
            .expect("valid preset")
    }

    /// Perfectly bunched beam at the given average current and 10 um.
    pub fn beam<T: Real>(i0: T) -> BeamParams<T> {
        BeamParams::perfectly_bunched(i0, T::lit(RHO0_M), hz_to_angular(T::lit(2.87e9)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifetime_conventions() {
        let p = SpinParams::<f64>::from_lifetimes(5.7e-3, 10.6e-6, 12e6).unwrap();
        assert!((p.gamma1 - 87.719_298_245_614_04).abs() < 1e-9);
        assert!((p.t1() - 5.7e-3).abs() < 1e-15);
        assert!((p.t2() - 10.6e-6).abs() < 1e-18);
        assert!((p.gamma2_star - 2.0 * std::f64::consts::PI * 12e6).abs() < 1e-6);
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SpinParams::<f64>::from_lifetimes(-1.0, 1.0, 0.0).is_err());
        let mut b = presets::beam::<f64>(1e-6);
        b.bunching = 1.5;
        assert!(b.validate().is_err());
        b.bunching = 1.0;
        b.rho0 = 0.0;
        assert!(b.validate().is_err());
    }

    #[test]
    fn slow_coherence_warns() {
        let p = SpinParams::<f64> {
            gamma1: 10.0,
            gamma2: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_ok());
        assert_eq!(p.warnings().len(), 1);
    }
}
