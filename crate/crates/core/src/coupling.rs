//! Beam-to-spin coupling: dimensionless coupling, resonant current and the
//! resulting Rabi frequency.

use crate::constants::PhysicalConstants;
use crate::error::{ensure, Error, Result};
use crate::params::BeamParams;
use crate::scalar::Real;

/// Dimensionless coupling `alpha * lambda_c / (2 pi rho0)`.
pub fn compute_phi0<T: Real>(rho0: T) -> Result<T> {
    ensure(rho0.is_finite() && rho0 > T::zero(), || {
        Error::Domain(format!("impact parameter must be positive, got {rho0:e}"))
    })?;
    Ok(PhysicalConstants::<T>::codata2018().unit_coupling_length() / rho0)
}

/// First-harmonic current amplitude `2 b eta I0`.
///
/// A delta-comb current with mean `I0` carries `2 I0` in each Fourier
/// harmonic; the bunching factor and delivery efficiency scale that down.
pub fn effective_resonant_current<T: Real>(beam: &BeamParams<T>) -> T {
    T::two() * beam.bunching * beam.delivery_efficiency * beam.i0
}

/// Rabi frequency `I_res phi0 / e` in rad/s.
pub fn rabi_frequency<T: Real>(beam: &BeamParams<T>) -> Result<T> {
    let phi0 = compute_phi0(beam.rho0)?;
    let e = PhysicalConstants::<T>::codata2018().e_charge;
    Ok(effective_resonant_current(beam) * phi0 / e)
}

/// Resonant current that produces the Rabi frequency `omega` at `rho0`.
pub fn current_for_rabi<T: Real>(omega: T, rho0: T) -> Result<T> {
    let phi0 = compute_phi0(rho0)?;
    Ok(PhysicalConstants::<T>::codata2018().e_charge * omega / phi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::presets;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi0_examples() {
        // alpha * lambda_c / (2 pi * 10 um), evaluated independently.
        assert!(rel(compute_phi0(10e-6).unwrap(), 2.817_940_326_198_206e-10) < 1e-13);
        let unit = PhysicalConstants::<f64>::codata2018().unit_coupling_length();
        assert!(rel(compute_phi0(unit).unwrap(), 1.0) < 1e-14);
        let half = compute_phi0(20e-6).unwrap() / compute_phi0(10e-6).unwrap();
        assert!(rel(half, 0.5) < 1e-15);
    }

    #[test]
    fn phi0_rejects_non_positive() {
        assert!(matches!(compute_phi0(0.0_f64), Err(Error::Domain(_))));
        assert!(compute_phi0(-1e-6_f64).is_err());
    }

    #[test]
    fn resonant_current_examples() {
        let mut b = presets::beam(16e-6_f64);
        assert!(rel(effective_resonant_current(&b), 32e-6) < 1e-15);
        b.delivery_efficiency = 0.65;
        assert!(rel(effective_resonant_current(&b), 20.8e-6) < 1e-14);
        b.bunching = 0.0;
        assert_eq!(effective_resonant_current(&b), 0.0);
    }

    #[test]
    fn rabi_examples() {
        let w = rabi_frequency(&presets::beam(16e-6_f64)).unwrap();
        assert!(rel(w, 56_282.240_375_216_075) < 1e-12);
        let w = rabi_frequency(&presets::beam(1e-3_f64)).unwrap();
        assert!(rel(w, 3_517_640.023_451_005_6) < 1e-12);
        assert_eq!(rabi_frequency(&presets::beam(0.0_f64)).unwrap(), 0.0);
        let i = current_for_rabi(w, 10e-6).unwrap();
        assert!(rel(i, 2e-3) < 1e-13);
    }

    #[test]
    fn single_precision_instantiation() {
        let w = rabi_frequency(&presets::beam(16e-6_f32)).unwrap();
        assert!(((w as f64) - 56_282.24).abs() / 56_282.24 < 1e-5);
    }
}
