//! CODATA 2018 constants used by the coupling model.

use crate::scalar::Real;

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_5693e-3;
/// Electron Compton wavelength, m.
pub const COMPTON_WAVELENGTH: f64 = 2.426_310_238_67e-12;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Constants bundle converted to the working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    pub alpha: T,
    pub lambda_c: T,
    pub e_charge: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata2018() -> Self {
        Self {
            alpha: T::lit(FINE_STRUCTURE),
            lambda_c: T::lit(COMPTON_WAVELENGTH),
            e_charge: T::lit(ELEMENTARY_CHARGE),
        }
    }

    /// `alpha * lambda_c / (2 pi)`, the impact parameter at which the
    /// dimensionless coupling reaches one.
    pub fn unit_coupling_length(&self) -> T {
        self.alpha * self.lambda_c / T::TAU()
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata2018()
    }
}
