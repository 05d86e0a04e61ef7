//! Charge-state decomposition of emission spectra into NV⁻ and NV⁰
//! components plus a flat background.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::linalg::Matrix;
use crate::nnls::nnls;
use crate::scalar::{compensated_sum, Real};

/// Accepted wavelength window (nm).
pub const WAVELENGTH_RANGE_NM: (f64, f64) = (400.0, 1000.0);

/// Smallest accepted angle between the two reference vectors.
pub const MIN_REFERENCE_ANGLE_DEG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Cl,
    PlCl,
    ReferenceNvMinus,
    ReferenceNvZero,
}

impl SpectrumKind {
    pub fn is_reference(&self) -> bool {
        matches!(self, Self::ReferenceNvMinus | Self::ReferenceNvZero)
    }
}

/// Wavelength-sampled intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub wavelengths: Vec<T>,
    pub intensities: Vec<T>,
    pub kind: SpectrumKind,
}

impl<T: Real> Spectrum<T> {
    /// Validates and wraps a spectrum. Reference spectra must be
    /// non-negative; measured spectra may dip below zero after background
    /// subtraction or through noise.
    pub fn new(wavelengths: Vec<T>, intensities: Vec<T>, kind: SpectrumKind) -> Result<Self> {
        let s = Self { wavelengths, intensities, kind };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.wavelengths.is_empty(), || Error::Argument("empty spectrum".into()))?;
        ensure(self.wavelengths.len() == self.intensities.len(), || {
            Error::Argument(format!(
                "{} wavelengths but {} intensities",
                self.wavelengths.len(),
                self.intensities.len()
            ))
        })?;
        ensure(self.wavelengths.windows(2).all(|w| w[1] > w[0]), || {
            Error::Argument("wavelengths must be strictly increasing".into())
        })?;
        let (lo, hi) = (T::lit(WAVELENGTH_RANGE_NM.0), T::lit(WAVELENGTH_RANGE_NM.1));
        ensure(self.wavelengths.iter().all(|w| *w >= lo && *w <= hi), || {
            Error::Argument(format!("wavelengths must lie in [{lo}, {hi}] nm"))
        })?;
        ensure(self.intensities.iter().all(|v| v.is_finite()), || {
            Error::Argument("non-finite intensity".into())
        })?;
        if self.kind.is_reference() {
            ensure(self.intensities.iter().all(|v| *v >= T::zero()), || {
                Error::Argument("reference intensities must be non-negative".into())
            })?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { intensities: self.intensities.iter().map(|v| *v * c).collect(), ..self.clone() }
    }

    /// Linear interpolation onto `grid`; every grid point must fall inside
    /// this spectrum's wavelength support.
    pub fn resample(&self, grid: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        let (first, last) = (self.wavelengths[0], self.wavelengths[n - 1]);
        let slack = T::lit(1e-9) * last.abs();
        grid.iter()
            .map(|&g| {
                ensure(g >= first - slack && g <= last + slack, || {
                    Error::Interpolation(format!("{g} nm outside reference support [{first}, {last}] nm"))
                })?;
                if n == 1 {
                    return Ok(self.intensities[0]);
                }
                let idx = self.wavelengths.partition_point(|w| *w <= g).clamp(1, n - 1);
                let (x0, x1) = (self.wavelengths[idx - 1], self.wavelengths[idx]);
                let (y0, y1) = (self.intensities[idx - 1], self.intensities[idx]);
                let t = ((g - x0) / (x1 - x0)).max(T::zero()).min(T::one());
                Ok(y0 + t * (y1 - y0))
            })
            .collect()
    }
}

/// Shape of a synthetic reference spectrum (all lengths in nm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceShape<T> {
    pub zpl_nm: T,
    pub zpl_sigma_nm: T,
    pub sideband_offset_nm: T,
    pub sideband_sigma_nm: T,
    /// Sideband area relative to the zero-phonon line.
    pub sideband_area_ratio: T,
}

impl<T: Real> ReferenceShape<T> {
    pub fn nv_minus() -> Self {
        Self::with_zpl(T::lit(637.0))
    }

    pub fn nv_zero() -> Self {
        Self::with_zpl(T::lit(575.0))
    }

    fn with_zpl(zpl_nm: T) -> Self {
        Self {
            zpl_nm,
            zpl_sigma_nm: T::lit(2.0),
            sideband_offset_nm: T::lit(60.0),
            sideband_sigma_nm: T::lit(25.0),
            sideband_area_ratio: T::lit(3.0),
        }
    }

    pub fn for_kind(kind: SpectrumKind) -> Result<Self> {
        match kind {
            SpectrumKind::ReferenceNvMinus => Ok(Self::nv_minus()),
            SpectrumKind::ReferenceNvZero => Ok(Self::nv_zero()),
            _ => Err(Error::Argument("synthetic references exist only for NV- and NV0".into())),
        }
    }
}

/// Zero-phonon Gaussian plus a red-shifted phonon sideband, scaled to unit
/// Euclidean norm on `grid`.
pub fn synthesize_reference<T: Real>(kind: SpectrumKind, grid: &[T]) -> Result<Spectrum<T>> {
    synthesize_reference_with(kind, grid, &ReferenceShape::for_kind(kind)?)
}

pub fn synthesize_reference_with<T: Real>(
    kind: SpectrumKind,
    grid: &[T],
    shape: &ReferenceShape<T>,
) -> Result<Spectrum<T>> {
    ensure(shape.zpl_sigma_nm > T::zero() && shape.sideband_sigma_nm > T::zero(), || {
        Error::Argument("reference line widths must be positive".into())
    })?;
    ensure(shape.sideband_area_ratio >= T::zero(), || {
        Error::Argument("sideband area ratio must be non-negative".into())
    })?;
    let gauss = |x: T, mu: T, s: T| {
        let u = (x - mu) / s;
        (-(u * u) * T::half()).exp() / (s * T::TAU().sqrt())
    };
    let raw: Vec<T> = grid
        .iter()
        .map(|&x| {
            gauss(x, shape.zpl_nm, shape.zpl_sigma_nm)
                + shape.sideband_area_ratio
                    * gauss(x, shape.zpl_nm + shape.sideband_offset_nm, shape.sideband_sigma_nm)
        })
        .collect();
    let norm = compensated_sum(raw.iter().map(|v| *v * *v)).sqrt();
    ensure(norm > T::zero(), || Error::Argument("reference vanishes on the grid".into()))?;
    Spectrum::new(grid.to_vec(), raw.into_iter().map(|v| v / norm).collect(), kind)
}

/// Forward model `scale * (f ref_minus + (1 - f) ref_zero) + baseline` on
/// the reference grid, plus seeded Gaussian noise whose standard deviation
/// is `noise_rel` times the peak of the noiseless mixture.
pub fn synthesize_mixture<T: Real>(
    ref_minus: &Spectrum<T>,
    ref_zero: &Spectrum<T>,
    fraction_minus: T,
    scale: T,
    baseline: T,
    noise_rel: T,
    seed: u64,
) -> Result<Spectrum<T>> {
    ensure(fraction_minus >= T::zero() && fraction_minus <= T::one(), || {
        Error::Argument(format!("fraction_minus {fraction_minus} outside [0, 1]"))
    })?;
    ensure(scale > T::zero() && baseline >= T::zero() && noise_rel >= T::zero(), || {
        Error::Argument("mixture needs scale > 0, baseline >= 0, noise >= 0".into())
    })?;
    let grid = &ref_minus.wavelengths;
    let zero = ref_zero.resample(grid)?;
    let clean: Vec<T> = ref_minus
        .intensities
        .iter()
        .zip(&zero)
        .map(|(m, z)| scale * (fraction_minus * *m + (T::one() - fraction_minus) * *z) + baseline)
        .collect();
    let peak = clean.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let sd = (noise_rel * peak).to_f64_lossy();
    let noisy = if sd > 0.0 {
        let normal = Normal::new(0.0, sd).map_err(|e| Error::Argument(format!("noise: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        clean.into_iter().map(|v| v + T::lit(normal.sample(&mut rng))).collect()
    } else {
        clean
    };
    Spectrum::new(grid.clone(), noisy, SpectrumKind::Cl)
}

/// Non-negative weights of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeWeights<T> {
    pub w_minus: T,
    pub w_zero: T,
    pub baseline: T,
    /// RMS of the fit residual per grid point.
    pub residual_rms: T,
    /// Smallest normalized KKT gradient over zero weights (see [`crate::nnls`]).
    pub kkt_min: T,
}

impl<T: Real> ChargeWeights<T> {
    /// `w_minus / (w_minus + w_zero)`, undefined when both weights vanish.
    pub fn fraction_minus(&self) -> Option<T> {
        let total = self.w_minus + self.w_zero;
        (total > T::zero()).then(|| self.w_minus / total)
    }
}

/// Angle (degrees) between two vectors.
fn angle_deg<T: Real>(a: &[T], b: &[T]) -> T {
    let dot = compensated_sum(a.iter().zip(b).map(|(x, y)| *x * *y));
    let na = compensated_sum(a.iter().map(|x| *x * *x)).sqrt();
    let nb = compensated_sum(b.iter().map(|x| *x * *x)).sqrt();
    let c = (dot / (na * nb)).max(-T::one()).min(T::one());
    c.acos().to_degrees()
}

/// Fits `target ≈ w_minus ref_minus + w_zero ref_zero + baseline` with all
/// three coefficients non-negative.
pub fn decompose_spectrum<T: Real>(
    target: &Spectrum<T>,
    ref_minus: &Spectrum<T>,
    ref_zero: &Spectrum<T>,
) -> Result<ChargeWeights<T>> {
    target.validate()?;
    ref_minus.validate()?;
    ref_zero.validate()?;
    let grid = &target.wavelengths;
    let a_minus = ref_minus.resample(grid)?;
    let a_zero = ref_zero.resample(grid)?;
    let norm = |v: &[T]| compensated_sum(v.iter().map(|x| *x * *x)).sqrt();
    ensure(norm(&a_minus) > T::zero() && norm(&a_zero) > T::zero(), || {
        Error::Conditioning("reference spectrum vanishes on the target grid".into())
    })?;
    let angle = angle_deg(&a_minus, &a_zero);
    ensure(angle > T::lit(MIN_REFERENCE_ANGLE_DEG), || {
        Error::Conditioning(format!("reference spectra are nearly parallel ({angle:.3} degrees)"))
    })?;
    let m = grid.len();
    let mut a = Matrix::zeros(m, 3);
    for i in 0..m {
        a[(i, 0)] = a_minus[i];
        a[(i, 1)] = a_zero[i];
        a[(i, 2)] = T::one();
    }
    let sol = nnls(&a, &target.intensities)?;
    Ok(ChargeWeights {
        w_minus: sol.x[0],
        w_zero: sol.x[1],
        baseline: sol.x[2],
        residual_rms: sol.residual_norm / T::from_usize_lossy(m).sqrt(),
        kkt_min: sol.kkt_min,
    })
}

/// One row of a current series: a decomposition or the error it raised.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsRow<T> {
    pub current: T,
    pub weights: std::result::Result<ChargeWeights<T>, Error>,
}

/// Decomposes each spectrum of a series independently, preserving order.
/// Failures are recorded per row.
pub fn weights_vs_current<T: Real>(
    series: &[(T, Spectrum<T>)],
    ref_minus: &Spectrum<T>,
    ref_zero: &Spectrum<T>,
) -> Result<Vec<WeightsRow<T>>> {
    ensure(!series.is_empty(), || Error::Argument("empty spectrum series".into()))?;
    Ok(series
        .par_iter()
        .map(|(current, s)| WeightsRow { current: *current, weights: decompose_spectrum(s, ref_minus, ref_zero) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=400).map(|k| 500.0 + 0.75 * k as f64).collect()
    }

    fn peak(s: &Spectrum<f64>) -> f64 {
        let (i, _) = s
            .intensities
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        s.wavelengths[i]
    }

    #[test]
    fn references_peak_at_zero_phonon_lines() {
        let g = grid();
        let m = synthesize_reference(SpectrumKind::ReferenceNvMinus, &g).unwrap();
        let z = synthesize_reference(SpectrumKind::ReferenceNvZero, &g).unwrap();
        assert!((peak(&m) - 637.0).abs() <= 1.0);
        assert!((peak(&z) - 575.0).abs() <= 1.0);
        let n: f64 = m.intensities.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_reference_target() {
        let g = grid();
        let m = synthesize_reference(SpectrumKind::ReferenceNvMinus, &g).unwrap();
        let z = synthesize_reference(SpectrumKind::ReferenceNvZero, &g).unwrap();
        let target = Spectrum { kind: SpectrumKind::Cl, ..m.clone() };
        let w = decompose_spectrum(&target, &m, &z).unwrap();
        assert!((w.w_minus - 1.0).abs() < 1e-10);
        assert!(w.w_zero.abs() < 1e-10);
        assert!(w.residual_rms < 1e-8);
    }

    #[test]
    fn rejects_parallel_references_and_out_of_support_grids() {
        let g = grid();
        let m = synthesize_reference(SpectrumKind::ReferenceNvMinus, &g).unwrap();
        let target = Spectrum { kind: SpectrumKind::Cl, ..m.clone() };
        let twin = Spectrum { kind: SpectrumKind::ReferenceNvZero, ..m.clone() };
        assert!(matches!(decompose_spectrum(&target, &m, &twin), Err(Error::Conditioning(_))));
        let narrow: Vec<f64> = (0..=100).map(|k| 550.0 + k as f64).collect();
        let mn = synthesize_reference(SpectrumKind::ReferenceNvMinus, &narrow).unwrap();
        let zn = synthesize_reference(SpectrumKind::ReferenceNvZero, &narrow).unwrap();
        assert!(matches!(decompose_spectrum(&target, &mn, &zn), Err(Error::Interpolation(_))));
    }

    #[test]
    fn series_isolates_errors() {
        let g = grid();
        let m = synthesize_reference(SpectrumKind::ReferenceNvMinus, &g).unwrap();
        let z = synthesize_reference(SpectrumKind::ReferenceNvZero, &g).unwrap();
        let good = Spectrum { kind: SpectrumKind::Cl, ..m.clone() };
        let empty = Spectrum { wavelengths: vec![], intensities: vec![], kind: SpectrumKind::Cl };
        let rows = weights_vs_current(&[(1e-6, good.clone()), (2e-6, empty), (3e-6, good)], &m, &z).unwrap();
        assert!(rows[0].weights.is_ok() && rows[1].weights.is_err() && rows[2].weights.is_ok());
        assert_eq!(rows[1].current, 2e-6);
    }
}
