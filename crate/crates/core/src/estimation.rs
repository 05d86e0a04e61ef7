//! Confidence intervals for the lifetime ratio `T1_beam / T1_ref` and the
//! coupling bound that follows from its lower end.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::closed_form::{equivalent_current, invert_coupling_bound};
use crate::error::{ensure, Error, Result};
use crate::fit::FitResult;
use crate::params::SpinParams;
use crate::scalar::Real;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Default number of parametric-bootstrap draws.
pub const BOOTSTRAP_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CiMethod {
    #[default]
    DeltaMethod,
    /// Resample both lifetimes from their fit uncertainties with a seeded
    /// generator and take the empirical 2.5/97.5 percentiles.
    ParametricBootstrap { seed: u64 },
}

/// Point estimate and 95% interval of `T_beam / T_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate<T> {
    pub ratio: T,
    /// Delta-method standard error of the ratio.
    pub std_error: T,
    pub ci_lower: T,
    pub ci_upper: T,
    pub method: CiMethod,
}

/// Lifetime and its standard error pulled from a converged decay fit.
fn lifetime<T: Real>(fit: &FitResult<T>, which: &str) -> Result<(T, T)> {
    ensure(fit.converged, || Error::Argument(format!("{which} fit did not converge")))?;
    let t = fit
        .get("T")
        .ok_or_else(|| Error::Argument(format!("{which} fit has no lifetime parameter 'T'")))?;
    let s = fit.std_error("T").unwrap_or(T::zero());
    ensure(t > T::zero() && t.is_finite(), || {
        Error::Argument(format!("{which} lifetime must be positive, got {t}"))
    })?;
    Ok((t, s))
}

/// Ratio of two fitted lifetimes with a 95% confidence interval.
pub fn estimate_ratio<T: Real>(
    fit_beam: &FitResult<T>,
    fit_ref: &FitResult<T>,
    method: CiMethod,
) -> Result<RatioEstimate<T>> {
    let (tb, sb) = lifetime(fit_beam, "beam")?;
    let (tr, sr) = lifetime(fit_ref, "reference")?;
    ratio_from_lifetimes(tb, sb, tr, sr, method)
}

/// [`estimate_ratio`] on bare lifetimes and standard errors.
pub fn ratio_from_lifetimes<T: Real>(
    t_beam: T,
    se_beam: T,
    t_ref: T,
    se_ref: T,
    method: CiMethod,
) -> Result<RatioEstimate<T>> {
    ensure(t_beam > T::zero() && t_ref > T::zero(), || {
        Error::Argument("lifetimes must be positive".into())
    })?;
    ensure(se_beam >= T::zero() && se_ref >= T::zero(), || {
        Error::Argument("standard errors must be non-negative".into())
    })?;
    let r = t_beam / t_ref;
    let rel = ((se_beam / t_beam).powi(2) + (se_ref / t_ref).powi(2)).sqrt();
    let sigma = r * rel;
    let (lo, hi) = match method {
        CiMethod::DeltaMethod => {
            let half = T::lit(Z_95) * sigma;
            (r - half, r + half)
        }
        CiMethod::ParametricBootstrap { seed } => {
            bootstrap_interval(t_beam.to_f64_lossy(), se_beam.to_f64_lossy(), t_ref.to_f64_lossy(), se_ref.to_f64_lossy(), seed)?
        }
    };
    Ok(RatioEstimate { ratio: r, std_error: sigma, ci_lower: lo.min(r), ci_upper: hi.max(r), method })
}

fn bootstrap_interval<T: Real>(tb: f64, sb: f64, tr: f64, sr: f64, seed: u64) -> Result<(T, T)> {
    let nb = Normal::new(tb, sb).map_err(|e| Error::Argument(format!("beam lifetime: {e}")))?;
    let nr = Normal::new(tr, sr).map_err(|e| Error::Argument(format!("reference lifetime: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(BOOTSTRAP_DRAWS);
    for _ in 0..BOOTSTRAP_DRAWS {
        let b = nb.sample(&mut rng);
        let d = nr.sample(&mut rng);
        // A non-positive reference lifetime has no physical ratio.
        if d > 0.0 {
            draws.push(b / d);
        }
    }
    ensure(draws.len() >= BOOTSTRAP_DRAWS / 2, || {
        Error::Numerical("reference lifetime too uncertain for bootstrap".into())
    })?;
    draws.sort_by(|a, b| a.total_cmp(b));
    Ok((T::lit(percentile(&draws, 0.025)), T::lit(percentile(&draws, 0.975))))
}

/// Linear interpolation between order statistics of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Upper bound on the coupling implied by a ratio interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingBound<T> {
    Constraining {
        /// Largest Rabi amplitude compatible with the data (rad/s).
        omega_max: T,
        /// Equivalent resonant current at the given impact parameter (A).
        i_res_max: T,
    },
    /// The interval reaches `T_beam >= T_ref`, so no bound follows.
    NotConstraining,
}

impl<T: Real> CouplingBound<T> {
    pub fn is_constraining(&self) -> bool {
        matches!(self, CouplingBound::Constraining { .. })
    }
}

/// Converts the lower end of a ratio interval into a coupling bound.
///
/// Lower ends at or below zero are clamped to machine epsilon, which yields
/// a finite but very weak bound.
pub fn coupling_bound_pipeline<T: Real>(
    ratio: &RatioEstimate<T>,
    spin: &SpinParams<T>,
    rho0: T,
) -> Result<CouplingBound<T>> {
    if ratio.ci_lower >= T::one() {
        return Ok(CouplingBound::NotConstraining);
    }
    let r = ratio.ci_lower.max(T::epsilon()).min(T::one());
    let omega_max = invert_coupling_bound(r, spin)?;
    let i_res_max = equivalent_current(omega_max, rho0)?;
    Ok(CouplingBound::Constraining { omega_max, i_res_max })
}
