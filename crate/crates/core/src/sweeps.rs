//! Parameter sweeps for the sensing roadmap: contrast maps over
//! `(gamma2*, gamma2)` and T1-reduction curves versus beam current.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::closed_form::{integrated_contrast, t1_reduction_ratio, t1_reduction_ratio_at};
use crate::coupling::rabi_frequency;
use crate::dynamics::{DriveParams, EnsembleConfig};
use crate::error::{ensure, Error, Result};
use crate::fit::{fit_exponential, FitOptions, Weighting};
use crate::params::{hz_to_angular, BeamParams, SpinParams};
use crate::scalar::Real;
use crate::sequences::simulate_relaxometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub name: String,
    pub min: T,
    pub max: T,
    pub n_points: usize,
    pub scale: AxisScale,
}

impl<T: Real> Axis<T> {
    pub fn new(name: &str, min: T, max: T, n_points: usize, scale: AxisScale) -> Self {
        Self { name: name.to_string(), min, max, n_points, scale }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n_points >= 2, || Error::Argument(format!("axis '{}' needs at least 2 points", self.name)))?;
        ensure(self.min.is_finite() && self.max.is_finite() && self.min < self.max, || {
            Error::Argument(format!("axis '{}' needs finite min < max", self.name))
        })?;
        if self.scale == AxisScale::Log {
            ensure(self.min > T::zero(), || {
                Error::Argument(format!("log axis '{}' needs min > 0", self.name))
            })?;
        }
        Ok(())
    }

    /// Node coordinates, endpoints included exactly.
    pub fn values(&self) -> Result<Vec<T>> {
        self.validate()?;
        let last = self.n_points - 1;
        let denom = T::from_usize_lossy(last);
        Ok((0..self.n_points)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == last {
                    return self.max;
                }
                let f = T::from_usize_lossy(k) / denom;
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * f,
                    AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect())
    }
}

/// Two-dimensional grid: `x` sweeps `gamma2*`, `y` sweeps `gamma2` (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub x: Axis<T>,
    pub y: Axis<T>,
}

/// How each node is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    ClosedForm,
    /// Ensemble-averaged relaxometry with and without the beam, each fitted
    /// to a single exponential.
    Dynamics,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Self::ClosedForm),
            "dynamics" => Ok(Self::Dynamics),
            _ => Err(Error::Argument(format!("unknown engine '{s}' (closed-form | dynamics)"))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed-form",
            Self::Dynamics => "dynamics",
        })
    }
}

/// Settings of the dynamics engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsProtocol {
    pub ensemble: EnsembleConfig,
    /// Wait times per relaxometry record.
    pub n_taus: usize,
    /// Record length in units of the closed-form beam lifetime.
    pub span_lifetimes: f64,
}

impl Default for DynamicsProtocol {
    fn default() -> Self {
        Self { ensemble: EnsembleConfig::adaptive(), n_taus: 40, span_lifetimes: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    pub engine: Engine,
    /// SHA-256 over the sweep inputs.
    pub config_hash: String,
    /// Per-node failures; the matching values are NaN.
    pub log: Vec<String>,
}

/// Values on a grid, stored row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub values: Vec<T>,
    pub metadata: SweepMetadata,
}

impl<T: Real> SweepResult<T> {
    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.x.len() + ix]
    }
}

/// Hex SHA-256 of a canonical text rendering of the inputs.
pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fitted `T_beam / T_ref` from simulated relaxometry records.
///
/// Both records share a linear wait-time grid spanning `span_lifetimes`
/// closed-form beam lifetimes; each is fitted to `A exp(-t/T)` without
/// weights.
pub fn dynamics_t1_ratio<T: Real>(
    spin: &SpinParams<T>,
    omega_rabi: T,
    delta: T,
    protocol: &DynamicsProtocol,
) -> Result<T> {
    ensure(protocol.n_taus >= 3, || Error::Argument("need at least 3 wait times".into()))?;
    ensure(protocol.span_lifetimes > 0.0, || Error::Argument("record span must be positive".into()))?;
    let ratio_cf = t1_reduction_ratio_at(spin, omega_rabi, delta)?;
    let span = T::lit(protocol.span_lifetimes) * spin.t1() * ratio_cf;
    let n = protocol.n_taus;
    let taus: Vec<T> = (1..=n).map(|k| span * T::from_usize_lossy(k) / T::from_usize_lossy(n)).collect();
    let opts = FitOptions::with_weighting(Weighting::Unweighted);
    let fit_t = |omega: T| -> Result<T> {
        let recs = simulate_relaxometry(spin, &DriveParams::new(omega, delta), &taus, &protocol.ensemble)?;
        let fit = fit_exponential(&recs, &opts)?;
        fit.get("T").ok_or_else(|| Error::Numerical("fit lost its lifetime".into()))
    };
    let t_beam = fit_t(omega_rabi)?;
    let t_ref = fit_t(T::zero())?;
    Ok(t_beam / t_ref)
}

/// Integrated relaxometry contrast over a `(gamma2*, gamma2)` grid.
///
/// Failures at individual nodes are logged and stored as NaN.
pub fn contrast_map<T: Real>(
    grid: &GridSpec<T>,
    spin: &SpinParams<T>,
    beam: &BeamParams<T>,
    engine: Engine,
    protocol: &DynamicsProtocol,
) -> Result<SweepResult<T>> {
    beam.validate()?;
    let xs = grid.x.values()?;
    let ys = grid.y.values()?;
    let omega = rabi_frequency(beam)?;
    let nodes: Vec<(T, T)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let evaluated: Vec<std::result::Result<T, String>> = nodes
        .par_iter()
        .map(|&(g2s, g2)| {
            let node = SpinParams { gamma2_star: g2s, gamma2: g2, ..*spin };
            let v = node.validate().and_then(|_| match engine {
                Engine::ClosedForm => integrated_contrast(&node, beam),
                Engine::Dynamics => {
                    dynamics_t1_ratio(&node, omega, T::zero(), protocol).map(|r| T::one() - r)
                }
            });
            v.map_err(|e| format!("gamma2*={g2s:e} gamma2={g2:e}: {e}"))
        })
        .collect();
    let mut log = Vec::new();
    let values = evaluated
        .into_iter()
        .map(|r| r.unwrap_or_else(|msg| {
            log.push(msg);
            T::nan()
        }))
        .collect();
    let canonical = format!("contrast_map|{grid:?}|{spin:?}|{beam:?}|{engine}|{protocol:?}");
    Ok(SweepResult {
        x_name: grid.x.name.clone(),
        y_name: grid.y.name.clone(),
        x: xs,
        y: ys,
        values,
        metadata: SweepMetadata { engine, config_hash: config_hash(&canonical), log },
    })
}

/// Beam geometry and inhomogeneous rate of one reduction curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig<T> {
    pub label: String,
    pub rho0: T,
    pub gamma2_star: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCurve<T> {
    pub config: CurveConfig<T>,
    pub currents: Vec<T>,
    pub ratios: Vec<T>,
}

/// `T1_beam / T1` along a current axis for each configuration.
pub fn reduction_curves<T: Real>(
    currents: &[T],
    configs: &[CurveConfig<T>],
    spin: &SpinParams<T>,
    beam: &BeamParams<T>,
) -> Result<Vec<ReductionCurve<T>>> {
    ensure(!currents.is_empty(), || Error::Argument("empty current axis".into()))?;
    ensure(currents.windows(2).all(|w| w[1] > w[0]), || {
        Error::Argument("currents must be strictly increasing".into())
    })?;
    configs
        .iter()
        .map(|cfg| {
            let node = SpinParams { gamma2_star: cfg.gamma2_star, ..*spin };
            node.validate()?;
            let ratios = currents
                .iter()
                .map(|&i0| {
                    let b = BeamParams { i0, rho0: cfg.rho0, ..*beam };
                    b.validate()?;
                    t1_reduction_ratio(&node, &b)
                })
                .collect::<Result<Vec<T>>>()?;
            Ok(ReductionCurve { config: cfg.clone(), currents: currents.to_vec(), ratios })
        })
        .collect()
}

/// Average current at which `T1_beam / T1` equals `target`.
///
/// Bisection in `ln I0` to relative 1e-8 on a bracket that starts at
/// [1 nA, 1 A] and is widened geometrically (down to 1e-18 A, up to 1e6 A).
pub fn find_current_for_ratio<T: Real>(target: T, spin: &SpinParams<T>, beam: &BeamParams<T>) -> Result<T> {
    ensure(target > T::zero() && target < T::one(), || {
        Error::Argument(format!("target ratio must lie in (0, 1), got {target}"))
    })?;
    let ratio = |i0: T| t1_reduction_ratio(spin, &BeamParams { i0, ..*beam });
    let (mut lo, mut hi) = (T::lit(1e-9), T::one());
    while ratio(lo)? <= target {
        lo /= T::lit(1e3);
        ensure(lo >= T::lit(1e-18), || {
            Error::Range(format!("ratio {target} is reached below 1e-18 A"))
        })?;
    }
    while ratio(hi)? > target {
        hi *= T::lit(10.0);
        ensure(hi <= T::lit(1e6), || Error::Range(format!("ratio {target} not reachable below 1e6 A")))?;
    }
    let tol = T::lit(1e-8).max(T::epsilon() * T::lit(4.0));
    for _ in 0..400 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        if ratio(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Roadmap inputs.
pub mod roadmap {
    use super::*;

    /// A labelled point of the contrast map.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Star<T> {
        pub label: &'static str,
        pub gamma2_star: T,
        pub gamma2: T,
    }

    /// Drive current of the contrast map, A.
    pub const MAP_CURRENT_A: f64 = 10e-6;

    /// Roadmap spin: T1 = 5 ms, T2 = 10 us, gamma2* = 12 MHz.
    pub fn spin<T: Real>() -> SpinParams<T> {
        SpinParams::from_lifetimes(T::lit(5e-3), T::lit(10e-6), T::lit(12e6)).expect("valid preset")
    }

    /// Present ensemble and an ideal single NV (gamma2* = 0.1 MHz, T2 = 1 ms).
    pub fn stars<T: Real>() -> [Star<T>; 2] {
        [
            Star {
                label: "current-system",
                gamma2_star: hz_to_angular(T::lit(12e6)),
                gamma2: T::one() / T::lit(10.6e-6),
            },
            Star { label: "single-nv", gamma2_star: hz_to_angular(T::lit(0.1e6)), gamma2: T::one() / T::lit(1e-3) },
        ]
    }

    /// Present system plus configurations with lower `gamma2*` and a
    /// smaller impact parameter.
    pub fn curves<T: Real>() -> Vec<CurveConfig<T>> {
        let c = |label: &str, ghz_star: f64, rho0: f64| CurveConfig {
            label: label.to_string(),
            rho0: T::lit(rho0),
            gamma2_star: hz_to_angular(T::lit(ghz_star)),
        };
        vec![
            c("current-system", 12e6, 10e-6),
            c("gamma2star-1.2MHz", 1.2e6, 10e-6),
            c("gamma2star-0.12MHz", 0.12e6, 10e-6),
            c("gamma2star-0.12MHz-rho0-1um", 0.12e6, 1e-6),
        ]
    }
}
