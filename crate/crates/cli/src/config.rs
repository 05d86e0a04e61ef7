#![allow(non_snake_case)]

//! Run configuration. Every key carries its unit; cyclic frequencies
//! (`_MHz`, `_GHz`) are converted to angular units on load.

use serde::Deserialize;

use beamspin::dynamics::{EnsembleConfig, EnsembleMethod};
use beamspin::params::{hz_to_angular, BeamParams, SpinParams};
use beamspin::sweeps::AxisScale;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub spin: SpinSection,
    #[serde(default)]
    pub beam: BeamSection,
    pub ensemble: Option<EnsembleSection>,
    pub simulate: Option<SimulateSection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    pub t1_ms: f64,
    pub t2_us: f64,
    /// Cyclic inhomogeneous rate; the detuning spread is `sqrt(2) * 2 pi` times this.
    pub gamma2star_MHz: f64,
    #[serde(default = "default_omega0")]
    pub omega0_GHz: f64,
    #[serde(default = "default_contrast")]
    pub readout_contrast: f64,
    #[serde(default = "one")]
    pub baseline_counts: f64,
}

fn default_omega0() -> f64 {
    2.87
}
fn default_contrast() -> f64 {
    0.3
}
fn one() -> f64 {
    1.0
}

impl Default for SpinSection {
    fn default() -> Self {
        Self {
            t1_ms: 5.0,
            t2_us: 100.0,
            gamma2star_MHz: 1.9,
            omega0_GHz: default_omega0(),
            readout_contrast: default_contrast(),
            baseline_counts: 1.0,
        }
    }
}

impl SpinSection {
    pub fn to_params(&self) -> Result<SpinParams<f64>, CliError> {
        let spin = SpinParams::from_lifetimes(self.t1_ms * 1e-3, self.t2_us * 1e-6, self.gamma2star_MHz * 1e6)?
            .with_omega0(hz_to_angular(self.omega0_GHz * 1e9))
            .with_readout(self.readout_contrast, self.baseline_counts);
        spin.validate()?;
        Ok(spin)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub current_uA: f64,
    #[serde(default = "one")]
    pub bunching: f64,
    #[serde(default = "one")]
    pub delivery_efficiency: f64,
    #[serde(default = "default_rho0")]
    pub rho0_um: f64,
    /// Offset of the modulation from the spin line (cyclic).
    #[serde(default)]
    pub detuning_MHz: f64,
}

fn default_rho0() -> f64 {
    10.0
}

impl Default for BeamSection {
    fn default() -> Self {
        Self { current_uA: 0.0, bunching: 1.0, delivery_efficiency: 1.0, rho0_um: default_rho0(), detuning_MHz: 0.0 }
    }
}

impl BeamSection {
    pub fn to_params(&self, spin: &SpinParams<f64>) -> Result<BeamParams<f64>, CliError> {
        let beam = BeamParams {
            i0: self.current_uA * 1e-6,
            bunching: self.bunching,
            delivery_efficiency: self.delivery_efficiency,
            rho0: self.rho0_um * 1e-6,
            omega_i: spin.omega0 + hz_to_angular(self.detuning_MHz * 1e6),
        };
        beam.validate()?;
        Ok(beam)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_method")]
    pub method: String,
    /// Quadrature nodes, Monte-Carlo samples, or the adaptive segment cap.
    pub nodes: Option<usize>,
}

fn default_method() -> String {
    "gauss-hermite".into()
}

impl EnsembleSection {
    pub fn to_config(&self, seed: u64) -> Result<EnsembleConfig, CliError> {
        let method: EnsembleMethod = self.method.parse()?;
        let base = match method {
            EnsembleMethod::GaussHermite => EnsembleConfig::default(),
            EnsembleMethod::MonteCarlo => EnsembleConfig::monte_carlo(4096, seed),
            EnsembleMethod::Adaptive => EnsembleConfig::adaptive(),
        };
        let cfg = EnsembleConfig { n_nodes: self.nodes.unwrap_or(base.n_nodes), seed, ..base };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// rabi | relaxometry | odmr | hahn-echo | charge-series
    pub sequence: String,
    pub time_start_us: Option<f64>,
    pub time_stop_us: Option<f64>,
    pub time_points: Option<usize>,
    /// Cyclic Rabi frequency of the MW drive.
    pub mw_rabi_MHz: Option<f64>,
    /// Relaxometry: drive with the configured beam (true) or not.
    #[serde(default)]
    pub beam_on: bool,
    pub freq_start_MHz: Option<f64>,
    pub freq_stop_MHz: Option<f64>,
    pub freq_points: Option<usize>,
    pub pulse_length_us: Option<f64>,
    #[serde(default)]
    pub zeeman_split_MHz: Vec<f64>,
    /// Hahn echo refocusing axis: x | y.
    pub pulse_axis: Option<String>,
    /// native | fluorescence
    pub readout: Option<String>,
    pub shots: Option<u64>,
    pub charge: Option<ChargeSeriesSection>,
}

/// Synthetic NV⁻/NV⁰ mixture series.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSeriesSection {
    pub currents_uA: Vec<f64>,
    pub fractions_minus: Vec<f64>,
    #[serde(default = "default_wl_start")]
    pub wavelength_start_nm: f64,
    #[serde(default = "default_wl_stop")]
    pub wavelength_stop_nm: f64,
    #[serde(default = "default_wl_points")]
    pub wavelength_points: usize,
    /// Gaussian noise standard deviation relative to the peak intensity.
    #[serde(default)]
    pub noise_rel: f64,
    #[serde(default)]
    pub baseline: f64,
}

fn default_wl_start() -> f64 {
    500.0
}
fn default_wl_stop() -> f64 {
    800.0
}
fn default_wl_points() -> usize {
    601
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// contrast-map | reduction-curves
    pub kind: String,
    pub gamma2star_min_MHz: Option<f64>,
    pub gamma2star_max_MHz: Option<f64>,
    pub gamma2star_points: Option<usize>,
    pub gamma2_min_per_s: Option<f64>,
    pub gamma2_max_per_s: Option<f64>,
    pub gamma2_points: Option<usize>,
    /// linear | log (both map axes)
    pub scale: Option<String>,
    pub current_min_uA: Option<f64>,
    pub current_max_uA: Option<f64>,
    pub current_points: Option<usize>,
    pub current_scale: Option<String>,
    /// Reports the current reaching this `T1_beam / T1` on every curve.
    pub target_ratio: Option<f64>,
    #[serde(default)]
    pub curve: Vec<CurveSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub label: String,
    pub rho0_um: f64,
    pub gamma2star_MHz: f64,
}

impl RunConfig {
    /// The configured ensemble, or `fallback` when the section is absent.
    pub fn ensemble(&self, seed: u64, fallback: EnsembleConfig) -> Result<EnsembleConfig, CliError> {
        match &self.ensemble {
            Some(e) => e.to_config(seed),
            None => Ok(EnsembleConfig { seed, ..fallback }),
        }
    }
}

pub fn parse_scale(s: Option<&str>, default: AxisScale) -> Result<AxisScale, CliError> {
    match s {
        None => Ok(default),
        Some("linear") => Ok(AxisScale::Linear),
        Some("log") => Ok(AxisScale::Log),
        Some(other) => Err(CliError::Input(format!("unknown axis scale '{other}' (linear | log)"))),
    }
}

pub fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("missing key '{key}'")))
}

/// Parses a config document, reporting line and key on failure.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
}
