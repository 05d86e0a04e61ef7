//! Simulation and estimation toolkit for a solid-state spin qubit driven by
//! a GHz-modulated electron beam.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the precision used by the CLI and
//! the accuracy contracts.

pub mod closed_form;
pub mod constants;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod faddeeva;
pub mod fit;
pub mod linalg;
pub mod nnls;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod sequences;
pub mod spectra;
pub mod sweeps;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpinParams64 = params::SpinParams<f64>;
pub type SpinParams32 = params::SpinParams<f32>;
pub type BeamParams64 = params::BeamParams<f64>;
pub type BeamParams32 = params::BeamParams<f32>;
pub type DriveParams64 = dynamics::DriveParams<f64>;
pub type BlochState64 = dynamics::BlochState<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type VoigtArgs64 = closed_form::VoigtArgs<f64>;
pub type CountsRecord64 = sequences::CountsRecord<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type RatioEstimate64 = estimation::RatioEstimate<f64>;
pub type Spectrum64 = spectra::Spectrum<f64>;
pub type ChargeWeights64 = spectra::ChargeWeights<f64>;
pub type SweepResult64 = sweeps::SweepResult<f64>;
