//! `simulate`: pulse sequences and synthetic charge-state spectra.

use beamspin::closed_form::beam_relaxation_rate;
use beamspin::coupling::rabi_frequency;
use beamspin::dynamics::EnsembleConfig;
use beamspin::fit::{fit_exponential, format_with_uncertainty, FitOptions};
use beamspin::params::{hz_to_angular, SpinParams};
use beamspin::sequences::{apply_shot_noise, run_sequence, CountsRecord, Readout, RefocusingPulse, SequenceSpec};
use beamspin::spectra::{synthesize_mixture, synthesize_reference, Spectrum, SpectrumKind};
use beamspin::sweeps::Engine;

use super::{linspace, Context};
use crate::config::{require, SimulateSection};
use crate::output::{num, write_csv, Header};
use crate::svg::{self, Labels, Series};
use crate::{CliError, Status};

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let sim = ctx
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::Input("simulate needs a [simulate] config section".into()))?;
    let hash = ctx.hash("simulate", &[])?;
    if sim.sequence == "charge-series" {
        return charge_series(ctx, sim, &hash);
    }
    let spin = ctx.config.spin.to_params()?;
    let engine = ctx.engine.unwrap_or(Engine::Dynamics);
    let readout = match sim.readout.as_deref().unwrap_or("native") {
        "native" => Readout::Native,
        "fluorescence" => Readout::Fluorescence,
        other => return Err(CliError::Input(format!("unknown readout '{other}' (native | fluorescence)"))),
    };
    let times = || -> Result<Vec<f64>, CliError> {
        let v = linspace(
            require(sim.time_start_us, "simulate.time_start_us")?,
            require(sim.time_stop_us, "simulate.time_stop_us")?,
            require(sim.time_points, "simulate.time_points")?,
        )?;
        Ok(v.into_iter().map(|t| t * 1e-6).collect())
    };
    let spec = match sim.sequence.as_str() {
        "rabi" => SequenceSpec::Rabi {
            mw_rabi: hz_to_angular(require(sim.mw_rabi_MHz, "simulate.mw_rabi_MHz")? * 1e6),
            times: times()?,
        },
        "relaxometry" => {
            let (beam_rabi, beam_detuning) = if sim.beam_on {
                let beam = ctx.config.beam.to_params(&spin)?;
                (rabi_frequency(&beam)?, beam.detuning(&spin))
            } else {
                (0.0, 0.0)
            };
            SequenceSpec::Relaxometry { beam_rabi, beam_detuning, taus: times()? }
        }
        "odmr" => {
            let freqs = linspace(
                require(sim.freq_start_MHz, "simulate.freq_start_MHz")?,
                require(sim.freq_stop_MHz, "simulate.freq_stop_MHz")?,
                require(sim.freq_points, "simulate.freq_points")?,
            )?;
            SequenceSpec::Odmr {
                mw_rabi: hz_to_angular(require(sim.mw_rabi_MHz, "simulate.mw_rabi_MHz")? * 1e6),
                pulse_length: require(sim.pulse_length_us, "simulate.pulse_length_us")? * 1e-6,
                frequencies: freqs.into_iter().map(|f| hz_to_angular(f * 1e6)).collect(),
                zeeman_split: sim.zeeman_split_MHz.iter().map(|f| hz_to_angular(f * 1e6)).collect(),
            }
        }
        "hahn-echo" => SequenceSpec::HahnEcho {
            pulse: match sim.pulse_axis.as_deref().unwrap_or("x") {
                "x" => RefocusingPulse::X,
                "y" => RefocusingPulse::Y,
                other => return Err(CliError::Input(format!("unknown pulse_axis '{other}' (x | y)"))),
            },
            taus: times()?,
        },
        other => {
            return Err(CliError::Input(format!(
                "unknown sequence '{other}' (rabi | relaxometry | odmr | hahn-echo | charge-series)"
            )))
        }
    };

    let (mut records, trajectory) = match (engine, &spec) {
        (Engine::Dynamics, _) => {
            let ens = ctx.config.ensemble(ctx.seed, EnsembleConfig::default())?;
            let out = run_sequence(&spin, &spec, &ens, readout)?;
            (out.records, out.trajectory)
        }
        (Engine::ClosedForm, SequenceSpec::Relaxometry { beam_rabi, beam_detuning, taus }) => {
            let t1_beam = closed_form_t1(&spin, *beam_rabi, *beam_detuning)?;
            let recs = taus
                .iter()
                .map(|&t| {
                    let z = (-t / t1_beam).exp();
                    CountsRecord::noiseless(t, readout.apply(&spin, z, z))
                })
                .collect();
            (recs, None)
        }
        (Engine::ClosedForm, s) => {
            return Err(CliError::Input(format!(
                "the closed-form engine only covers relaxometry, not '{}'",
                s.kind()
            )))
        }
    };
    if let Some(shots) = sim.shots {
        records = apply_shot_noise(&records, shots, ctx.seed)?;
    }

    let header = ctx
        .header("simulate", &hash)
        .note("sequence", spec.kind())
        .note("engine", engine)
        .note("readout", sim.readout.as_deref().unwrap_or("native"));
    let setting_unit = if matches!(spec, SequenceSpec::Odmr { .. }) { "rad/s" } else { "s" };
    let signal_unit = match readout {
        Readout::Native => "1",
        Readout::Fluorescence => "counts/shot",
    };
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                num(r.setting),
                num(r.mean_signal),
                r.counts.map(|c| c.to_string()).unwrap_or_default(),
                r.shots.to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.path("simulate.csv"),
        &header,
        &["setting", "mean_signal", "counts", "shots"],
        &[setting_unit, signal_unit, "1", "1"],
        &rows,
    )?;

    if let Some(tr) = &trajectory {
        let rows: Vec<Vec<String>> = tr
            .times
            .iter()
            .zip(&tr.states)
            .map(|(t, s)| vec![num(*t), num(s.x), num(s.y), num(s.z)])
            .collect();
        write_csv(&ctx.path("trajectory.csv"), &header, &["time", "x", "y", "z"], &["s", "1", "1", "1"], &rows)?;
    }

    if let SequenceSpec::Relaxometry { beam_rabi, beam_detuning, .. } = &spec {
        relaxometry_summary(ctx, &header, &spin, *beam_rabi, *beam_detuning, &records)?;
    }

    if ctx.svg {
        let series = vec![Series {
            label: spec.kind().to_string(),
            points: records.iter().map(|r| (r.setting, r.observed())).collect(),
        }];
        let x = format!("setting ({setting_unit})");
        let labels = Labels { title: spec.kind(), x: &x, y: "signal" };
        ctx.write_svg("simulate.svg", &svg::line_plot(&labels, &series, false, ctx.timestamp.as_deref()))?;
    }
    Ok(Status::Ok)
}

/// Closed-form lifetime `1 / (2 gamma1_beam)`.
fn closed_form_t1(spin: &SpinParams<f64>, omega: f64, delta: f64) -> Result<f64, CliError> {
    Ok(1.0 / (2.0 * beam_relaxation_rate(spin, omega, delta)?))
}

/// Fits the simulated record and compares it with the closed form.
fn relaxometry_summary(
    ctx: &Context,
    header: &Header,
    spin: &SpinParams<f64>,
    omega: f64,
    delta: f64,
    records: &[CountsRecord<f64>],
) -> Result<(), CliError> {
    let t1 = spin.t1();
    let t1_beam = closed_form_t1(spin, omega, delta)?;
    let fitted = match fit_exponential(records, &FitOptions::default()) {
        Ok(fit) => {
            let (t, se) = (fit.get("T").unwrap_or(f64::NAN), fit.std_error("T").unwrap_or(f64::NAN));
            format!(
                "fitted T: {} s\nfitted T (formatted): {}\nfit converged: {}\n",
                num(t),
                format_with_uncertainty(t, se, "s"),
                fit.converged
            )
        }
        Err(e) => format!("fitted T: unavailable ({e})\n"),
    };
    let body = format!(
        "T1: {} s\nbeam Rabi amplitude: {} rad/s\nclosed-form T1_beam: {} s\nclosed-form ratio: {}\n{fitted}",
        num(t1),
        num(omega),
        num(t1_beam),
        num(t1_beam / t1),
    );
    ctx.report("summary.txt", header, &body)
}

/// Synthetic NV⁻/NV⁰ mixtures on a shared grid, one file per current.
fn charge_series(ctx: &Context, sim: &SimulateSection, hash: &str) -> Result<Status, CliError> {
    let ch = sim
        .charge
        .as_ref()
        .ok_or_else(|| CliError::Input("charge-series needs a [simulate.charge] section".into()))?;
    if ch.currents_uA.len() != ch.fractions_minus.len() {
        return Err(CliError::Input(format!(
            "charge.currents_uA has {} entries but charge.fractions_minus has {}",
            ch.currents_uA.len(),
            ch.fractions_minus.len()
        )));
    }
    let grid = linspace(ch.wavelength_start_nm, ch.wavelength_stop_nm, ch.wavelength_points)?;
    let ref_minus = synthesize_reference(SpectrumKind::ReferenceNvMinus, &grid)?;
    let ref_zero = synthesize_reference(SpectrumKind::ReferenceNvZero, &grid)?;
    let header = ctx.header("simulate", hash).note("sequence", "charge-series");
    write_spectrum(ctx, "ref_minus.csv", &header, &ref_minus)?;
    write_spectrum(ctx, "ref_zero.csv", &header, &ref_zero)?;
    for (k, (&current, &f)) in ch.currents_uA.iter().zip(&ch.fractions_minus).enumerate() {
        let seed = ctx.seed.wrapping_add(k as u64);
        let s = synthesize_mixture(&ref_minus, &ref_zero, f, 1.0, ch.baseline, ch.noise_rel, seed)?;
        let h = header.clone().note("current_uA", current).note("fraction_minus", f).note("noise_seed", seed);
        write_spectrum(ctx, &format!("spectrum_{k:03}.csv"), &h, &s)?;
    }
    Ok(Status::Ok)
}

fn write_spectrum(ctx: &Context, name: &str, header: &Header, s: &Spectrum<f64>) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> =
        s.wavelengths.iter().zip(&s.intensities).map(|(w, i)| vec![num(*w), num(*i)]).collect();
    write_csv(&ctx.path(name), header, &["wavelength_nm", "intensity"], &["nm", "a.u."], &rows)
}
