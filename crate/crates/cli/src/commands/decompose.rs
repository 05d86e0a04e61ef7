//! `decompose`: NV⁻/NV⁰ weights of each spectrum in a series.

use std::path::Path;

use beamspin::spectra::{synthesize_reference, weights_vs_current, ChargeWeights, Spectrum, SpectrumKind};

use super::Context;
use crate::output::{num, parse_f64, read_table, write_csv};
use crate::svg::{self, Labels, Series};
use crate::{CliError, Status};

fn read_spectrum(path: &Path, kind: SpectrumKind) -> Result<Spectrum<f64>, CliError> {
    let file = path.display().to_string();
    let table = read_table(path)?;
    let c_w = table.require_column("wavelength_nm", &file)?;
    let c_i = table.require_column("intensity", &file)?;
    let mut wl = Vec::with_capacity(table.rows.len());
    let mut it = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        wl.push(parse_f64(&cells[c_w], &file, *line, "wavelength_nm")?);
        it.push(parse_f64(&cells[c_i], &file, *line, "intensity")?);
    }
    Spectrum::new(wl, it, kind).map_err(|e| CliError::Input(format!("{file}: {}", e.message())))
}

pub fn run(
    ctx: &Context,
    spectra: &[std::path::PathBuf],
    ref_minus: Option<&Path>,
    ref_zero: Option<&Path>,
    currents_ua: &[f64],
) -> Result<Status, CliError> {
    if spectra.is_empty() {
        return Err(CliError::Input("decompose needs at least one spectrum file".into()));
    }
    if !currents_ua.is_empty() && currents_ua.len() != spectra.len() {
        return Err(CliError::Input(format!(
            "{} currents given for {} spectra",
            currents_ua.len(),
            spectra.len()
        )));
    }
    // Unreadable or invalid spectra become flagged rows, not a fatal error.
    let targets: Vec<Result<Spectrum<f64>, CliError>> =
        spectra.iter().map(|p| read_spectrum(p, SpectrumKind::Cl)).collect();
    let grid = &targets
        .iter()
        .find_map(|t| t.as_ref().ok())
        .ok_or_else(|| CliError::Input("no readable spectrum among the inputs".into()))?
        .wavelengths;
    let reference = |path: Option<&Path>, kind| -> Result<Spectrum<f64>, CliError> {
        match path {
            Some(p) => read_spectrum(p, kind),
            None => Ok(synthesize_reference(kind, grid)?),
        }
    };
    let r_minus = reference(ref_minus, SpectrumKind::ReferenceNvMinus)?;
    let r_zero = reference(ref_zero, SpectrumKind::ReferenceNvZero)?;
    let current = |k: usize| currents_ua.get(k).copied().unwrap_or(k as f64);
    let series: Vec<(f64, Spectrum<f64>)> = targets
        .iter()
        .enumerate()
        .filter_map(|(k, t)| t.as_ref().ok().map(|s| (current(k), s.clone())))
        .collect();
    let mut decomposed = if series.is_empty() {
        Vec::new()
    } else {
        weights_vs_current(&series, &r_minus, &r_zero)?
    }
    .into_iter();
    // Per-row outcome; failures keep only their message.
    let rows: Vec<(f64, Result<ChargeWeights<f64>, String>)> = targets
        .iter()
        .enumerate()
        .map(|(k, t)| match t {
            Ok(_) => {
                let r = decomposed.next().expect("one row per readable spectrum");
                (r.current, r.weights.map_err(|e| e.to_string()))
            }
            Err(e) => (current(k), Err(e.message().to_string())),
        })
        .collect();

    let mut inputs: Vec<&Path> = spectra.iter().map(|p| p.as_path()).collect();
    inputs.extend(ref_minus);
    inputs.extend(ref_zero);
    let hash = ctx.hash("decompose", &inputs)?;
    let header = ctx
        .header("decompose", &hash)
        .note("ref_minus", ref_minus.map(|p| p.display().to_string()).unwrap_or_else(|| "synthesized".into()))
        .note("ref_zero", ref_zero.map(|p| p.display().to_string()).unwrap_or_else(|| "synthesized".into()));
    let nan = || num(f64::NAN);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(current, weights)| match weights {
            Ok(w) => vec![
                num(*current),
                w.fraction_minus().map(num).unwrap_or_else(nan),
                num(w.w_minus),
                num(w.w_zero),
                num(w.baseline),
                num(w.residual_rms),
                num(w.kkt_min),
                "ok".into(),
            ],
            Err(e) => {
                let mut v = vec![num(*current)];
                v.extend((0..6).map(|_| nan()));
                v.push(e.clone());
                v
            }
        })
        .collect();
    write_csv(
        &ctx.path("weights.csv"),
        &header,
        &["current_uA", "fraction_minus", "w_minus", "w_zero", "baseline", "residual_rms", "kkt_min", "status"],
        &["uA", "1", "a.u.", "a.u.", "a.u.", "a.u.", "1", ""],
        &table,
    )?;
    for (current, weights) in &rows {
        match weights {
            Ok(w) => println!(
                "I = {current} uA: fraction NV- = {}",
                w.fraction_minus().map(|f| format!("{f:.4}")).unwrap_or_else(|| "undefined".into())
            ),
            Err(e) => println!("I = {current} uA: failed ({e})"),
        }
    }
    if ctx.svg {
        let series = [Series {
            label: "NV- fraction".into(),
            points: rows
                .iter()
                .map(|(c, w)| (*c, w.as_ref().ok().and_then(|w| w.fraction_minus()).unwrap_or(f64::NAN)))
                .collect(),
        }];
        let labels = Labels { title: "charge-state fraction", x: "current (uA)", y: "NV- fraction" };
        ctx.write_svg("weights.svg", &svg::line_plot(&labels, &series, false, ctx.timestamp.as_deref()))?;
    }
    Ok(Status::Ok)
}
