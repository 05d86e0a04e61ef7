//! `fit`: exponential decays and inverted lineshapes from a record CSV.

use std::path::Path;

use beamspin::closed_form::{voigt, VoigtArgs};
use beamspin::fit::{
    fit_exponential, fit_lineshape, format_with_uncertainty, FitOptions, FitResult, LineshapeModel, Weighting,
};
use beamspin::sequences::CountsRecord;

use super::Context;
use crate::output::{num, parse_f64, read_table, write_csv};
use crate::svg::{self, Labels, Series};
use crate::{CliError, Status};

/// Reads `setting, mean_signal[, counts, shots]` records.
pub fn read_records(path: &Path) -> Result<(Vec<CountsRecord<f64>>, String, String), CliError> {
    let file = path.display().to_string();
    let table = read_table(path)?;
    let c_set = table.require_column("setting", &file)?;
    let c_mean = table.require_column("mean_signal", &file)?;
    let c_counts = table.column("counts");
    let c_shots = table.column("shots");
    let mut records = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        let setting = parse_f64(&cells[c_set], &file, *line, "setting")?;
        let mean_signal = parse_f64(&cells[c_mean], &file, *line, "mean_signal")?;
        let counts = match c_counts.map(|c| cells[c].as_str()) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<u64>().map_err(|_| {
                CliError::Input(format!("{file}:{line}: column 'counts' is not a non-negative integer: '{s}'"))
            })?),
        };
        let shots = match c_shots.map(|c| cells[c].as_str()) {
            None | Some("") => 1,
            Some(s) => s
                .parse::<u64>()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| CliError::Input(format!("{file}:{line}: column 'shots' must be an integer >= 1: '{s}'")))?,
        };
        records.push(CountsRecord { setting, mean_signal, counts, shots });
    }
    Ok((records, table.unit(c_set).to_string(), table.unit(c_mean).to_string()))
}

pub fn run(ctx: &Context, input: &Path, model: &str, weighting: &str) -> Result<Status, CliError> {
    let weighting = match weighting {
        "poisson" => Weighting::Poisson,
        "unweighted" => Weighting::Unweighted,
        other => return Err(CliError::Input(format!("unknown weighting '{other}' (poisson | unweighted)"))),
    };
    let (records, x_unit, y_unit) = read_records(input)?;
    let opts = FitOptions::with_weighting(weighting);
    let fit = match model {
        "exponential" => fit_exponential(&records, &opts)?,
        other => {
            let m: LineshapeModel = other.parse().map_err(|_| {
                CliError::Input(format!("unknown model '{other}' (exponential | gaussian | lorentzian | voigt)"))
            })?;
            fit_lineshape(&records, m, &opts)?
        }
    };
    let unit_of = |name: &str| -> String {
        match name {
            "T" | "center" | "sigma" | "gamma" | "fwhm" => x_unit.clone(),
            _ => y_unit.clone(),
        }
    };

    let hash = ctx.hash("fit", &[input])?;
    let header = ctx
        .header("fit", &hash)
        .note("model", model)
        .note("weighting", format!("{weighting:?}").to_lowercase())
        .note("converged", fit.converged)
        .note("n_iter", fit.n_iter)
        .note("residual_rms", num(fit.residual_rms))
        .note("chi2", num(fit.chi2))
        .note("dof", fit.dof);
    let mut entries: Vec<(String, f64, f64)> =
        fit.names.iter().zip(fit.params.iter().zip(&fit.std_errors)).map(|(n, (v, s))| (n.to_string(), *v, *s)).collect();
    if let Some((w, sw)) = fit.fwhm {
        entries.push(("fwhm".into(), w, sw));
    }
    let rows: Vec<Vec<String>> =
        entries.iter().map(|(n, v, s)| vec![n.clone(), num(*v), num(*s), unit_of(n)]).collect();
    write_csv(&ctx.path("fit.csv"), &header, &["parameter", "value", "std_error", "unit"], &["", "", "", ""], &rows)?;

    let mut body = format!("model: {model}\nconverged: {} after {} iterations\n", fit.converged, fit.n_iter);
    for (n, v, s) in &entries {
        let unit = unit_of(n);
        let unit = if unit == "1" { "" } else { unit.as_str() };
        body.push_str(&format!("{n} = {}\n", format_with_uncertainty(*v, *s, unit)));
    }
    body.push_str(&format!("chi2 = {} with {} degrees of freedom\n", num(fit.chi2), fit.dof));
    ctx.report("fit.txt", &header, &body)?;

    if ctx.svg {
        let data = Series { label: "data".into(), points: records.iter().map(|r| (r.setting, r.observed())).collect() };
        let fitted = Series {
            label: "fit".into(),
            points: records.iter().map(|r| (r.setting, model_value(&fit, model, r.setting))).collect(),
        };
        let x = format!("setting ({x_unit})");
        let labels = Labels { title: model, x: &x, y: "signal" };
        ctx.write_svg("fit.svg", &svg::line_plot(&labels, &[data, fitted], false, ctx.timestamp.as_deref()))?;
    }
    Ok(Status::Ok)
}

/// Fitted model at `x`.
fn model_value(fit: &FitResult<f64>, model: &str, x: f64) -> f64 {
    let p = |n: &str| fit.get(n).unwrap_or(f64::NAN);
    let shape = match model {
        "exponential" => return p("A") * (-x / p("T")).exp(),
        "gaussian" => {
            let u = (x - p("center")) / p("sigma");
            (-0.5 * u * u).exp()
        }
        "lorentzian" => {
            let u = (x - p("center")) / p("gamma");
            1.0 / (1.0 + u * u)
        }
        _ => {
            let v = |d: f64| voigt(VoigtArgs::new(d, p("sigma").abs(), p("gamma").abs())).unwrap_or(f64::NAN);
            v(x - p("center")) / v(0.0)
        }
    };
    p("offset") - p("depth") * shape
}
