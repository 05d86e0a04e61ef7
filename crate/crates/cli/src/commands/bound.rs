//! `bound`: coupling bound from beam-on and reference lifetime fits.

use std::path::Path;

use beamspin::estimation::{coupling_bound_pipeline, ratio_from_lifetimes, CiMethod, CouplingBound};
use beamspin::fit::format_with_uncertainty;

use super::Context;
use crate::output::{num, parse_f64, read_table, write_csv};
use crate::{CliError, Status};

/// Lifetime and standard error from a `fit` output file.
fn read_lifetime(path: &Path, which: &str) -> Result<(f64, f64), CliError> {
    let file = path.display().to_string();
    let table = read_table(path)?;
    match table.comment("converged") {
        Some("true") => {}
        Some(_) => return Err(CliError::Input(format!("{file}: {which} fit did not converge"))),
        None => return Err(CliError::Input(format!("{file}: not a fit output (no 'converged' entry)"))),
    }
    let c_name = table.require_column("parameter", &file)?;
    let c_val = table.require_column("value", &file)?;
    let c_se = table.require_column("std_error", &file)?;
    let (line, cells) = table
        .rows
        .iter()
        .find(|(_, c)| c[c_name] == "T")
        .ok_or_else(|| CliError::Input(format!("{file}: {which} fit has no lifetime parameter 'T'")))?;
    let t = parse_f64(&cells[c_val], &file, *line, "value")?;
    let se = parse_f64(&cells[c_se], &file, *line, "std_error")?;
    if t <= 0.0 {
        return Err(CliError::Input(format!("{file}:{line}: {which} lifetime must be positive")));
    }
    Ok((t, se))
}

pub fn run(ctx: &Context, beam: &Path, reference: &Path, method: &str) -> Result<Status, CliError> {
    let method = match method {
        "delta" => CiMethod::DeltaMethod,
        "bootstrap" => CiMethod::ParametricBootstrap { seed: ctx.seed },
        other => return Err(CliError::Input(format!("unknown method '{other}' (delta | bootstrap)"))),
    };
    let (tb, sb) = read_lifetime(beam, "beam")?;
    let (tr, sr) = read_lifetime(reference, "reference")?;
    let spin = ctx.config.spin.to_params()?;
    let rho0 = ctx.config.beam.rho0_um * 1e-6;
    let est = ratio_from_lifetimes(tb, sb, tr, sr, method)?;
    let bound = coupling_bound_pipeline(&est, &spin, rho0)?;

    let hash = ctx.hash("bound", &[beam, reference])?;
    let method_name = match method {
        CiMethod::DeltaMethod => "delta",
        CiMethod::ParametricBootstrap { .. } => "bootstrap",
    };
    let status = if bound.is_constraining() { "constraining" } else { "not constraining" };
    let header = ctx.header("bound", &hash).note("method", method_name).note("status", status);
    let mut rows = vec![
        vec!["ratio".to_string(), num(est.ratio), "1".into()],
        vec!["ratio_std_error".into(), num(est.std_error), "1".into()],
        vec!["ci_lower".into(), num(est.ci_lower), "1".into()],
        vec!["ci_upper".into(), num(est.ci_upper), "1".into()],
    ];
    let mut body = format!(
        "T_beam / T_ref = {}\n95% interval: [{}, {}] ({method_name})\n",
        format_with_uncertainty(est.ratio, est.std_error, ""),
        num(est.ci_lower),
        num(est.ci_upper)
    );
    match bound {
        CouplingBound::Constraining { omega_max, i_res_max } => {
            rows.push(vec!["omega_max".into(), num(omega_max), "rad/s".into()]);
            rows.push(vec!["i_res_max".into(), num(i_res_max), "A".into()]);
            body.push_str(&format!(
                "Omega_max = {} rad/s\nI_res_max = {} A at rho0 = {} um\n",
                num(omega_max),
                num(i_res_max),
                ctx.config.beam.rho0_um
            ));
        }
        CouplingBound::NotConstraining => body.push_str("not constraining: the interval reaches T_beam >= T_ref\n"),
    }
    write_csv(&ctx.path("bound.csv"), &header, &["quantity", "value", "unit"], &["", "", ""], &rows)?;
    ctx.report("bound.txt", &header, &body)?;
    Ok(if bound.is_constraining() { Status::Ok } else { Status::NotConstraining })
}
