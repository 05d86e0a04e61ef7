//! `sweep`: contrast maps over `(gamma2*, gamma2)` and `T1_beam / T1`
//! reduction curves over beam current.

use beamspin::closed_form::integrated_contrast;
use beamspin::coupling::rabi_frequency;
use beamspin::params::{hz_to_angular, BeamParams, SpinParams};
use beamspin::sweeps::{
    contrast_map, dynamics_t1_ratio, find_current_for_ratio, reduction_curves, roadmap, AxisScale, Axis,
    CurveConfig, DynamicsProtocol, Engine, GridSpec,
};

use super::Context;
use crate::config::{parse_scale, require, SweepSection};
use crate::output::{num, write_csv, write_file};
use crate::svg::{self, Labels, Series};
use crate::{CliError, Status};

pub fn run(ctx: &Context) -> Result<Status, CliError> {
    let sw = ctx
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Input("sweep needs a [sweep] config section".into()))?;
    let spin = ctx.config.spin.to_params()?;
    let beam = ctx.config.beam.to_params(&spin)?;
    let hash = ctx.hash("sweep", &[])?;
    match sw.kind.as_str() {
        "contrast-map" => map(ctx, sw, &spin, &beam, &hash),
        "reduction-curves" => curves(ctx, sw, &spin, &beam, &hash),
        other => Err(CliError::Input(format!("unknown sweep kind '{other}' (contrast-map | reduction-curves)"))),
    }
}

fn meta(ctx: &Context, hash: &str, engine: Engine, lines: &[String]) -> Result<(), CliError> {
    let mut text = format!(
        "# beamspin {}\n# command: sweep\n# config_hash: {hash}\n# seed: {}\nengine: {engine}\n",
        crate::output::VERSION,
        ctx.seed
    );
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    write_file(&ctx.path("sweep.meta.txt"), text.as_bytes())
}

fn map(
    ctx: &Context,
    sw: &SweepSection,
    spin: &SpinParams<f64>,
    beam: &BeamParams<f64>,
    hash: &str,
) -> Result<Status, CliError> {
    let engine = ctx.engine.unwrap_or(Engine::ClosedForm);
    let scale = parse_scale(sw.scale.as_deref(), AxisScale::Log)?;
    let grid = GridSpec {
        x: Axis::new(
            "gamma2_star",
            hz_to_angular(require(sw.gamma2star_min_MHz, "sweep.gamma2star_min_MHz")? * 1e6),
            hz_to_angular(require(sw.gamma2star_max_MHz, "sweep.gamma2star_max_MHz")? * 1e6),
            require(sw.gamma2star_points, "sweep.gamma2star_points")?,
            scale,
        ),
        y: Axis::new(
            "gamma2",
            require(sw.gamma2_min_per_s, "sweep.gamma2_min_per_s")?,
            require(sw.gamma2_max_per_s, "sweep.gamma2_max_per_s")?,
            require(sw.gamma2_points, "sweep.gamma2_points")?,
            scale,
        ),
    };
    let protocol = DynamicsProtocol {
        ensemble: ctx.config.ensemble(ctx.seed, DynamicsProtocol::default().ensemble)?,
        ..DynamicsProtocol::default()
    };
    let result = contrast_map(&grid, spin, beam, engine, &protocol)?;

    let header = ctx.header("sweep", hash).note("kind", "contrast-map").note("engine", engine);
    let rows: Vec<Vec<String>> = result
        .y
        .iter()
        .enumerate()
        .flat_map(|(iy, &y)| {
            let r = &result;
            r.x.iter().enumerate().map(move |(ix, &x)| vec![num(x), num(y), num(r.at(ix, iy))])
        })
        .collect();
    write_csv(
        &ctx.path("sweep.csv"),
        &header,
        &["gamma2_star", "gamma2", "contrast"],
        &["rad/s", "1/s", "1"],
        &rows,
    )?;

    let omega = rabi_frequency(beam)?;
    let mut lines = vec![format!("grid_hash: {}", result.metadata.config_hash)];
    for star in roadmap::stars::<f64>() {
        let node = SpinParams { gamma2_star: star.gamma2_star, gamma2: star.gamma2, ..*spin };
        let v = match engine {
            Engine::ClosedForm => integrated_contrast(&node, beam),
            Engine::Dynamics => dynamics_t1_ratio(&node, omega, 0.0, &protocol).map(|r| 1.0 - r),
        };
        lines.push(format!(
            "star {}: gamma2_star={} rad/s gamma2={} 1/s contrast={}",
            star.label,
            num(star.gamma2_star),
            num(star.gamma2),
            v.map(num).unwrap_or_else(|e| format!("failed ({e})"))
        ));
    }
    lines.extend(result.metadata.log.iter().map(|l| format!("node failure: {l}")));
    meta(ctx, hash, engine, &lines)?;
    for l in &lines {
        println!("{l}");
    }

    if ctx.svg {
        let labels = Labels { title: "integrated contrast", x: "gamma2* (rad/s)", y: "gamma2 (1/s)" };
        let doc = svg::heatmap(
            &labels,
            &result.x,
            &result.y,
            &result.values,
            scale == AxisScale::Log,
            ctx.timestamp.as_deref(),
        );
        ctx.write_svg("sweep.svg", &doc)?;
    }
    Ok(Status::Ok)
}

fn curves(
    ctx: &Context,
    sw: &SweepSection,
    spin: &SpinParams<f64>,
    beam: &BeamParams<f64>,
    hash: &str,
) -> Result<Status, CliError> {
    if ctx.engine == Some(Engine::Dynamics) {
        return Err(CliError::Input("reduction curves are closed-form only".into()));
    }
    let scale = parse_scale(sw.current_scale.as_deref(), AxisScale::Log)?;
    let currents: Vec<f64> = Axis::new(
        "current",
        require(sw.current_min_uA, "sweep.current_min_uA")? * 1e-6,
        require(sw.current_max_uA, "sweep.current_max_uA")? * 1e-6,
        require(sw.current_points, "sweep.current_points")?,
        scale,
    )
    .values()?;
    let configs: Vec<CurveConfig<f64>> = if sw.curve.is_empty() {
        roadmap::curves()
    } else {
        sw.curve
            .iter()
            .map(|c| CurveConfig {
                label: c.label.clone(),
                rho0: c.rho0_um * 1e-6,
                gamma2_star: hz_to_angular(c.gamma2star_MHz * 1e6),
            })
            .collect()
    };
    let result = reduction_curves(&currents, &configs, spin, beam)?;

    let header = ctx.header("sweep", hash).note("kind", "reduction-curves").note("engine", Engine::ClosedForm);
    let rows: Vec<Vec<String>> = result
        .iter()
        .flat_map(|c| {
            c.currents.iter().zip(&c.ratios).map(move |(i, r)| vec![c.config.label.clone(), num(*i), num(*r)])
        })
        .collect();
    write_csv(&ctx.path("sweep.csv"), &header, &["curve", "current", "ratio"], &["", "A", "1"], &rows)?;

    let mut lines = Vec::new();
    if let Some(target) = sw.target_ratio {
        for c in &configs {
            let node = SpinParams { gamma2_star: c.gamma2_star, ..*spin };
            let b = BeamParams { rho0: c.rho0, ..*beam };
            let found = find_current_for_ratio(target, &node, &b);
            lines.push(format!(
                "target ratio {target} on {}: {}",
                c.label,
                found.map(|i| format!("{} A", num(i))).unwrap_or_else(|e| format!("unreachable ({e})"))
            ));
        }
    }
    meta(ctx, hash, Engine::ClosedForm, &lines)?;
    for l in &lines {
        println!("{l}");
    }

    if ctx.svg {
        let series: Vec<Series> = result
            .iter()
            .map(|c| Series {
                label: c.config.label.clone(),
                points: c.currents.iter().zip(&c.ratios).map(|(i, r)| (*i, *r)).collect(),
            })
            .collect();
        let labels = Labels { title: "T1 reduction", x: "current (A)", y: "T1_beam / T1" };
        let doc = svg::line_plot(&labels, &series, scale == AxisScale::Log, ctx.timestamp.as_deref());
        ctx.write_svg("sweep.svg", &doc)?;
    }
    Ok(Status::Ok)
}
