//! Subcommand implementations and the context they share.

mod bound;
mod decompose;
mod fit;
mod simulate;
mod sweep;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use beamspin::sweeps::{config_hash, Engine};

use crate::config::{self, RunConfig};
use crate::output::{self, Header};
use crate::{Cli, CliError, Command, Status};

/// Parsed global flags and configuration.
pub struct Context {
    pub config: RunConfig,
    config_text: String,
    pub seed: u64,
    pub out: PathBuf,
    pub engine: Option<Engine>,
    pub svg: bool,
    pub timestamp: Option<String>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let (config, config_text) = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let cfg = config::parse(&text).map_err(|e| match e {
                    CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
                    other => other,
                })?;
                (cfg, text)
            }
            None => (RunConfig::default(), String::new()),
        };
        let seed = cli.seed.or(config.seed).unwrap_or(0);
        let timestamp = (!cli.no_timestamp).then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            format!("unix-time {secs}")
        });
        Ok(Self {
            config,
            config_text,
            seed,
            out: cli.out.clone(),
            engine: cli.engine.map(Engine::from),
            svg: cli.svg,
            timestamp,
        })
    }

    /// Hash over the command, config text, seed, engine and input file contents.
    pub fn hash(&self, command: &str, inputs: &[&Path]) -> Result<String, CliError> {
        let mut canonical = format!(
            "command={command}\nseed={}\nengine={}\nconfig:\n{}\n",
            self.seed,
            self.engine.map(|e| e.to_string()).unwrap_or_else(|| "default".into()),
            self.config_text
        );
        for p in inputs {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            canonical.push_str(&format!("input:\n{text}\n"));
        }
        Ok(config_hash(&canonical))
    }

    pub fn header(&self, command: &'static str, hash: &str) -> Header {
        Header::new(command, hash, Some(self.seed))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        output::out_path(&self.out, name)
    }

    pub fn write_svg(&self, name: &str, doc: &str) -> Result<(), CliError> {
        output::write_file(&self.path(name), doc.as_bytes())
    }

    /// Writes a plain-text report and echoes it to stdout.
    pub fn report(&self, name: &str, header: &Header, body: &str) -> Result<(), CliError> {
        print!("{body}");
        let mut text = header.render();
        text.push_str(body);
        output::write_file(&self.path(name), text.as_bytes())
    }
}

pub fn run(cli: &Cli) -> Result<Status, CliError> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Simulate => simulate::run(&ctx),
        Command::Fit { input, model, weighting } => fit::run(&ctx, input, model, weighting),
        Command::Decompose { spectra, ref_minus, ref_zero, currents_ua } => {
            decompose::run(&ctx, spectra, ref_minus.as_deref(), ref_zero.as_deref(), currents_ua)
        }
        Command::Bound { beam, reference, method } => bound::run(&ctx, beam, reference, method),
        Command::Sweep => sweep::run(&ctx),
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Input(format!("grid needs at least 2 points, got {n}")));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(CliError::Input("grid bounds must be finite".into()));
    }
    let step = (stop - start) / (n - 1) as f64;
    Ok((0..n).map(|k| if k + 1 == n { stop } else { start + step * k as f64 }).collect())
}
