//! CSV emission and parsing. Every file starts with a `#` header block,
//! followed by a names row and a units row.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of each data file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Extra `key: value` lines.
    pub notes: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &'static str, config_hash: &str, seed: Option<u64>) -> Self {
        Self { command, config_hash: config_hash.to_string(), seed, notes: Vec::new() }
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut s = format!("# beamspin {VERSION}\n# command: {}\n# config_hash: {}\n", self.command, self.config_hash);
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        for (k, v) in &self.notes {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }
}

/// Shortest round-trip rendering of a float.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv(
    path: &Path,
    header: &Header,
    names: &[&str],
    units: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(names).map_err(io_err)?;
    w.write_record(units).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = header.render().into_bytes();
    out.extend(body);
    write_file(path, &out)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// A parsed data file: `# key: value` comments, column names, and rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub names: Vec<String>,
    /// Units row, when present.
    pub units: Option<Vec<String>>,
    /// (1-based file line, cells)
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn unit(&self, col: usize) -> &str {
        self.units.as_ref().and_then(|u| u.get(col)).map(|s| s.as_str()).unwrap_or("")
    }

    pub fn require_column(&self, name: &str, file: &str) -> Result<usize, CliError> {
        self.column(name).ok_or_else(|| CliError::Input(format!("{file}: missing column '{name}'")))
    }
}

/// Reads a CSV with an optional `#` header block. A units row directly under
/// the names row is recognized by a non-numeric cell and kept apart.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
    let mut comments = Vec::new();
    let mut data_lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once(':') {
                comments.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else if !line.trim().is_empty() {
            data_lines.push((i + 1, line));
        }
    }
    let mut it = data_lines.into_iter();
    let (_, head) = it.next().ok_or_else(|| CliError::Input(format!("{file}: no column names")))?;
    let split = |line: &str| -> Result<Vec<String>, CliError> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = r
            .records()
            .next()
            .transpose()
            .map_err(|e| CliError::Input(format!("{file}: {e}")))?
            .unwrap_or_default();
        Ok(rec.iter().map(|s| s.trim().to_string()).collect())
    };
    let names = split(head)?;
    let mut rows = Vec::new();
    let mut units = None;
    let mut first = true;
    for (line_no, line) in it {
        let cells = split(line)?;
        if first {
            first = false;
            let textual = cells.iter().any(|c| !c.is_empty() && c.parse::<f64>().is_err());
            if textual || cells.iter().all(|c| c.is_empty()) {
                units = Some(cells);
                continue;
            }
        }
        if cells.len() != names.len() {
            return Err(CliError::Input(format!(
                "{file}:{line_no}: expected {} fields, found {}",
                names.len(),
                cells.len()
            )));
        }
        rows.push((line_no, cells));
    }
    Ok(Table { comments, names, units, rows })
}

pub fn parse_f64(cell: &str, file: &str, line: usize, col: &str) -> Result<f64, CliError> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Input(format!("{file}:{line}: column '{col}' is not a finite number: '{cell}'")))
}
