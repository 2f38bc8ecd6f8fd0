use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::{Common, Format};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable input or a violated precondition (exit 2).
    Usage(String),
    /// A requested check did not hold (exit 1).
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) => f.write_str(m),
        }
    }
}

impl From<pml_core::Error> for CliError {
    fn from(e: pml_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Named tolerances with their defaults.
const DEFAULTS: &[(&str, f64)] = &[
    ("circle", 1e-9),
    ("chain_theta", 1e-6),
    ("geodesic_theta", 1e-9),
    ("frame", 1e-8),
    ("path", 1e-6),
    ("torsion", 1e-10),
    ("bracket", 1e-5),
    ("rank", 1e-6),
    ("restriction", 1e-6),
    ("transversality", 1e-1),
];

pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Tolerances {
    pub fn parse(items: &[String]) -> CliResult<Self> {
        let mut map: BTreeMap<&'static str, f64> = DEFAULTS.iter().copied().collect();
        for item in items {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got `{item}`")))?;
            let key = DEFAULTS.iter().map(|(k, _)| *k).find(|k| *k == name.trim()).ok_or_else(|| {
                let known: Vec<&str> = DEFAULTS.iter().map(|(k, _)| *k).collect();
                CliError::Usage(format!("unknown tolerance `{name}` (known: {})", known.join(", ")))
            })?;
            let v: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v > 0.0)
                .ok_or_else(|| CliError::Usage(format!("tolerance `{name}` needs a positive number, got `{value}`")))?;
            map.insert(key, v);
        }
        Ok(Self(map))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the report in the requested format to `--out` or stdout.
pub fn emit<T: Serialize>(common: &Common, report: &T, csv: Option<String>) -> CliResult {
    let text = match common.format {
        Format::Json => to_json(report)?,
        Format::Csv => csv.ok_or_else(|| CliError::Usage("this command has no CSV output; use --format json".into()))?,
    };
    write_text(common.out.as_deref(), &text)
}

pub fn write_text(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // a closed downstream pipe (`| head`) is not an error
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

pub fn summary(common: &Common, text: &str) {
    if !common.quiet {
        eprintln!("{text}");
    }
}

/// In `--assert` mode, turns failed checks into exit code 1.
pub fn assert_checks(common: &Common, failures: &[String]) -> CliResult {
    if common.assert && !failures.is_empty() {
        return Err(CliError::Check(failures.join("; ")));
    }
    Ok(())
}

/// CSV from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

pub fn sp(n: usize) -> CliResult<pml_core::AlgebraDescriptor> {
    Ok(pml_core::AlgebraDescriptor::sp(n)?)
}
