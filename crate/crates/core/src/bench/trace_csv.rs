//! Versioned CSV serialisation of [`Trace`].
//!
//! ```text
//! # proxflow-trace v1
//! # solver: vamp
//! # label: vamp-g0.6
//! # config_hash: 3f2a…
//! # preprocessing_seconds: 0.0123
//! # divergence: iteration 8: objective 8.2e11 blew up     (only if diverged)
//! iter,seconds,objective,kkt,sigma_x,sigma_z,rho
//! 0,0.0123,104.2,,0.5,0.5,1.0
//! ```
//!
//! Optional columns are left empty when a solver does not report them.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::{Trace, TraceRow};

pub const SCHEMA_VERSION: u32 = 1;
pub const KNOWN_VERSIONS: &[u32] = &[1];
pub const COLUMNS: [&str; 7] = ["iter", "seconds", "objective", "kkt", "sigma_x", "sigma_z", "rho"];

const MAGIC_PREFIX: &str = "# proxflow-trace v";

fn csv_err(e: csv::Error) -> Error {
    Error::Input(format!("trace csv: {e}"))
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn write_trace(mut w: impl Write, trace: &Trace) -> Result<()> {
    writeln!(w, "{MAGIC_PREFIX}{SCHEMA_VERSION}")?;
    writeln!(w, "# solver: {}", one_line(&trace.solver))?;
    writeln!(w, "# label: {}", one_line(&trace.label))?;
    writeln!(w, "# config_hash: {}", one_line(&trace.config_hash))?;
    writeln!(w, "# preprocessing_seconds: {}", trace.preprocessing_seconds)?;
    if let Some(d) = &trace.divergence {
        writeln!(w, "# divergence: {}", one_line(d))?;
    }
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(COLUMNS).map_err(csv_err)?;
    for row in &trace.rows {
        out.serialize(row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_file(path: impl AsRef<Path>, trace: &Trace) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_trace(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

/// Parse a trace written by any known schema version. The solution vector
/// is not stored and comes back empty.
pub fn read_trace(r: impl Read) -> Result<Trace> {
    let mut lines = BufReader::new(r).lines();
    let first = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Input("trace csv is empty".into()))?;
    let version: u32 = first
        .strip_prefix(MAGIC_PREFIX)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Input(format!("not a proxflow trace: {first:?}")))?;
    if !KNOWN_VERSIONS.contains(&version) {
        return Err(Error::Input(format!("unsupported trace schema version {version}")));
    }

    let mut trace = Trace::new("", 0.0);
    let mut label = None;
    let mut body = String::new();
    for line in lines {
        let line = line?;
        if let Some(meta) = line.strip_prefix("# ") {
            let (key, value) = meta
                .split_once(": ")
                .map_or((meta.trim_end_matches(':'), ""), |(k, v)| (k, v));
            match key {
                "solver" => trace.solver = value.to_string(),
                "label" => label = Some(value.to_string()),
                "config_hash" => trace.config_hash = value.to_string(),
                "preprocessing_seconds" => {
                    trace.preprocessing_seconds = value.parse().map_err(|_| {
                        Error::Input(format!("bad preprocessing_seconds {value:?}"))
                    })?
                }
                "divergence" => trace.divergence = Some(value.to_string()),
                _ => {}
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    trace.label = label.unwrap_or_else(|| trace.solver.clone());

    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(Error::Input(format!(
            "trace columns {header:?} do not match schema v{version} {COLUMNS:?}"
        )));
    }
    for row in rdr.deserialize::<TraceRow>() {
        trace.rows.push(row.map_err(csv_err)?);
    }
    if !trace.is_well_ordered() {
        return Err(Error::Input(
            "trace rows must have increasing iterations and non-decreasing time".into(),
        ));
    }
    Ok(trace)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<Trace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    read_trace(file).map_err(|e| match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}
