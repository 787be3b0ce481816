//! Output sinks: standard output or an atomically replaced file.

use anyhow::{Context, Result};
use maxbv::rat::Rat;
use std::io::Write;
use std::path::Path;

/// Writes `bytes` to `path`, or to stdout when `path` is `None` or `-`.
/// Files are written to a temporary sibling and renamed into place.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => write_stdout(bytes),
        Some(p) if p.as_os_str() == "-" => write_stdout(bytes),
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).with_context(|| format!("cannot write {}", p.display()))?;
            Ok(())
        }
    }
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

pub fn json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

/// A CSV table built in memory; every row ends with a provenance column.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    provenance: String,
}

impl Table {
    pub fn new(columns: &[&str], provenance: &str) -> Result<Table> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns.iter().copied().chain(["provenance"]))?;
        Ok(Table { writer, provenance: provenance.to_string() })
    }

    pub fn row(&mut self, cells: Vec<String>) -> Result<()> {
        self.writer.write_record(cells.iter().map(String::as_str).chain([self.provenance.as_str()]))?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u8>> {
        self.writer.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

pub fn exact(x: &Rat) -> String {
    x.to_string()
}

pub fn dec(x: f64) -> String {
    format!("{x}")
}

/// Exact column for a binary64 quantity: its dyadic value.
pub fn exact_f64(x: f64) -> String {
    Rat::from_f64(x).map(|r| r.to_string()).unwrap_or_else(|| "nan".into())
}
