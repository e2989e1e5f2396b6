//! Per-iteration CSV traces.
//!
//! A trace file starts with `# key=value` metadata lines followed by a CSV
//! table with a header row and one row per recorded iteration (row 0 holds the
//! initial metrics). Optional cells are left empty.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub data_passes: f64,
    /// Gradient norm at the last iterate.
    pub grad_norm: f64,
    pub grad_norm_x: f64,
    pub grad_norm_y: f64,
    /// Gradient norm at the time-average iterate.
    pub grad_norm_avg: f64,
    /// Squared distance of the last iterate to the reference saddle.
    pub dist_gap: Option<f64>,
    pub dist_gap_avg: Option<f64>,
    pub eta_t: f64,
    /// Largest distance of an iterate from its starting point so far, taken
    /// over both blocks.
    pub empirical_diameter: f64,
    pub elapsed_ms: Option<f64>,
}

pub const COLUMNS: [&str; 11] = [
    "iter",
    "data_passes",
    "grad_norm",
    "grad_norm_x",
    "grad_norm_y",
    "grad_norm_avg",
    "dist_gap",
    "dist_gap_avg",
    "eta_t",
    "empirical_diameter",
    "elapsed_ms",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    /// Ordered `(key, value)` metadata.
    pub meta: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.meta {
            if k.contains('=') || k.contains('\n') || v.contains('\n') {
                return Err(Error::invalid(format!("metadata entry {k:?} cannot be written")));
            }
            writeln!(w, "# {k}={v}")?;
        }
        let mut out =
            csv::WriterBuilder::new().has_headers(true).terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        if self.rows.is_empty() {
            out.write_record(COLUMNS)?;
        }
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(r).read_to_string(&mut text)?;
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim_start();
            if let Some((k, v)) = body.split_once('=') {
                meta.push((k.to_string(), v.to_string()));
            }
        }
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows = rd.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
        Ok(Trace { meta, rows })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read(file)
    }

    /// Structural invariants: iterations strictly increase, data passes never
    /// decrease and all metric cells are finite.
    pub fn check(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            if w[1].iter <= w[0].iter {
                return Err(Error::invalid(format!("iteration {} follows {}", w[1].iter, w[0].iter)));
            }
            if w[1].data_passes < w[0].data_passes {
                return Err(Error::invalid(format!("data passes decrease at iteration {}", w[1].iter)));
            }
        }
        for r in &self.rows {
            let cells = [r.data_passes, r.grad_norm, r.grad_norm_x, r.grad_norm_y, r.grad_norm_avg, r.eta_t];
            let optional = [r.dist_gap, r.dist_gap_avg, r.elapsed_ms];
            if !cells.iter().all(|v| v.is_finite()) || !optional.iter().flatten().all(|v| v.is_finite()) {
                return Err(Error::numeric(format!("non-finite metric at iteration {}", r.iter)));
            }
        }
        Ok(())
    }
}

/// Metadata lines only, without parsing the table.
pub fn read_meta(path: &Path) -> Result<Vec<(String, String)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut meta = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        if let Some((k, v)) = line.trim_start_matches('#').trim_start().split_once('=') {
            meta.push((k.to_string(), v.to_string()));
        }
    }
    Ok(meta)
}
