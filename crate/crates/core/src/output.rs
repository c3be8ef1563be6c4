//! CSV and JSON emitters for sweep results.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`. Unavailable values are empty in CSV and `null`
//! in JSON. CSV files carry their metadata in a `<file>.meta.json` sidecar.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::{OutputFormat, SweepConfig};
use crate::estimation::P_FLOOR;
use crate::sweep::{GradientFamily, SweepRecord, SweepResult, SweepTolerances};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("nothing to write")]
    Empty,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn format_number(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn cell(x: Option<f64>) -> String {
    x.and_then(format_number).unwrap_or_default()
}

/// Column names for a configuration.
pub fn columns(config: &SweepConfig) -> Vec<String> {
    let mut cols = vec!["b0".to_string(), "qfi".to_string()];
    cols.extend(config.grain_sizes.iter().map(|g| format!("fi_g{g}")));
    cols.extend(config.grain_sizes.iter().map(|g| format!("r_g{g}")));
    cols.extend((0..config.k_eigenvalues).map(|i| format!("e{i}")));
    cols.extend(["gap", "delta_used", "status"].map(String::from));
    cols
}

fn numeric_cells(record: &SweepRecord, k: usize) -> Vec<Option<f64>> {
    let mut v = vec![Some(record.b0), record.qfi];
    v.extend(&record.fi);
    v.extend(&record.ratio);
    v.extend((0..k).map(|i| record.eigenvalues.get(i).copied()));
    v.push(record.gap);
    v.push(record.delta_used);
    v
}

/// Solver and estimation tolerances, as recorded in metadata.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ToleranceMetadata {
    pub residual_tol: f64,
    pub degeneracy_rel: f64,
    pub qfi_rel_tol: f64,
    pub delta_floor: f64,
    pub p_floor: f64,
    pub shift_invert_block: usize,
    pub shift_invert_margin: f64,
}

impl From<&SweepTolerances> for ToleranceMetadata {
    fn from(t: &SweepTolerances) -> Self {
        Self {
            residual_tol: t.solver.residual_tol,
            degeneracy_rel: t.solver.degeneracy_rel,
            qfi_rel_tol: t.convergence.rel_tol,
            delta_floor: t.convergence.delta_floor,
            p_floor: P_FLOOR,
            shift_invert_block: t.shift_invert.block,
            shift_invert_margin: t.shift_invert.initial_margin,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Metadata {
    pub program: &'static str,
    pub version: &'static str,
    /// False until every record has been written.
    pub complete: bool,
    pub config: SweepConfig,
    pub effective_b0_min: f64,
    pub tolerances: ToleranceMetadata,
    pub points: usize,
    pub points_ok: usize,
}

impl Metadata {
    pub fn new(result: &SweepResult, complete: bool) -> Self {
        Self {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            complete,
            config: result.config.clone(),
            effective_b0_min: result.effective_b0_min,
            tolerances: (&result.tolerances).into(),
            points: result.records.len(),
            points_ok: result.records.iter().filter(|r| r.status == crate::sweep::PointStatus::Ok).count(),
        }
    }

    /// Placeholder written before a sweep starts.
    pub fn pending(config: &SweepConfig, tolerances: &SweepTolerances) -> Self {
        Self {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            complete: false,
            config: config.clone(),
            effective_b0_min: config.effective_b0_min().unwrap_or(config.b0_min),
            tolerances: tolerances.into(),
            points: 0,
            points_ok: 0,
        }
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut w: W) -> io::Result<()> {
    let k = result.config.k_eigenvalues;
    writeln!(w, "{}", columns(&result.config).join(","))?;
    for r in &result.records {
        let mut cells: Vec<String> = numeric_cells(r, k).into_iter().map(cell).collect();
        cells.push(r.status.as_str().to_string());
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

struct JsonRecord<'a> {
    columns: &'a [String],
    cells: Vec<Option<Box<RawValue>>>,
    status: &'static str,
}

impl Serialize for JsonRecord<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (name, value) in self.columns.iter().zip(&self.cells) {
            map.serialize_entry(name, value)?;
        }
        map.serialize_entry("status", self.status)?;
        map.end()
    }
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    metadata: &'a Metadata,
    columns: &'a [String],
    records: Vec<JsonRecord<'a>>,
}

pub fn write_json<W: Write>(result: &SweepResult, metadata: &Metadata, mut w: W) -> Result<(), OutputError> {
    let cols = columns(&result.config);
    let k = result.config.k_eigenvalues;
    let records = result
        .records
        .iter()
        .map(|r| {
            let cells = numeric_cells(r, k)
                .into_iter()
                .map(|x| x.and_then(format_number).map(RawValue::from_string).transpose())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(JsonRecord { columns: &cols[..cols.len() - 1], cells, status: r.status.as_str() })
        })
        .collect::<Result<Vec<_>, serde_json::Error>>()?;
    serde_json::to_writer_pretty(&mut w, &JsonDocument { metadata, columns: &cols, records })?;
    writeln!(w).map_err(|source| OutputError::Io { path: PathBuf::new(), source })?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn write_metadata_file(path: &Path, metadata: &Metadata) -> Result<(), OutputError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, metadata)?;
    writeln!(w).map_err(io_at(path))?;
    w.flush().map_err(io_at(path))
}

/// Marks `path` as an incomplete run of `config`, before any point is computed.
pub fn mark_incomplete(
    path: &Path,
    format: OutputFormat,
    config: &SweepConfig,
    tolerances: &SweepTolerances,
) -> Result<(), OutputError> {
    let meta = Metadata::pending(config, tolerances);
    match format {
        OutputFormat::Csv => write_metadata_file(&sidecar_path(path), &meta),
        OutputFormat::Json => {
            let cols = columns(config);
            let mut w = create(path)?;
            serde_json::to_writer_pretty(
                &mut w,
                &JsonDocument { metadata: &meta, columns: &cols, records: Vec::new() },
            )?;
            writeln!(w).map_err(io_at(path))?;
            w.flush().map_err(io_at(path))
        }
    }
}

/// Writes `result` to `path` (plus the sidecar for CSV), marked complete.
pub fn write_result(path: &Path, format: OutputFormat, result: &SweepResult) -> Result<(), OutputError> {
    if result.records.is_empty() {
        return Err(OutputError::Empty);
    }
    let meta = Metadata::new(result, true);
    let mut w = create(path)?;
    match format {
        OutputFormat::Csv => {
            write_csv(result, &mut w).map_err(io_at(path))?;
            w.flush().map_err(io_at(path))?;
            write_metadata_file(&sidecar_path(path), &meta)
        }
        OutputFormat::Json => {
            write_json(result, &meta, &mut w)?;
            w.flush().map_err(io_at(path))
        }
    }
}

/// `<stem>_mx<m_x>.<ext>` next to `base`.
pub fn member_path(base: &Path, m_x: f64, format: OutputFormat) -> PathBuf {
    sibling(base, &format!("_mx{m_x}"), format.extension())
}

pub fn summary_path(base: &Path) -> PathBuf {
    sibling(base, "_summary", "csv")
}

fn sibling(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// `b0, best_mx, best_qfi, qfi_mx<m>...` per grid point.
pub fn write_summary<W: Write>(family: &GradientFamily, mut w: W) -> io::Result<()> {
    let mut header = vec!["b0".to_string(), "best_mx".to_string(), "best_qfi".to_string()];
    header.extend(family.members.iter().map(|m| format!("qfi_mx{}", m.config.m_x)));
    writeln!(w, "{}", header.join(","))?;
    for row in &family.summary {
        let mut cells = vec![cell(Some(row.b0)), cell(row.best_m_x), cell(row.best_qfi)];
        cells.extend(row.qfi_by_gradient.iter().map(|&(_, q)| cell(q)));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_family(base: &Path, format: OutputFormat, family: &GradientFamily) -> Result<Vec<PathBuf>, OutputError> {
    let mut written = Vec::new();
    for member in &family.members {
        let path = member_path(base, member.config.m_x, format);
        write_result(&path, format, member)?;
        written.push(path);
    }
    let path = summary_path(base);
    let mut w = create(&path)?;
    write_summary(family, &mut w).map_err(io_at(&path))?;
    w.flush().map_err(io_at(&path))?;
    written.push(path);
    Ok(written)
}
