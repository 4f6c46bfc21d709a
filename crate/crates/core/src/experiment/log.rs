//! Append-only JSON-lines trial log and CSV export.
//!
//! Each record is one line, fsynced on append. A final line without its
//! newline is a torn write from a crash: it is dropped on load with a
//! warning and truncated away before the next append. Any complete line that
//! fails to parse is an integrity error.

use super::{ExperimentError, TrialRecord};
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

pub const CSV_COLUMNS: [&str; 16] = [
    "participant_id",
    "block_index",
    "trial_index",
    "density",
    "scheme",
    "target_ix",
    "target_iy",
    "stimulus_repeats",
    "interpretation_ix",
    "interpretation_iy",
    "selection_x_cm",
    "selection_y_cm",
    "selected_ix",
    "selected_iy",
    "elapsed_ms",
    "outcome",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLog {
    pub records: Vec<TrialRecord>,
    /// Bytes of a torn final line that were ignored.
    pub torn_bytes: usize,
}

pub fn load_log(path: impl AsRef<Path>) -> Result<LoadedLog, ExperimentError> {
    let mut text = String::new();
    match File::open(path.as_ref()) {
        Ok(mut f) => {
            f.read_to_string(&mut text)?;
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Ok(LoadedLog {
                records: Vec::new(),
                torn_bytes: 0,
            });
        }
        Err(e) => return Err(e.into()),
    }
    parse_log(&text)
}

/// Parses JSON-lines text; see the module docs for torn-tail handling.
pub fn parse_log(text: &str) -> Result<LoadedLog, ExperimentError> {
    let complete_len = text.rfind('\n').map_or(0, |i| i + 1);
    let torn_bytes = text.len() - complete_len;
    if torn_bytes > 0 {
        log::warn!("ignoring torn final trial-log line ({torn_bytes} bytes)");
    }
    let records = text[..complete_len]
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| ExperimentError::Integrity(format!("line {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoadedLog {
        records,
        torn_bytes,
    })
}

pub struct TrialLog {
    path: PathBuf,
    file: File,
    lines: u64,
}

impl TrialLog {
    /// Opens (or creates) a log, dropping any torn tail, and returns the
    /// records already present.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, LoadedLog), ExperimentError> {
        let path = path.as_ref().to_path_buf();
        let loaded = load_log(&path)?;
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .write(true)
            .truncate(false)
            .open(&path)?;
        if loaded.torn_bytes > 0 {
            let len = file.metadata()?.len();
            file.set_len(len - loaded.torn_bytes as u64)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        let lines = loaded.records.len() as u64;
        Ok((Self { path, file, lines }, loaded))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one record and returns its 0-based line position.
    pub fn append(&mut self, record: &TrialRecord) -> Result<u64, ExperimentError> {
        let mut line = serde_json::to_string(record)
            .map_err(|e| ExperimentError::Persistence(io::Error::other(e)))?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        let pos = self.lines;
        self.lines += 1;
        Ok(pos)
    }
}

/// Writes one row per record under [`CSV_COLUMNS`]. Absent interpretations
/// are empty cells.
pub fn export_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), ExperimentError> {
    let to_io = |e: csv::Error| ExperimentError::Persistence(io::Error::other(e));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(to_io)?;
    for r in records {
        let (iix, iiy) = r
            .interpretation
            .map_or((String::new(), String::new()), |t| {
                (t.ix.to_string(), t.iy.to_string())
            });
        w.write_record([
            r.participant_id.clone(),
            r.block_index.to_string(),
            r.trial_index.to_string(),
            r.condition.density.to_string(),
            r.condition.scheme.to_string(),
            r.target.ix.to_string(),
            r.target.iy.to_string(),
            r.stimulus_repeats.to_string(),
            iix,
            iiy,
            r.selection_point.x_cm.to_string(),
            r.selection_point.y_cm.to_string(),
            r.selected_target.ix.to_string(),
            r.selected_target.iy.to_string(),
            r.elapsed_ms.to_string(),
            r.outcome.as_str().to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}
