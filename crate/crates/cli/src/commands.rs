//! The `plan`, `simulate` and `analyze` subcommands.

use anyhow::{Context, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use vibrogrid_core::analysis::{
    analyze, write_cell_csv, AnalysisError, AnalysisOptions, ResultsDocument,
};
use vibrogrid_core::encoding::EncodingParams;
use vibrogrid_core::experiment::{generate_plans, load_log, PlanConfig, SessionPlan, TrialRecord};
use vibrogrid_core::sim::{simulate_cohort, NoiseProfile};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn plan(participants: usize, seed: u64, pad: bool, out: &Path) -> Result<Vec<SessionPlan>> {
    let plans = generate_plans(PlanConfig {
        participants,
        seed,
        pad_incomplete: pad,
    })?;
    write_json(out, &plans)?;
    Ok(plans)
}

/// Simulates every plan and writes the trial log, replacing `out`.
pub fn simulate(
    plans: &Path,
    noise: &Path,
    params: Option<&Path>,
    out: &Path,
) -> Result<Vec<TrialRecord>> {
    let plans: Vec<SessionPlan> = read_json(plans)?;
    let profile: NoiseProfile = read_json(noise)?;
    profile.validate()?;
    let params: EncodingParams = match params {
        Some(p) => read_json(p)?,
        None => EncodingParams::default(),
    };
    params.validate()?;
    let trials = simulate_cohort(&plans, &params, &profile)?;
    let mut w =
        BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    for t in &trials {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(trials)
}

/// Exit status for a design the analysis refuses.
pub const EXIT_INCOMPLETE: i32 = 2;

#[derive(Debug)]
pub enum AnalyzeFailure {
    Incomplete(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for AnalyzeFailure {
    fn from(e: anyhow::Error) -> Self {
        AnalyzeFailure::Other(e)
    }
}

pub fn analyze_log(
    input: &Path,
    out: Option<&Path>,
    csv: Option<&Path>,
    allow_incomplete: bool,
) -> Result<ResultsDocument, AnalyzeFailure> {
    let loaded = load_log(input).with_context(|| format!("reading {}", input.display()))?;
    if loaded.torn_bytes > 0 {
        log::warn!("{}: ignored a torn final line", input.display());
    }
    let doc = match analyze(&loaded.records, AnalysisOptions { allow_incomplete }) {
        Ok(doc) => doc,
        Err(AnalysisError::IncompleteDesign(m)) => return Err(AnalyzeFailure::Incomplete(m)),
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    match out {
        Some(path) => write_json(path, &doc)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, &doc).map_err(anyhow::Error::from)?;
            writeln!(lock).map_err(anyhow::Error::from)?;
        }
    }
    if let Some(path) = csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_cell_csv(&doc.summary, BufWriter::new(file)).map_err(anyhow::Error::from)?;
    }
    Ok(doc)
}
