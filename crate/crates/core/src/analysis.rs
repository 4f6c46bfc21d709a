//! Summary tables and the hypothesis-test pipeline over trial records.
//!
//! Every measure is reduced to one value per participant and condition
//! before anything is compared across participants. Completion time is the
//! mean `elapsed_ms` of all trials in seconds. Accuracy is the share of
//! trials classified correct.

use crate::encoding::EncodingScheme;
use crate::experiment::{Condition, Outcome, TrialRecord, DENSITIES};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use thiserror::Error;
use vibrogrid_stats::dist::t_quantile;
use vibrogrid_stats::{
    correct_family, friedman, mean, paired_t, rm_anova_2way, sample_sd, wilcoxon_signed_rank,
    CellTable, Correction, Df, StatResult, StatsError,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no trials to analyse")]
    Empty,
    #[error("incomplete design: {0}")]
    IncompleteDesign(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("export failed: {0}")]
    Export(String),
}

/// Mean and 95% confidence half-width of one measure across participants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Absent when fewer than two participants contribute.
    pub ci95_halfwidth: Option<f64>,
}

impl Estimate {
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        let ci95_halfwidth = (n >= 2).then(|| {
            let sd = sample_sd(values);
            t_quantile(0.975, (n - 1) as f64) * sd / (n as f64).sqrt()
        });
        Self {
            mean: mean(values),
            ci95_halfwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub condition: Condition,
    pub participants: usize,
    pub trials: usize,
    pub mean_time_s: Estimate,
    pub accuracy: Estimate,
}

/// One level of a single factor, averaged over the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub level: String,
    pub participants: usize,
    pub mean_time_s: Estimate,
    pub accuracy: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub participants: usize,
    pub trials: usize,
    pub cells: Vec<CellSummary>,
    pub by_density: Vec<MarginalSummary>,
    pub by_scheme: Vec<MarginalSummary>,
    /// Set when some estimate has no confidence interval.
    pub ci_undefined: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub correct: usize,
    pub interpretation_error: usize,
    pub positional_error: usize,
}

impl OutcomeCounts {
    pub fn of(trials: &[TrialRecord]) -> Self {
        let mut c = Self::default();
        for t in trials {
            match t.outcome {
                Outcome::Correct => c.correct += 1,
                Outcome::InterpretationError => c.interpretation_error += 1,
                Outcome::PositionalError => c.positional_error += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.correct + self.interpretation_error + self.positional_error
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    time_sum_s: f64,
    correct: usize,
    n: usize,
}

impl Cell {
    fn time(&self) -> f64 {
        self.time_sum_s / self.n as f64
    }
    fn accuracy(&self) -> f64 {
        self.correct as f64 / self.n as f64
    }
}

/// Participant -> condition -> accumulated trials, participants in id order.
struct Table {
    participants: Vec<String>,
    cells: Vec<BTreeMap<usize, Cell>>,
    conditions: Vec<Condition>,
}

impl Table {
    fn build(trials: &[TrialRecord]) -> Self {
        let conditions = Condition::all();
        let mut by_id: BTreeMap<&str, BTreeMap<usize, Cell>> = BTreeMap::new();
        for t in trials {
            let Some(c) = conditions.iter().position(|c| *c == t.condition) else {
                continue;
            };
            let cell = by_id
                .entry(&t.participant_id)
                .or_default()
                .entry(c)
                .or_default();
            cell.time_sum_s += t.elapsed_ms / 1000.0;
            cell.correct += usize::from(t.outcome == Outcome::Correct);
            cell.n += 1;
        }
        Self {
            participants: by_id.keys().map(|s| s.to_string()).collect(),
            cells: by_id.into_values().collect(),
            conditions,
        }
    }

    fn is_complete_participant(&self, p: usize) -> bool {
        self.cells[p].len() == self.conditions.len()
    }

    fn complete_participants(&self) -> Vec<usize> {
        (0..self.participants.len())
            .filter(|&p| self.is_complete_participant(p))
            .collect()
    }

    fn matching<'a>(
        &'a self,
        p: usize,
        keep: impl Fn(&Condition) -> bool + 'a,
    ) -> impl Iterator<Item = &'a Cell> {
        self.cells[p]
            .iter()
            .filter(move |(c, _)| keep(&self.conditions[**c]))
            .map(|(_, cell)| cell)
    }

    /// Per-participant mean of `f` over that participant's cells matching `keep`.
    fn marginal(
        &self,
        p: usize,
        keep: impl Fn(&Condition) -> bool,
        f: impl Fn(&Cell) -> f64,
    ) -> Option<f64> {
        let vals: Vec<f64> = self.matching(p, keep).map(f).collect();
        (!vals.is_empty()).then(|| mean(&vals))
    }

    /// Per-participant share of correct trials over the matching cells.
    ///
    /// Pooling counts keeps equal proportions bit-identical, so rank ties
    /// are seen as ties.
    fn marginal_accuracy(&self, p: usize, keep: impl Fn(&Condition) -> bool) -> Option<f64> {
        let (correct, n) = self
            .matching(p, keep)
            .fold((0, 0), |(c, n), cell| (c + cell.correct, n + cell.n));
        (n > 0).then(|| correct as f64 / n as f64)
    }
}

fn density_label(d: u32) -> String {
    format!("{d}x{d}")
}

/// Cell and marginal summaries. Conditions nobody ran are left out.
pub fn summarize(trials: &[TrialRecord]) -> Summary {
    let table = Table::build(trials);
    let np = table.participants.len();
    let mut cells = Vec::new();
    for (ci, condition) in table.conditions.iter().enumerate() {
        let present: Vec<&Cell> = (0..np).filter_map(|p| table.cells[p].get(&ci)).collect();
        if present.is_empty() {
            continue;
        }
        let times: Vec<f64> = present.iter().map(|c| c.time()).collect();
        let accs: Vec<f64> = present.iter().map(|c| c.accuracy()).collect();
        cells.push(CellSummary {
            condition: *condition,
            participants: present.len(),
            trials: present.iter().map(|c| c.n).sum(),
            mean_time_s: Estimate::of(&times),
            accuracy: Estimate::of(&accs),
        });
    }
    let marginal = |level: String, keep: &dyn Fn(&Condition) -> bool| {
        let times: Vec<f64> = (0..np)
            .filter_map(|p| table.marginal(p, keep, Cell::time))
            .collect();
        let accs: Vec<f64> = (0..np)
            .filter_map(|p| table.marginal_accuracy(p, keep))
            .collect();
        (!times.is_empty()).then(|| MarginalSummary {
            level,
            participants: times.len(),
            mean_time_s: Estimate::of(&times),
            accuracy: Estimate::of(&accs),
        })
    };
    let by_density: Vec<_> = DENSITIES
        .iter()
        .filter_map(|&d| marginal(density_label(d), &|c: &Condition| c.density == d))
        .collect();
    let by_scheme: Vec<_> = EncodingScheme::ALL
        .iter()
        .filter_map(|&s| marginal(s.to_string(), &|c: &Condition| c.scheme == s))
        .collect();
    let ci_undefined = cells
        .iter()
        .flat_map(|c| [c.mean_time_s, c.accuracy])
        .chain(
            by_density
                .iter()
                .chain(&by_scheme)
                .flat_map(|m| [m.mean_time_s, m.accuracy]),
        )
        .any(|e| e.ci95_halfwidth.is_none());
    Summary {
        participants: np,
        trials: trials.len(),
        cells,
        by_density,
        by_scheme,
        ci_undefined,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Analyse only participants with every condition instead of failing.
    pub allow_incomplete: bool,
}

/// Everything `analyze` produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub summary: Summary,
    pub outcomes: OutcomeCounts,
    /// Participants entering the tests.
    pub analysed_participants: Vec<String>,
    pub excluded_participants: Vec<String>,
    /// Completion time, natural-log transformed: density, scheme, interaction.
    pub anova: Vec<StatResult>,
    /// Accuracy per factor, the other factor averaged out.
    pub friedman: Vec<StatResult>,
    /// Pairwise paired t on log time, Bonferroni within each factor.
    pub time_posthoc: Vec<StatResult>,
    /// Pairwise Wilcoxon on accuracy, Bonferroni-Holm within each factor.
    pub accuracy_posthoc: Vec<StatResult>,
    pub sphericity_corrected: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Factor {
    Density,
    Scheme,
}

impl Factor {
    fn name(self) -> &'static str {
        match self {
            Factor::Density => "density",
            Factor::Scheme => "scheme",
        }
    }

    fn levels(self) -> usize {
        match self {
            Factor::Density => DENSITIES.len(),
            Factor::Scheme => EncodingScheme::ALL.len(),
        }
    }

    fn labels(self) -> Vec<String> {
        match self {
            Factor::Density => DENSITIES.iter().map(|&d| density_label(d)).collect(),
            Factor::Scheme => EncodingScheme::ALL.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn matches(self, level: usize, c: &Condition) -> bool {
        match self {
            Factor::Density => c.density == DENSITIES[level],
            Factor::Scheme => c.scheme == EncodingScheme::ALL[level],
        }
    }
}

/// Pairs of levels in lexicographic order.
fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

fn wilcoxon_or_degenerate(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    match wilcoxon_signed_rank(a, b) {
        Err(StatsError::Degenerate(why)) => {
            Ok(StatResult::new("wilcoxon_signed_rank", 0.0, Df::One(0.0), 1.0).with_note(why))
        }
        other => other,
    }
}

fn rename(mut r: StatResult, name: String) -> StatResult {
    r.test_name = name;
    r
}

/// Runs the full pipeline over finalized trials.
pub fn analyze(
    trials: &[TrialRecord],
    options: AnalysisOptions,
) -> Result<ResultsDocument, AnalysisError> {
    if trials.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let table = Table::build(trials);
    let mut warnings = Vec::new();
    let complete = table.complete_participants();
    let excluded: Vec<String> = (0..table.participants.len())
        .filter(|p| !complete.contains(p))
        .map(|p| table.participants[p].clone())
        .collect();
    if !excluded.is_empty() {
        let msg = format!("participants missing conditions: {}", excluded.join(", "));
        if !options.allow_incomplete {
            return Err(AnalysisError::IncompleteDesign(msg));
        }
        warnings.push(format!("{msg}; excluded from tests"));
    }
    if complete.len() < 2 {
        return Err(AnalysisError::IncompleteDesign(format!(
            "{} participant(s) with every condition, at least 2 needed",
            complete.len()
        )));
    }
    let uneven = complete
        .iter()
        .flat_map(|&p| table.cells[p].values())
        .any(|c| c.n != crate::experiment::TRIALS_PER_BLOCK);
    if uneven {
        warnings.push("cells hold unequal trial counts".into());
    }

    let nd = DENSITIES.len();
    let ns = EncodingScheme::ALL.len();
    let cond_index = |d: usize, s: usize| d * ns + s;

    let mut cell_table = CellTable::new(complete.len(), nd, ns);
    for (row, &p) in complete.iter().enumerate() {
        for d in 0..nd {
            for s in 0..ns {
                cell_table.set(row, d, s, table.cells[p][&cond_index(d, s)].time());
            }
        }
    }
    let rm = rm_anova_2way(&cell_table, true)?;
    let anova: Vec<StatResult> = rm.effects().into_iter().cloned().collect();

    let factors = [Factor::Density, Factor::Scheme].map(|f| {
        let rows = |accuracy: bool| -> Vec<Vec<f64>> {
            complete
                .iter()
                .map(|&p| {
                    (0..f.levels())
                        .map(|i| {
                            let keep = |c: &Condition| f.matches(i, c);
                            let v = if accuracy {
                                table.marginal_accuracy(p, keep)
                            } else {
                                table.marginal(p, keep, |c| c.time().ln())
                            };
                            v.expect("complete participants have every level")
                        })
                        .collect()
                })
                .collect()
        };
        (f.name(), f.labels(), rows(true), rows(false))
    });

    let mut friedman_results = Vec::new();
    let mut time_posthoc = Vec::new();
    let mut accuracy_posthoc = Vec::new();
    for (factor, labels, acc, time) in &factors {
        friedman_results.push(rename(friedman(acc)?, format!("friedman_{factor}")));
        let column = |m: &Vec<Vec<f64>>, i: usize| m.iter().map(|r| r[i]).collect::<Vec<f64>>();
        let mut t_family = Vec::new();
        let mut w_family = Vec::new();
        for (i, j) in pairs(labels.len()) {
            let name = |test: &str| format!("{test} {factor} {} vs {}", labels[i], labels[j]);
            t_family.push(rename(
                paired_t(&column(time, i), &column(time, j))?,
                name("paired_t"),
            ));
            w_family.push(rename(
                wilcoxon_or_degenerate(&column(acc, i), &column(acc, j))?,
                name("wilcoxon"),
            ));
        }
        time_posthoc.extend(correct_family(&t_family, Correction::Bonferroni));
        accuracy_posthoc.extend(correct_family(&w_family, Correction::BonferroniHolm));
    }

    Ok(ResultsDocument {
        summary: summarize(trials),
        outcomes: OutcomeCounts::of(trials),
        analysed_participants: complete
            .iter()
            .map(|&p| table.participants[p].clone())
            .collect(),
        excluded_participants: excluded,
        anova,
        friedman: friedman_results,
        time_posthoc,
        accuracy_posthoc,
        sphericity_corrected: rm.sphericity_corrected,
        warnings,
    })
}

pub const CELL_CSV_COLUMNS: [&str; 9] = [
    "density",
    "scheme",
    "participants",
    "trials",
    "mean_time_s",
    "time_ci95_halfwidth",
    "accuracy",
    "accuracy_ci95_halfwidth",
    "ci_defined",
];

/// One row per summarized cell; undefined intervals are empty cells.
pub fn write_cell_csv<W: Write>(summary: &Summary, out: W) -> Result<(), AnalysisError> {
    let err = |e: csv::Error| AnalysisError::Export(e.to_string());
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CELL_CSV_COLUMNS).map_err(err)?;
    for c in &summary.cells {
        w.write_record([
            c.condition.density.to_string(),
            c.condition.scheme.to_string(),
            c.participants.to_string(),
            c.trials.to_string(),
            c.mean_time_s.mean.to_string(),
            opt(c.mean_time_s.ci95_halfwidth),
            c.accuracy.mean.to_string(),
            opt(c.accuracy.ci95_halfwidth),
            c.mean_time_s.ci95_halfwidth.is_some().to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| AnalysisError::Export(e.to_string()))
}
