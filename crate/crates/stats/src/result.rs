use serde::{Deserialize, Serialize};

/// Degrees of freedom of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    One(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    None,
    Bonferroni,
    BonferroniHolm,
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub test_name: String,
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    pub correction: Correction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StatResult {
    pub fn new(test_name: impl Into<String>, statistic: f64, df: Df, p_value: f64) -> Self {
        Self {
            test_name: test_name.into(),
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            correction: Correction::None,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Adjusts the p-values of a family of tests for multiple comparisons.
///
/// Bonferroni multiplies every p by the family size. Holm sorts ascending,
/// multiplies the i-th smallest (0-based) by `m - i`, and enforces a
/// nondecreasing sequence. Both cap at 1. Results keep their input order.
pub fn correct_family(results: &[StatResult], method: Correction) -> Vec<StatResult> {
    let m = results.len() as f64;
    let mut out = results.to_vec();
    match method {
        Correction::None => {}
        Correction::Bonferroni => {
            for r in &mut out {
                r.p_value = (r.p_value * m).min(1.0);
            }
        }
        Correction::BonferroniHolm => {
            let mut order: Vec<usize> = (0..results.len()).collect();
            order.sort_by(|&a, &b| results[a].p_value.total_cmp(&results[b].p_value));
            let mut running = 0.0_f64;
            for (rank, &idx) in order.iter().enumerate() {
                let adjusted = (results[idx].p_value * (m - rank as f64)).min(1.0);
                running = running.max(adjusted);
                out[idx].p_value = running;
            }
        }
    }
    for r in &mut out {
        r.correction = method;
    }
    out
}
