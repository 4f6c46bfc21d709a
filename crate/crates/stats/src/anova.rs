//! Two-way repeated-measures ANOVA for a fully within-subject design.
//!
//! One observation per subject per cell. Each effect is tested against its
//! own subject-interaction mean square:
//!
//! | effect | error term | df            |
//! |--------|------------|---------------|
//! | A      | A x S      | (a-1), (a-1)(n-1) |
//! | B      | B x S      | (b-1), (b-1)(n-1) |
//! | A x B  | A x B x S  | (a-1)(b-1), (a-1)(b-1)(n-1) |
//!
//! No sphericity correction is applied.

use crate::dist::f_sf;
use crate::{Df, StatResult, StatsError};
use serde::{Deserialize, Serialize};

/// Subject x A x B table of cell values, possibly with holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTable {
    subjects: usize,
    levels_a: usize,
    levels_b: usize,
    cells: Vec<Option<f64>>,
}

impl CellTable {
    pub fn new(subjects: usize, levels_a: usize, levels_b: usize) -> Self {
        Self {
            subjects,
            levels_a,
            levels_b,
            cells: vec![None; subjects * levels_a * levels_b],
        }
    }

    /// Builds a complete table from `values[subject][a][b]`.
    pub fn from_nested(values: &[Vec<Vec<f64>>]) -> Result<Self, StatsError> {
        let subjects = values.len();
        let levels_a = values.first().map_or(0, Vec::len);
        let levels_b = values.first().and_then(|s| s.first()).map_or(0, Vec::len);
        let mut table = Self::new(subjects, levels_a, levels_b);
        for (s, rows) in values.iter().enumerate() {
            if rows.len() != levels_a || rows.iter().any(|r| r.len() != levels_b) {
                return Err(StatsError::IncompleteDesign(format!(
                    "subject {s} has a ragged table"
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    table.set(s, i, j, v);
                }
            }
        }
        Ok(table)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.subjects, self.levels_a, self.levels_b)
    }

    fn offset(&self, s: usize, i: usize, j: usize) -> usize {
        assert!(s < self.subjects && i < self.levels_a && j < self.levels_b);
        (s * self.levels_a + i) * self.levels_b + j
    }

    pub fn set(&mut self, s: usize, i: usize, j: usize, value: f64) {
        let k = self.offset(s, i, j);
        self.cells[k] = Some(value);
    }

    pub fn get(&self, s: usize, i: usize, j: usize) -> Option<f64> {
        self.cells[self.offset(s, i, j)]
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }
}

/// F tests for both main effects and the interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmAnova {
    pub factor_a: StatResult,
    pub factor_b: StatResult,
    pub interaction: StatResult,
    pub log_transformed: bool,
    pub sphericity_corrected: bool,
}

impl RmAnova {
    pub fn effects(&self) -> [&StatResult; 3] {
        [&self.factor_a, &self.factor_b, &self.interaction]
    }
}

pub fn rm_anova_2way(table: &CellTable, log_transform: bool) -> Result<RmAnova, StatsError> {
    let (n, a, b) = table.shape();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    if a < 2 || b < 2 {
        return Err(StatsError::IncompleteDesign(format!(
            "each factor needs two levels, got {a} x {b}"
        )));
    }
    let mut x = vec![0.0; n * a * b];
    for s in 0..n {
        for i in 0..a {
            for j in 0..b {
                let v = table.get(s, i, j).ok_or_else(|| {
                    StatsError::IncompleteDesign(format!("missing cell subject {s}, ({i}, {j})"))
                })?;
                x[(s * a + i) * b + j] = if log_transform {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(StatsError::Domain {
                            what: "log",
                            value: v,
                        });
                    }
                    v.ln()
                } else {
                    v
                };
            }
        }
    }
    let at = |s: usize, i: usize, j: usize| x[(s * a + i) * b + j];
    let (nf, af, bf) = (n as f64, a as f64, b as f64);

    let grand = x.iter().sum::<f64>() / (nf * af * bf);
    let mean_s: Vec<f64> = (0..n)
        .map(|s| {
            (0..a)
                .flat_map(|i| (0..b).map(move |j| (i, j)))
                .map(|(i, j)| at(s, i, j))
                .sum::<f64>()
                / (af * bf)
        })
        .collect();
    let mean_a: Vec<f64> = (0..a)
        .map(|i| {
            (0..n)
                .flat_map(|s| (0..b).map(move |j| (s, j)))
                .map(|(s, j)| at(s, i, j))
                .sum::<f64>()
                / (nf * bf)
        })
        .collect();
    let mean_b: Vec<f64> = (0..b)
        .map(|j| {
            (0..n)
                .flat_map(|s| (0..a).map(move |i| (s, i)))
                .map(|(s, i)| at(s, i, j))
                .sum::<f64>()
                / (nf * af)
        })
        .collect();
    let mean_as = |s: usize, i: usize| (0..b).map(|j| at(s, i, j)).sum::<f64>() / bf;
    let mean_bs = |s: usize, j: usize| (0..a).map(|i| at(s, i, j)).sum::<f64>() / af;
    let mean_ab = |i: usize, j: usize| (0..n).map(|s| at(s, i, j)).sum::<f64>() / nf;

    let ss_a = nf * bf * mean_a.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_b = nf * af * mean_b.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_as = 0.0;
    let mut ss_bs = 0.0;
    let mut ss_ab = 0.0;
    let mut ss_abs = 0.0;
    for s in 0..n {
        for i in 0..a {
            ss_as += bf * (mean_as(s, i) - mean_a[i] - mean_s[s] + grand).powi(2);
        }
        for j in 0..b {
            ss_bs += af * (mean_bs(s, j) - mean_b[j] - mean_s[s] + grand).powi(2);
        }
    }
    for i in 0..a {
        for j in 0..b {
            ss_ab += nf * (mean_ab(i, j) - mean_a[i] - mean_b[j] + grand).powi(2);
            for s in 0..n {
                let r = at(s, i, j) - mean_ab(i, j) - mean_as(s, i) - mean_bs(s, j)
                    + mean_a[i]
                    + mean_b[j]
                    + mean_s[s]
                    - grand;
                ss_abs += r * r;
            }
        }
    }

    let df_a = af - 1.0;
    let df_b = bf - 1.0;
    let df_s = nf - 1.0;
    Ok(RmAnova {
        factor_a: f_test("rm_anova_a", ss_a, df_a, ss_as, df_a * df_s),
        factor_b: f_test("rm_anova_b", ss_b, df_b, ss_bs, df_b * df_s),
        interaction: f_test(
            "rm_anova_ab",
            ss_ab,
            df_a * df_b,
            ss_abs,
            df_a * df_b * df_s,
        ),
        log_transformed: log_transform,
        sphericity_corrected: false,
    })
}

fn f_test(name: &str, ss_effect: f64, df_effect: f64, ss_error: f64, df_error: f64) -> StatResult {
    let ms_effect = ss_effect / df_effect;
    let ms_error = ss_error / df_error;
    let df = Df::Pair(df_effect, df_error);
    // Sums of squares below this are rounding noise relative to the data scale.
    let scale = (ss_effect + ss_error).max(f64::MIN_POSITIVE);
    if ms_error <= 1e-14 * scale {
        if ms_effect <= 1e-14 * scale {
            return StatResult::new(name, 0.0, df, 1.0)
                .with_note("no variance in effect or error term");
        }
        return StatResult::new(name, f64::INFINITY, df, 0.0).with_note("zero error variance");
    }
    let f = ms_effect / ms_error;
    StatResult::new(name, f, df, f_sf(f, df_effect, df_error))
}
