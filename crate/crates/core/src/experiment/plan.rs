use super::{Condition, ExperimentError, RegionId, COHORT_SIZE, DENSITIES, TRIALS_PER_BLOCK};
use crate::encoding::{EncodingScheme, GridSpec, TargetIndex};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Cyclic square for the three densities; row `p % 3` orders participant `p`.
pub const DENSITY_SQUARE: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];

/// Williams square for the four schemes (also balanced for first-order
/// carry-over); row `p % 4` orders the schemes inside every density.
pub const SCHEME_SQUARE: [[usize; 4]; 4] = [[0, 1, 3, 2], [1, 2, 0, 3], [2, 3, 1, 0], [3, 0, 2, 1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub participants: usize,
    pub seed: u64,
    /// Accept cohorts that are not a multiple of 12 by taking the first
    /// `participants` rows of the next full cohort. Balance is then partial.
    #[serde(default)]
    pub pad_incomplete: bool,
}

impl PlanConfig {
    pub fn new(participants: usize, seed: u64) -> Self {
        Self {
            participants,
            seed,
            pad_incomplete: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub condition: Condition,
    pub targets: Vec<TargetIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub participant_id: String,
    pub participant_index: usize,
    pub seed: u64,
    pub blocks: Vec<Block>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub metadata: String,
}

impl SessionPlan {
    pub fn trial_count(&self) -> usize {
        self.blocks.iter().map(|b| b.targets.len()).sum()
    }

    pub fn target(&self, block: usize, trial: usize) -> Option<(Condition, TargetIndex)> {
        let b = self.blocks.get(block)?;
        Some((b.condition, *b.targets.get(trial)?))
    }
}

/// Counterbalanced plans: densities in Latin-square order, all four schemes
/// nested inside each density in Latin-square order, and nine targets per
/// block, one drawn uniformly from each region and presented shuffled.
pub fn generate_plans(config: PlanConfig) -> Result<Vec<SessionPlan>, ExperimentError> {
    let n = config.participants;
    if n == 0 {
        return Err(ExperimentError::Design(
            "at least one participant is required".into(),
        ));
    }
    if n % COHORT_SIZE != 0 && !config.pad_incomplete {
        return Err(ExperimentError::Design(format!(
            "{n} participants cannot balance the {COHORT_SIZE}-row design"
        )));
    }
    let grids = DENSITIES
        .iter()
        .map(|&d| GridSpec::with_density(d))
        .collect::<Result<Vec<_>, _>>()?;
    let width = n.to_string().len().max(2);
    (0..n)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(p as u64);
            let mut blocks = Vec::with_capacity(DENSITIES.len() * 4);
            for &d in &DENSITY_SQUARE[p % 3] {
                for &s in &SCHEME_SQUARE[p % 4] {
                    let grid = &grids[d];
                    let mut targets: Vec<TargetIndex> = RegionId::ALL
                        .iter()
                        .map(|r| {
                            *r.members(grid)
                                .choose(&mut rng)
                                .expect("every region is populated")
                        })
                        .collect();
                    targets.shuffle(&mut rng);
                    debug_assert_eq!(targets.len(), TRIALS_PER_BLOCK);
                    blocks.push(Block {
                        condition: Condition::new(DENSITIES[d], EncodingScheme::ALL[s]),
                        targets,
                    });
                }
            }
            Ok(SessionPlan {
                participant_id: format!("P{:0width$}", p + 1),
                participant_index: p,
                seed: config.seed,
                blocks,
                metadata: String::new(),
            })
        })
        .collect()
}
