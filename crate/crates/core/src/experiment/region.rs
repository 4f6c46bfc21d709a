use crate::encoding::{GridSpec, TargetIndex};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// The nine sampling areas: sign of `iy` crossed with sign of `ix`, where a
/// zero coordinate puts the target in the central row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionId {
    TopLeft,
    TopCentre,
    TopRight,
    MiddleLeft,
    Origin,
    MiddleRight,
    BottomLeft,
    BottomCentre,
    BottomRight,
}

impl RegionId {
    pub const ALL: [RegionId; 9] = [
        RegionId::TopLeft,
        RegionId::TopCentre,
        RegionId::TopRight,
        RegionId::MiddleLeft,
        RegionId::Origin,
        RegionId::MiddleRight,
        RegionId::BottomLeft,
        RegionId::BottomCentre,
        RegionId::BottomRight,
    ];

    pub fn of(t: TargetIndex) -> RegionId {
        let row = match t.iy.cmp(&0) {
            Ordering::Greater => 0,
            Ordering::Equal => 1,
            Ordering::Less => 2,
        };
        let col = match t.ix.cmp(&0) {
            Ordering::Less => 0,
            Ordering::Equal => 1,
            Ordering::Greater => 2,
        };
        Self::ALL[row * 3 + col]
    }

    /// In-bounds indices of this region, in grid order.
    pub fn members(self, grid: &GridSpec) -> Vec<TargetIndex> {
        grid.targets()
            .filter(|t| RegionId::of(*t) == self)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_partition_each_grid() {
        for d in [3, 5, 7, 9] {
            let g = GridSpec::with_density(d).unwrap();
            let m = g.max_index() as usize;
            let total: usize = RegionId::ALL.iter().map(|r| r.members(&g).len()).sum();
            assert_eq!(total, (d * d) as usize);
            assert_eq!(RegionId::Origin.members(&g), vec![TargetIndex::ORIGIN]);
            assert_eq!(RegionId::TopLeft.members(&g).len(), m * m);
            assert_eq!(RegionId::MiddleRight.members(&g).len(), m);
        }
    }

    #[test]
    fn named_examples() {
        assert_eq!(RegionId::of(TargetIndex::new(-1, 2)), RegionId::TopLeft);
        assert_eq!(RegionId::of(TargetIndex::new(0, 2)), RegionId::TopCentre);
        assert_eq!(RegionId::of(TargetIndex::new(3, 0)), RegionId::MiddleRight);
        assert_eq!(
            RegionId::of(TargetIndex::new(0, -1)),
            RegionId::BottomCentre
        );
        assert_eq!(RegionId::of(TargetIndex::new(1, -1)), RegionId::BottomRight);
    }
}
