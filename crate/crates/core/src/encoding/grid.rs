use super::EncodingError;
use serde::{Deserialize, Serialize};

pub const DEFAULT_FRAME_CM: f64 = 80.0;

/// Square grid of `density x density` target centres spanning the frame
/// edge to edge, centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    density: u32,
    frame_size_cm: f64,
}

pub fn make_grid(density: u32, frame_size_cm: f64) -> Result<GridSpec, EncodingError> {
    if density < 3 || density % 2 == 0 {
        return Err(EncodingError::InvalidDensity(density));
    }
    if !(frame_size_cm > 0.0) || !frame_size_cm.is_finite() {
        return Err(EncodingError::InvalidFrame(frame_size_cm));
    }
    Ok(GridSpec {
        density,
        frame_size_cm,
    })
}

impl GridSpec {
    /// Grid on the default 80 cm frame.
    pub fn with_density(density: u32) -> Result<Self, EncodingError> {
        make_grid(density, DEFAULT_FRAME_CM)
    }

    pub fn density(&self) -> u32 {
        self.density
    }

    pub fn frame_size_cm(&self) -> f64 {
        self.frame_size_cm
    }

    pub fn spacing_cm(&self) -> f64 {
        self.frame_size_cm / f64::from(self.density - 1)
    }

    pub fn target_radius_cm(&self) -> f64 {
        self.frame_size_cm / f64::from(self.density)
    }

    pub fn max_index(&self) -> i32 {
        ((self.density - 1) / 2) as i32
    }

    pub fn contains(&self, t: TargetIndex) -> bool {
        let m = self.max_index();
        t.ix.abs() <= m && t.iy.abs() <= m
    }

    pub fn check(&self, t: TargetIndex) -> Result<(), EncodingError> {
        let max_index = self.max_index();
        for value in [t.ix, t.iy] {
            if value.abs() > max_index {
                return Err(EncodingError::OutOfBounds { value, max_index });
            }
        }
        Ok(())
    }

    /// Every in-bounds index, row by row from the top.
    pub fn targets(&self) -> impl Iterator<Item = TargetIndex> {
        let m = self.max_index();
        (-m..=m)
            .rev()
            .flat_map(move |iy| (-m..=m).map(move |ix| TargetIndex::new(ix, iy)))
    }
}

/// Grid coordinate relative to the origin; positive `ix` is right, positive `iy` is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetIndex {
    pub ix: i32,
    pub iy: i32,
}

impl TargetIndex {
    pub const ORIGIN: TargetIndex = TargetIndex { ix: 0, iy: 0 };

    pub const fn new(ix: i32, iy: i32) -> Self {
        Self { ix, iy }
    }

    pub fn opposite(self) -> Self {
        Self::new(-self.ix, -self.iy)
    }
}

impl std::fmt::Display for TargetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.ix, self.iy)
    }
}

/// Point in frame centimetres, origin at the sternum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x_cm: f64,
    pub y_cm: f64,
}

impl Point {
    pub const fn new(x_cm: f64, y_cm: f64) -> Self {
        Self { x_cm, y_cm }
    }
}

pub fn index_to_position(grid: &GridSpec, t: TargetIndex) -> Result<Point, EncodingError> {
    grid.check(t)?;
    let s = grid.spacing_cm();
    Ok(Point::new(f64::from(t.ix) * s, f64::from(t.iy) * s))
}

/// Nearest target centre and whether the point lies inside its circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub target: TargetIndex,
    pub distance_cm: f64,
    pub hit: bool,
}

/// Finds the target centre closest to `p`.
///
/// Ties break on smaller `|ix| + |iy|`, then smaller `iy`, then smaller `ix`.
/// Squared distance separates per axis, so the minimisers are among the
/// floor/ceil neighbours of `p` on each axis.
pub fn nearest_target(grid: &GridSpec, p: Point) -> Hit {
    let s = grid.spacing_cm();
    let m = grid.max_index();
    let axis_candidates = |v: f64| {
        let u = v / s;
        let lo = (u.floor() as i64).clamp(-(m as i64), m as i64) as i32;
        let hi = (u.ceil() as i64).clamp(-(m as i64), m as i64) as i32;
        [lo, hi]
    };
    let xs = axis_candidates(p.x_cm);
    let ys = axis_candidates(p.y_cm);
    let key = |t: &TargetIndex| {
        let dx = p.x_cm - f64::from(t.ix) * s;
        let dy = p.y_cm - f64::from(t.iy) * s;
        (dx * dx + dy * dy, t.ix.abs() + t.iy.abs(), t.iy, t.ix)
    };
    let best = xs
        .iter()
        .flat_map(|&ix| ys.iter().map(move |&iy| TargetIndex::new(ix, iy)))
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.cmp(&kb.1))
                .then(ka.2.cmp(&kb.2))
                .then(ka.3.cmp(&kb.3))
        })
        .expect("candidate set is never empty");
    let distance_cm = key(&best).0.sqrt();
    Hit {
        target: best,
        distance_cm,
        hit: distance_cm <= grid.target_radius_cm(),
    }
}
