//! Range sensor models, ray-count accumulation and the count-based belief.
//!
//! The uncertain scanner emits `rays_per_rev` rays around the robot. Each ray
//! reports an endpoint: the first obstacle face within range (or the point at
//! full range) plus independent Gaussian noise on x and y. Every cell the pulse
//! passes through on its way to the reported endpoint gets its ray count
//! bumped. Because the noise is added in Cartesian space, an endpoint can land
//! past a wall face and mark the wall cell as seen-through.
//!
//! Beliefs are `p = 1 - min(n, 72) / (min(max n, 72) + eps)`: 1 means nothing is
//! known, 0 means the cell is certainly empty.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robot::Pose;
use crate::world::{Cell, GridMap, Point2};

/// Ray count at which a cell is certainly empty (one full revolution at 5 degrees).
pub const FULL_SCAN_COUNT: i32 = 72;

/// Scans needed before a cell counts as identified empty.
pub const DEFAULT_CONFIDENCE_COUNT: i32 = 14;

/// Keeps the belief denominator away from zero.
pub const BELIEF_EPSILON: f64 = 1e-9;

/// Sentinel for a cell no ray has reached.
pub const UNOBSERVED: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Standard deviation of the x error, in cell widths.
    pub sigma_x: f64,
    /// Standard deviation of the y error, in cell widths.
    pub sigma_y: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams {
        sigma_x: 0.0,
        sigma_y: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x >= 0.0 && self.sigma_y >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviations must be non-negative: {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma_x: 0.1,
            sigma_y: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    /// Nominal range R, in cell widths.
    pub range: f64,
    pub rays_per_rev: usize,
}

impl SensorParams {
    pub fn angular_resolution(&self) -> f64 {
        std::f64::consts::TAU / self.rays_per_rev as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range > 0.0 && self.range.is_finite()) || self.rays_per_rev == 0 {
            return Err(Error::InvalidParameter(format!("bad sensor parameters: {self:?}")));
        }
        Ok(())
    }
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            range: 1.5,
            rays_per_rev: 72,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRay {
    /// Angle relative to the robot heading.
    pub relative_angle: f64,
    /// Absolute angle in the world frame.
    pub angle: f64,
    /// Noisy reported endpoint.
    pub endpoint: Point2,
    /// Whether the pulse reflected within range.
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub origin: Point2,
    pub heading: f64,
    pub range: f64,
    pub rays: Vec<ScanRay>,
}

impl Scan {
    /// Measured free distance along a ray: the reported range for a reflection,
    /// the nominal range otherwise.
    pub fn measured_range(&self, ray: &ScanRay) -> f64 {
        if ray.hit {
            ray.endpoint.distance(self.origin)
        } else {
            self.range
        }
    }
}

/// One revolution of the uncertain scanner.
pub fn scan_uncertain<R: Rng + ?Sized>(
    map: &GridMap,
    pose: &Pose,
    sensor: &SensorParams,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Scan> {
    sensor.validate()?;
    noise.validate()?;
    let origin = pose.position;
    match map.cell_containing(origin) {
        None => return Err(Error::OutsideMap(origin)),
        Some(c) if map.is_occupied(c) => return Err(Error::InsideObstacle(origin)),
        Some(_) => {}
    }
    let nx = Normal::new(0.0, noise.sigma_x).expect("validated sigma");
    let ny = Normal::new(0.0, noise.sigma_y).expect("validated sigma");
    let step = sensor.angular_resolution();
    let rays = (0..sensor.rays_per_rev)
        .map(|i| {
            let relative_angle = i as f64 * step;
            let angle = pose.heading + relative_angle;
            let cast = map.cast_ray(origin, angle, sensor.range);
            let truth = origin + Point2::from_polar(cast.distance, angle);
            let endpoint = truth + Point2::new(nx.sample(rng), ny.sample(rng));
            ScanRay {
                relative_angle,
                angle,
                endpoint,
                hit: cast.hit,
            }
        })
        .collect();
    Ok(Scan {
        origin,
        heading: pose.heading,
        range: sensor.range,
        rays,
    })
}

/// Ideal disc sensor: the range-limited visibility disc around `point`.
pub fn scan_ideal(map: &GridMap, point: Point2, range: f64) -> Result<Vec<Cell>> {
    match map.cell_containing(point) {
        None => Err(Error::OutsideMap(point)),
        Some(c) if map.is_occupied(c) => Err(Error::InsideObstacle(point)),
        Some(_) => Ok(map.disc_cells(point, range)),
    }
}

/// Per-cell accumulated ray counts, starting at [`UNOBSERVED`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayCountMap {
    width: usize,
    height: usize,
    counts: Vec<i32>,
}

impl RayCountMap {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            counts: vec![UNOBSERVED; map.len()],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn flat(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    /// Raw count, `-1` when never observed.
    pub fn get(&self, cell: Cell) -> i32 {
        self.counts[self.flat(cell)]
    }

    pub fn raw(&self) -> &[i32] {
        &self.counts
    }

    /// Count clamped to `[0, 72]`, the value the belief and metrics use.
    pub fn effective(&self, cell: Cell) -> i32 {
        self.get(cell).clamp(0, FULL_SCAN_COUNT)
    }

    pub fn is_observed(&self, cell: Cell) -> bool {
        self.get(cell) >= 0
    }

    pub fn increment(&mut self, cell: Cell) {
        let i = self.flat(cell);
        let n = &mut self.counts[i];
        *n = (*n).max(0) + 1;
    }

    /// Adds one count to every cell each pulse passes through on its way to
    /// its reported endpoint. Counts are not capped here.
    pub fn accumulate(&mut self, map: &GridMap, scan: &Scan) {
        for ray in &scan.rays {
            for cell in map.traverse_ray_open(scan.origin, ray.endpoint) {
                self.increment(cell);
            }
        }
    }

    /// Largest clamped count over the map.
    pub fn max_effective(&self) -> i32 {
        self.counts
            .iter()
            .map(|n| n.clamp(&0, &FULL_SCAN_COUNT))
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.counts.len()).map(|i| Cell::new(i / self.width, i % self.width))
    }
}

/// Per-cell probability that the cell is not (known to be) empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMap {
    width: usize,
    height: usize,
    p: Vec<f64>,
}

impl BeliefMap {
    /// All cells unknown.
    pub fn unknown(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            p: vec![1.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "belief grid needs {} values, got {}",
                width * height,
                p.len()
            )));
        }
        if let Some(&bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidProbability(bad));
        }
        Ok(Self { width, height, p })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, cell: Cell) -> f64 {
        self.p[cell.row * self.width + cell.col]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }
}

pub fn update_beliefs(rc: &RayCountMap) -> BeliefMap {
    let denom = rc.max_effective() as f64 + BELIEF_EPSILON;
    let p = rc
        .counts
        .iter()
        .map(|&n| {
            let num = n.clamp(0, FULL_SCAN_COUNT) as f64;
            (1.0 - num / denom).clamp(0.0, 1.0)
        })
        .collect();
    BeliefMap {
        width: rc.width,
        height: rc.height,
        p,
    }
}

pub fn is_confident_empty(rc: &RayCountMap, cell: Cell, threshold: i32) -> bool {
    rc.effective(cell) >= threshold
}
