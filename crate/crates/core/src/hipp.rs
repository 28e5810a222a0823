//! The online exploration loop: scan, update beliefs, score cells, order the
//! chosen ones, move one sample period, repeat.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::{candidate_cells, gain_field, select_cells, GainParams};
use crate::harness::reachable_cells;
use crate::plan::{closed_tour, rrt_star, RrtParams};
use crate::robot::{normalize_angle, step_toward_limited, Pose, RobotParams, WheelSpeeds};
use crate::sensing::{
    scan_uncertain, update_beliefs, BeliefMap, NoiseParams, RayCountMap, Scan, SensorParams, DEFAULT_CONFIDENCE_COUNT,
    FULL_SCAN_COUNT,
};
use crate::world::{Cell, GridMap, Point2};

/// Rays this close to the direction of travel bound the forward clearance.
const CLEARANCE_CONE: f64 = 10.0 * std::f64::consts::PI / 180.0;

/// Reflections a cell needs before it can count as a wall.
const WALL_MIN_HITS: u32 = 3;

/// Share of the pulses entering a cell that must end there for a wall.
const WALL_HIT_RATIO: f64 = 0.5;

/// Clearance kept from believed obstacles while detouring, cell widths.
const DETOUR_INFLATION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HippConfig {
    pub sensor: SensorParams,
    pub noise: NoiseParams,
    /// Includes the sample period.
    pub robot: RobotParams,
    pub gain: GainParams,
    pub rrt: RrtParams,
    /// Seconds.
    pub mission_time: f64,
    /// Scans a cell needs before it counts as identified.
    pub confidence_count: i32,
    pub seed: u64,
}

impl Default for HippConfig {
    fn default() -> Self {
        Self {
            sensor: SensorParams::default(),
            noise: NoiseParams::default(),
            robot: RobotParams::default(),
            // a single target per step and a stronger distance pull sweep
            // the map in bands instead of zig-zagging between far cells
            gain: GainParams {
                beta_distance: 0.2,
                top_k: 1,
                ..GainParams::default()
            },
            rrt: RrtParams::default(),
            mission_time: 200.0,
            confidence_count: DEFAULT_CONFIDENCE_COUNT,
            seed: 0,
        }
    }
}

impl HippConfig {
    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.noise.validate()?;
        self.robot.validate()?;
        self.gain.validate()?;
        self.rrt.validate()?;
        if self.max_steps() < 1 {
            return Err(Error::InvalidParameter(format!(
                "mission time {} shorter than one sample period {}",
                self.mission_time, self.robot.sample_time
            )));
        }
        if !(1..=FULL_SCAN_COUNT).contains(&self.confidence_count) {
            return Err(Error::InvalidParameter(format!(
                "confidence count {} outside 1..={FULL_SCAN_COUNT}",
                self.confidence_count
            )));
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        (self.mission_time / self.robot.sample_time + 1e-9).floor().max(0.0) as usize
    }

    /// Belief equivalent of the count rule, for display.
    pub fn belief_threshold(&self) -> f64 {
        1.0 - self.confidence_count as f64 / FULL_SCAN_COUNT as f64
    }

    /// Distance kept from the measured obstacle ahead: a tenth of a cell plus
    /// three noise deviations.
    pub fn clearance_margin(&self) -> f64 {
        0.1 + 3.0 * self.noise.sigma_x.max(self.noise.sigma_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    /// Pose at the end of the step.
    pub pose: Pose,
    pub wheels: WheelSpeeds,
    pub selected: Vec<Cell>,
    /// Center of the first cell on the tour.
    pub destination: Point2,
    /// Point actually steered at (differs from `destination` after a detour).
    pub target: Point2,
    pub rrt_fallback: bool,
    /// Cumulative travelled distance, cell widths.
    pub travelled: f64,
    /// Cells scanned at least `confidence_count` times.
    pub identified_cells: usize,
    /// Identified cells that are free in ground truth.
    pub confident_cells: usize,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub start: Pose,
    pub steps: Vec<StepRecord>,
    pub counts: RayCountMap,
    pub beliefs: BeliefMap,
    pub reflections: ReflectionMap,
    /// True when the loop ended because nothing was left to explore.
    pub completed: bool,
}

impl RunTrace {
    pub fn travelled(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.travelled)
    }

    /// The start position followed by the position after every step.
    pub fn positions(&self) -> impl Iterator<Item = Point2> + '_ {
        std::iter::once(self.start.position).chain(self.steps.iter().map(|s| s.pose.position))
    }
}

/// Per-cell tally of reported reflection points.
///
/// Noisy endpoints push ray counts into wall cells, so after a few scans the
/// belief alone no longer marks walls. A wall cell differs from a free one in
/// that nearly every pulse entering it also ends there.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionMap {
    width: usize,
    hits: Vec<u32>,
}

impl ReflectionMap {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            hits: vec![0; map.len()],
        }
    }

    pub fn record(&mut self, map: &GridMap, scan: &Scan) {
        for ray in scan.rays.iter().filter(|r| r.hit) {
            if let Some(c) = map.cell_containing(ray.endpoint) {
                self.hits[c.row * self.width + c.col] += 1;
            }
        }
    }

    pub fn get(&self, cell: Cell) -> u32 {
        self.hits[cell.row * self.width + cell.col]
    }

    /// At least three reflections, and at least half of the pulses that
    /// entered the cell ended in it.
    pub fn is_wall(&self, counts: &RayCountMap, cell: Cell) -> bool {
        let h = self.get(cell);
        h >= WALL_MIN_HITS && h as f64 >= WALL_HIT_RATIO * counts.get(cell).max(0) as f64
    }
}

/// What the robot believes about obstacles at the current step.
#[derive(Clone, Copy)]
pub struct BelievedMap<'a> {
    pub map: &'a GridMap,
    pub counts: &'a RayCountMap,
    pub beliefs: &'a BeliefMap,
    pub reflections: Option<&'a ReflectionMap>,
    pub threshold: f64,
}

impl BelievedMap<'_> {
    fn sensed_wall(&self, c: Cell) -> bool {
        self.reflections.is_some_and(|r| r.is_wall(self.counts, c))
    }

    /// With reflection evidence only sensed walls block. Without it, any
    /// observed cell with belief at or above the threshold does.
    pub fn blocks(&self, c: Cell) -> bool {
        match self.reflections {
            Some(r) => r.is_wall(self.counts, c),
            None => self.counts.is_observed(c) && self.beliefs.get(c) >= self.threshold,
        }
    }

    /// Whether an obstacle lies strictly between the cells of `a` and `b`.
    pub fn is_obstacle_between(&self, a: Point2, b: Point2) -> bool {
        let ends = [self.map.cell_containing(a), self.map.cell_containing(b)];
        self.map
            .traverse_ray(a, b)
            .into_iter()
            .filter(|c| !ends.contains(&Some(*c)))
            .any(|c| self.blocks(c))
    }

    /// Detour predicate: blocking cells, and unobserved cells with no
    /// observed free neighbor.
    pub fn is_obstacle(&self, p: Point2) -> bool {
        self.map.cell_containing(p).is_none_or(|c| self.cell_is_obstacle(c))
    }

    /// [`is_obstacle`](Self::is_obstacle) for any point within `radius`
    /// (checked at the point and eight points on the circle).
    pub fn is_obstacle_near(&self, p: Point2, radius: f64) -> bool {
        self.is_obstacle(p)
            || (0..8).any(|i| {
                let q = p + Point2::from_polar(radius, i as f64 * std::f64::consts::FRAC_PI_4);
                self.is_obstacle(q)
            })
    }

    pub fn cell_is_obstacle(&self, c: Cell) -> bool {
        if self.counts.is_observed(c) {
            self.blocks(c)
        } else {
            !self
                .map
                .neighbors8(c)
                .any(|n| self.counts.is_observed(n) && !self.blocks(n))
        }
    }
}

/// Whether the believed map shows an obstacle strictly between the cells of
/// `a` and `b`: an observed cell on the segment with belief at or above
/// `threshold`.
pub fn is_obstacle_between(
    counts: &RayCountMap,
    beliefs: &BeliefMap,
    map: &GridMap,
    a: Point2,
    b: Point2,
    threshold: f64,
) -> bool {
    BelievedMap {
        map,
        counts,
        beliefs,
        reflections: None,
        threshold,
    }
    .is_obstacle_between(a, b)
}

/// Detour predicate on beliefs alone; see [`BelievedMap::is_obstacle`].
pub fn believed_obstacle(counts: &RayCountMap, beliefs: &BeliefMap, map: &GridMap, p: Point2, threshold: f64) -> bool {
    BelievedMap {
        map,
        counts,
        beliefs,
        reflections: None,
        threshold,
    }
    .is_obstacle(p)
}

/// Longest safe drive along `heading` given the latest scan.
fn forward_clearance(scan: &Scan, heading: f64, margin: f64) -> f64 {
    scan.rays
        .iter()
        .filter(|r| normalize_angle(r.angle - heading).abs() <= CLEARANCE_CONE)
        .map(|r| scan.measured_range(r) - margin)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Mutable state of one exploration run.
pub struct HippState<'a> {
    map: &'a GridMap,
    config: HippConfig,
    pub pose: Pose,
    pub k: usize,
    pub counts: RayCountMap,
    pub beliefs: BeliefMap,
    pub reflections: ReflectionMap,
    pub travelled: f64,
    pub finished: bool,
    reachable: Vec<bool>,
    rng: ChaCha8Rng,
}

impl<'a> HippState<'a> {
    pub fn new(map: &'a GridMap, start: Pose, config: HippConfig) -> Result<Self> {
        config.validate()?;
        match map.cell_containing(start.position) {
            None => Err(Error::OutsideMap(start.position)),
            Some(c) if map.is_occupied(c) => Err(Error::InsideObstacle(start.position)),
            Some(c) => Ok(Self {
                map,
                pose: start,
                k: 0,
                counts: RayCountMap::new(map),
                beliefs: BeliefMap::unknown(map.width(), map.height()),
                reflections: ReflectionMap::new(map),
                travelled: 0.0,
                finished: false,
                reachable: reachable_cells(map, c),
                rng: ChaCha8Rng::seed_from_u64(config.seed),
                config,
            }),
        }
    }

    pub fn config(&self) -> &HippConfig {
        &self.config
    }

    pub fn identified_cells(&self) -> usize {
        self.counts
            .cells()
            .filter(|&c| self.counts.effective(c) >= self.config.confidence_count)
            .count()
    }

    pub fn confident_cells(&self) -> usize {
        self.map
            .free_cells()
            .filter(|&c| self.counts.effective(c) >= self.config.confidence_count)
            .count()
    }

    /// True while time remains and some reachable free cell is not yet
    /// identified.
    pub fn should_continue(&self) -> bool {
        !self.finished
            && self.k < self.config.max_steps()
            && self
                .map
                .free_cells()
                .any(|c| self.reachable[self.map.flat(c)] && self.counts.effective(c) < self.config.confidence_count)
    }

    /// Beliefs fed to the gain field. Sensed walls are taken as certainly
    /// occupied and identified cells as certainly free, so neither keeps
    /// attracting the robot.
    fn settled_beliefs(&self, believed: &BelievedMap) -> Result<BeliefMap> {
        let values = self
            .map
            .cells()
            .map(|c| {
                if believed.sensed_wall(c) {
                    1.0
                } else if self.counts.effective(c) >= self.config.confidence_count {
                    0.0
                } else {
                    self.beliefs.get(c)
                }
            })
            .collect();
        BeliefMap::from_values(self.map.width(), self.map.height(), values)
    }

    /// One loop body. Returns `None` (and marks the run finished) when no
    /// candidate cell is left.
    pub fn step(&mut self) -> Result<Option<StepRecord>> {
        let cfg = &self.config;
        let map = self.map;
        let scan = scan_uncertain(map, &self.pose, &cfg.sensor, &cfg.noise, &mut self.rng)?;
        self.counts.accumulate(map, &scan);
        self.reflections.record(map, &scan);
        self.beliefs = update_beliefs(&self.counts);
        let believed = BelievedMap {
            map,
            counts: &self.counts,
            beliefs: &self.beliefs,
            reflections: Some(&self.reflections),
            threshold: cfg.rrt.occupancy_threshold,
        };

        let field = gain_field(&self.settled_beliefs(&believed)?, self.pose.position, &cfg.gain, map);
        let mut candidates = candidate_cells(map, &self.counts, &self.beliefs);
        candidates.retain(|&c| !believed.cell_is_obstacle(c));
        let selected = match select_cells(&field, &cfg.gain, map, &candidates, &mut self.rng) {
            Ok(s) => s,
            Err(Error::ExplorationComplete) => {
                self.finished = true;
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let centers: Vec<Point2> = selected.iter().map(|&c| map.center(c)).collect();
        let tour = closed_tour(self.pose.position, &centers)?;
        let destination = centers[tour.order[1] - 1];

        let here = self.pose.position;
        let blocked = believed.is_obstacle_between(here, destination);
        let target = if blocked {
            let obstacle = |p: Point2| believed.is_obstacle_near(p, DETOUR_INFLATION);
            match rrt_star(here, destination, map.extent(), &obstacle, &cfg.rrt, &mut self.rng) {
                Ok(path) => path[1],
                // keep the current heading for one period
                Err(_) => here + Point2::from_polar(cfg.robot.max_step(), self.pose.heading),
            }
        } else {
            destination
        };

        let margin = cfg.clearance_margin();
        let (pose, wheels) =
            step_toward_limited(&self.pose, target, &cfg.robot, |h| forward_clearance(&scan, h, margin));
        if !map.line_of_sight(here, pose.position) {
            return Err(Error::Collision {
                step: self.k + 1,
                at: pose.position,
            });
        }
        self.travelled += here.distance(pose.position);
        self.pose = pose;
        self.k += 1;
        Ok(Some(StepRecord {
            k: self.k,
            pose,
            wheels,
            selected,
            destination,
            target,
            rrt_fallback: blocked,
            travelled: self.travelled,
            identified_cells: self.identified_cells(),
            confident_cells: self.confident_cells(),
        }))
    }

    pub fn into_trace(self, start: Pose, steps: Vec<StepRecord>) -> RunTrace {
        RunTrace {
            start,
            steps,
            completed: self.finished,
            counts: self.counts,
            beliefs: self.beliefs,
            reflections: self.reflections,
        }
    }
}

/// Runs the loop step by step; see [`HippState::step`].
pub fn hipp_step(state: &mut HippState<'_>) -> Result<Option<StepRecord>> {
    state.step()
}

/// Explores `map` from `start` (heading 0) until the mission time runs out or
/// every reachable free cell is identified.
pub fn run_hipp(map: &GridMap, start: Point2, config: &HippConfig) -> Result<RunTrace> {
    let start = Pose::new(start, 0.0);
    let mut state = HippState::new(map, start, config.clone())?;
    let mut steps = Vec::new();
    while state.should_continue() {
        match state.step()? {
            Some(rec) => steps.push(rec),
            None => break,
        }
    }
    Ok(state.into_trace(start, steps))
}
