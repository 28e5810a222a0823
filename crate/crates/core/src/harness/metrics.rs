use serde::Serialize;

use crate::hipp::RunTrace;
use crate::sensing::RayCountMap;
use crate::world::{Cell, GridMap, Point2};

/// Cells scanned at least `threshold` times.
pub fn identified_cells(rc: &RayCountMap, threshold: i32) -> usize {
    rc.cells().filter(|&c| rc.effective(c) >= threshold).count()
}

/// Flags of the cells an ideal disc sensor would see from any of `poses`.
pub fn disc_coverage(map: &GridMap, poses: &[Point2], range: f64) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    for &p in poses {
        if map.is_free_point(p) {
            for c in map.disc_cells(p, range) {
                seen[map.flat(c)] = true;
            }
        }
    }
    seen
}

/// Cells an ideal disc sensor would identify along the trace, start pose
/// included.
pub fn equivalent_identified_cells(trace: &RunTrace, map: &GridMap, range: f64) -> usize {
    disc_coverage(map, &trace.positions().collect::<Vec<_>>(), range)
        .iter()
        .filter(|&&s| s)
        .count()
}

/// Cells that `flags` leaves unmarked and that are free in ground truth.
pub fn unmarked_free_cells(map: &GridMap, flags: &[bool]) -> Vec<Cell> {
    map.free_cells().filter(|&c| !flags[map.flat(c)]).collect()
}

/// One row of the results table. Distances are in meters; the `_w` rates
/// divide by cell widths instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub steps: usize,
    pub ttd_m: f64,
    pub identified_cells: usize,
    /// Identified cells that are free in ground truth.
    pub identified_free_cells: usize,
    pub cells_per_td: f64,
    pub equivalent_cells: usize,
    pub equivalent_cells_per_td: f64,
    pub cell_width: f64,
}

impl RunSummary {
    /// `ttd` in cell widths. Rates are zero when nothing was travelled.
    pub fn new(
        seed: u64,
        steps: usize,
        ttd: f64,
        cell_width: f64,
        identified_cells: usize,
        identified_free_cells: usize,
        equivalent_cells: usize,
    ) -> Self {
        let ttd_m = ttd * cell_width;
        let rate = |n: usize| if ttd_m > 0.0 { n as f64 / ttd_m } else { 0.0 };
        Self {
            seed,
            steps,
            ttd_m,
            identified_cells,
            identified_free_cells,
            cells_per_td: rate(identified_cells),
            equivalent_cells,
            equivalent_cells_per_td: rate(equivalent_cells),
            cell_width,
        }
    }

    pub fn cells_per_td_w(&self) -> f64 {
        self.cells_per_td * self.cell_width
    }

    pub fn equivalent_cells_per_td_w(&self) -> f64 {
        self.equivalent_cells_per_td * self.cell_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimePoint {
    pub k: usize,
    /// Cumulative identified cells.
    pub identified_cells: usize,
    /// Cumulative distance, meters.
    pub distance_m: f64,
    /// Cells gained per meter over the last step; zero for a standstill.
    pub cells_per_m: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TimeSeries {
    pub points: Vec<TimePoint>,
}

impl TimeSeries {
    /// Builds from cumulative `(k, cells, meters)` samples.
    pub fn from_cumulative(samples: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut points: Vec<TimePoint> = Vec::new();
        for (k, cells, dist) in samples {
            let (prev_cells, prev_dist) = points.last().map_or((0, 0.0), |p| (p.identified_cells, p.distance_m));
            let dd = dist - prev_dist;
            let cells_per_m = if dd > 0.0 {
                (cells as f64 - prev_cells as f64) / dd
            } else {
                0.0
            };
            points.push(TimePoint {
                k,
                identified_cells: cells,
                distance_m: dist,
                cells_per_m,
            });
        }
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coefficient of determination of the least-squares line of
    /// identified cells against step over the first `fraction` of points.
    pub fn linearity(&self, fraction: f64) -> f64 {
        let n = ((self.points.len() as f64) * fraction).floor() as usize;
        let pts = &self.points[..n.min(self.points.len())];
        if pts.len() < 2 {
            return 1.0;
        }
        let m = pts.len() as f64;
        let xs: Vec<f64> = pts.iter().map(|p| p.k as f64).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.identified_cells as f64).collect();
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if syy == 0.0 {
            return 1.0;
        }
        if sxx == 0.0 {
            return 0.0;
        }
        sxy * sxy / (sxx * syy)
    }
}

/// Mean, sample standard deviation and median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                median: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Self { mean, std, median }
    }

    /// Standard deviation over mean.
    pub fn cv(&self) -> f64 {
        self.std / self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub steps: Stats,
    pub ttd_m: Stats,
    pub identified_cells: Stats,
    pub identified_free_cells: Stats,
    pub cells_per_td: Stats,
    pub equivalent_cells: Stats,
    pub equivalent_cells_per_td: Stats,
}

impl Aggregate {
    pub fn of(runs: &[RunSummary]) -> Self {
        let col = |f: fn(&RunSummary) -> f64| Stats::of(&runs.iter().map(f).collect::<Vec<_>>());
        Self {
            steps: col(|r| r.steps as f64),
            ttd_m: col(|r| r.ttd_m),
            identified_cells: col(|r| r.identified_cells as f64),
            identified_free_cells: col(|r| r.identified_free_cells as f64),
            cells_per_td: col(|r| r.cells_per_td),
            equivalent_cells: col(|r| r.equivalent_cells as f64),
            equivalent_cells_per_td: col(|r| r.equivalent_cells_per_td),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hipp::{ReflectionMap, StepRecord};
    use crate::robot::{Pose, WheelSpeeds};
    use crate::sensing::BeliefMap;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn trace_at(map: &GridMap, poses: &[Point2]) -> RunTrace {
        let steps = poses[1..]
            .iter()
            .enumerate()
            .map(|(k, &p)| StepRecord {
                k: k + 1,
                pose: Pose::new(p, 0.0),
                wheels: WheelSpeeds::default(),
                selected: Vec::new(),
                destination: p,
                target: p,
                rrt_fallback: false,
                travelled: 0.0,
                identified_cells: 0,
                confident_cells: 0,
            })
            .collect();
        RunTrace {
            start: Pose::new(poses[0], 0.0),
            steps,
            counts: RayCountMap::new(map),
            beliefs: BeliefMap::unknown(map.width(), map.height()),
            reflections: ReflectionMap::new(map),
            completed: false,
        }
    }

    #[test]
    fn fresh_counts_identify_nothing() {
        let map = GridMap::open(5, 5, 0.5).unwrap();
        assert_eq!(identified_cells(&RayCountMap::new(&map), 14), 0);
    }

    #[test]
    fn fully_scanned_scenarios_identify_every_free_cell() {
        for (n, expect) in [(1, 400), (2, 355), (3, 346)] {
            let map = crate::harness::scenario(n).unwrap().map;
            let mut rc = RayCountMap::new(&map);
            for c in map.free_cells() {
                for _ in 0..72 {
                    rc.increment(c);
                }
            }
            assert_eq!(identified_cells(&rc, 14), expect);
        }
    }

    #[test]
    fn threshold_step_drops_cells_at_exactly_fourteen() {
        let map = GridMap::open(4, 1, 0.5).unwrap();
        let mut rc = RayCountMap::new(&map);
        for (col, n) in [(0, 14), (1, 15), (2, 13), (3, 14)] {
            for _ in 0..n {
                rc.increment(Cell::new(0, col));
            }
        }
        assert_eq!(identified_cells(&rc, 14) - identified_cells(&rc, 15), 2);
    }

    #[test]
    fn equivalent_cells_of_single_and_repeated_pose() {
        let map = GridMap::open(10, 10, 0.5).unwrap();
        let p = Point2::new(4.5, 4.5);
        assert_eq!(equivalent_identified_cells(&trace_at(&map, &[p]), &map, 1.5), 9);
        assert_eq!(equivalent_identified_cells(&trace_at(&map, &[p, p]), &map, 1.5), 9);
    }

    #[test]
    fn visiting_every_center_covers_the_map() {
        let map = crate::harness::scenario(3).unwrap().map;
        let poses: Vec<Point2> = map.free_cells().map(|c| map.center(c)).collect();
        assert_eq!(equivalent_identified_cells(&trace_at(&map, &poses), &map, 1.5), 346);
    }

    #[test]
    fn rates_reproduce_counts() {
        let s = RunSummary::new(3, 10, 37.3, 0.5, 211, 200, 190);
        assert_abs_diff_eq!(s.cells_per_td * s.ttd_m, 211.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.equivalent_cells_per_td * s.ttd_m, 190.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.cells_per_td_w(), 211.0 / 37.3, epsilon = 1e-12);
    }

    #[test]
    fn single_run_aggregate_has_zero_spread() {
        let s = RunSummary::new(0, 5, 10.0, 0.5, 50, 50, 40);
        let a = Aggregate::of(std::slice::from_ref(&s));
        assert_eq!(a.cells_per_td.mean, s.cells_per_td);
        assert_eq!(a.cells_per_td.median, s.cells_per_td);
        assert_eq!(a.cells_per_td.std, 0.0);
    }

    #[test]
    fn time_series_rates() {
        let ts = TimeSeries::from_cumulative([(1, 5, 0.5), (2, 5, 0.5), (3, 9, 1.5)]);
        let r: Vec<f64> = ts.points.iter().map(|p| p.cells_per_m).collect();
        assert_eq!(r, vec![10.0, 0.0, 4.0]);
        let line = TimeSeries::from_cumulative((1..=20).map(|k| (k, 3 * k, k as f64)));
        assert_abs_diff_eq!(line.linearity(0.6), 1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn stats_match_streaming_pass(values in prop::collection::vec(-1e3..1e3f64, 1..40)) {
            let s = Stats::of(&values);
            // Welford
            let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for &v in &values {
                n += 1.0;
                let d = v - mean;
                mean += d / n;
                m2 += d * (v - mean);
            }
            let std = if values.len() > 1 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
            prop_assert!((s.mean - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
            prop_assert!((s.std - std).abs() <= 1e-9 * (1.0 + std));
            let below = values.iter().filter(|&&v| v < s.median).count();
            let above = values.iter().filter(|&&v| v > s.median).count();
            prop_assert!(below <= values.len() / 2 && above <= values.len() / 2);
        }
    }
}
