//! Planners behind one interface, looked up by name.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benchmark::{solve_posterior, PosteriorSolution};
use crate::error::{Error, Result};
use crate::harness::{
    disc_coverage, equivalent_identified_cells, identified_cells, unmarked_free_cells, RunSummary, ScenarioSpec,
    Settings, TimeSeries,
};
use crate::hipp::{run_hipp, RunTrace};
use crate::world::{Cell, Point2};

/// Poses of a posterior replay are at most this far apart, cell widths.
pub const REPLAY_SPACING: f64 = 1.0;

#[derive(Debug, Clone)]
pub enum RunDetail {
    Hipp(Box<RunTrace>),
    Posterior(Box<PosteriorSolution>),
}

/// Everything one seeded run produced.
#[derive(Debug, Clone)]
pub struct PlannerRun {
    pub summary: RunSummary,
    pub timeseries: TimeSeries,
    /// Executed poses from the start, cell widths.
    pub path: Vec<Point2>,
    /// Free cells the run left unidentified.
    pub missed: Vec<Cell>,
    pub detail: RunDetail,
}

pub trait Planner: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, scenario: &ScenarioSpec, seed: u64) -> Result<PlannerRun>;
}

/// Online exploration of an unknown map.
#[derive(Debug, Clone, Default)]
pub struct HippPlanner {
    pub settings: Settings,
}

impl Planner for HippPlanner {
    fn name(&self) -> &'static str {
        "hipp"
    }

    fn run(&self, scenario: &ScenarioSpec, seed: u64) -> Result<PlannerRun> {
        let map = &scenario.map;
        let config = self.settings.hipp(seed);
        let trace = run_hipp(map, scenario.start_point(), &config)?;
        let path: Vec<Point2> = trace.positions().collect();
        let identified = identified_cells(&trace.counts, config.confidence_count);
        let identified_free = map
            .free_cells()
            .filter(|&c| trace.counts.effective(c) >= config.confidence_count)
            .count();
        let equivalent = equivalent_identified_cells(&trace, map, config.sensor.range);
        let summary = RunSummary::new(
            seed,
            trace.steps.len(),
            trace.travelled(),
            map.cell_width(),
            identified,
            identified_free,
            equivalent,
        );
        let timeseries = TimeSeries::from_cumulative(
            trace
                .steps
                .iter()
                .map(|s| (s.k, s.identified_cells, map.to_meters(s.travelled))),
        );
        let missed = map
            .free_cells()
            .filter(|&c| trace.counts.effective(c) < config.confidence_count)
            .collect();
        Ok(PlannerRun {
            summary,
            timeseries,
            path,
            missed,
            detail: RunDetail::Hipp(Box::new(trace)),
        })
    }
}

/// Remapping benchmark on the known map, replayed with the ideal sensor.
#[derive(Debug, Clone, Default)]
pub struct PosteriorPlanner {
    pub settings: Settings,
}

impl Planner for PosteriorPlanner {
    fn name(&self) -> &'static str {
        "posterior"
    }

    fn run(&self, scenario: &ScenarioSpec, seed: u64) -> Result<PlannerRun> {
        let map = &scenario.map;
        let params = self.settings.posterior(map);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let solution = solve_posterior(map, scenario.start_point(), &params, &mut rng)?;
        let poses = solution.densified(REPLAY_SPACING);

        let mut seen = vec![false; map.len()];
        let mut covered = 0;
        let mut travelled = 0.0;
        let mut samples = Vec::with_capacity(poses.len());
        for (k, &p) in poses.iter().enumerate() {
            if k > 0 {
                travelled += poses[k - 1].distance(p);
            }
            for c in map.disc_cells(p, params.range) {
                let i = map.flat(c);
                if !seen[i] {
                    seen[i] = true;
                    covered += 1;
                }
            }
            samples.push((k, covered, map.to_meters(travelled)));
        }
        debug_assert_eq!(seen, disc_coverage(map, &poses, params.range));

        let summary = RunSummary::new(
            seed,
            solution.route.len() - 1,
            solution.length(),
            map.cell_width(),
            covered,
            covered,
            covered,
        );
        Ok(PlannerRun {
            summary,
            timeseries: TimeSeries::from_cumulative(samples),
            path: solution.route.clone(),
            missed: unmarked_free_cells(map, &seen),
            detail: RunDetail::Posterior(Box::new(solution)),
        })
    }
}

/// Planners by name.
pub struct PlannerRegistry {
    planners: BTreeMap<&'static str, Box<dyn Planner>>,
}

impl PlannerRegistry {
    pub fn empty() -> Self {
        Self {
            planners: BTreeMap::new(),
        }
    }

    /// The two built-in planners sharing `settings`.
    pub fn with_defaults(settings: &Settings) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(HippPlanner {
            settings: settings.clone(),
        }));
        r.register(Box::new(PosteriorPlanner {
            settings: settings.clone(),
        }));
        r
    }

    /// Replaces any planner of the same name.
    pub fn register(&mut self, planner: Box<dyn Planner>) {
        self.planners.insert(planner.name(), planner);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Planner> {
        self.planners
            .get(name)
            .map(|p| p.as_ref())
            .ok_or_else(|| Error::UnknownPlanner(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.planners.keys().copied().collect()
    }
}

impl Default for PlannerRegistry {
    fn default() -> Self {
        Self::with_defaults(&Settings::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario;

    struct Idle;

    impl Planner for Idle {
        fn name(&self) -> &'static str {
            "hipp"
        }

        fn run(&self, _: &ScenarioSpec, _: u64) -> Result<PlannerRun> {
            Err(Error::EmptyPoints)
        }
    }

    #[test]
    fn lookup_by_name() {
        let r = PlannerRegistry::default();
        assert_eq!(r.names(), vec!["hipp", "posterior"]);
        assert_eq!(r.get("posterior").unwrap().name(), "posterior");
        assert!(matches!(r.get("astar"), Err(Error::UnknownPlanner(n)) if n == "astar"));
    }

    #[test]
    fn register_replaces_same_name() {
        let mut r = PlannerRegistry::default();
        r.register(Box::new(Idle));
        let s = scenario(1).unwrap();
        assert!(matches!(r.get("hipp").unwrap().run(&s, 0), Err(Error::EmptyPoints)));
    }

    #[test]
    fn posterior_summary_matches_replay() {
        let s = scenario(3).unwrap();
        let run = PosteriorPlanner::default().run(&s, 2).unwrap();
        let RunDetail::Posterior(sol) = &run.detail else {
            panic!("wrong detail");
        };
        let replay = disc_coverage(&s.map, &sol.densified(REPLAY_SPACING), 1.5);
        let n = replay.iter().filter(|&&b| b).count();
        assert_eq!(run.summary.identified_cells, n);
        assert_eq!(run.summary.equivalent_cells, n);
        assert_eq!(run.missed.len(), s.map.free_count() - n);
        assert_eq!(run.timeseries.points.last().unwrap().identified_cells, n);
        assert!((run.summary.ttd_m - 0.5 * sol.length()).abs() < 1e-9);
    }

    #[test]
    fn hipp_summary_is_consistent() {
        let s = scenario(2).unwrap();
        let settings = Settings {
            mission_time: 30.0,
            ..Settings::default()
        };
        let run = HippPlanner { settings }.run(&s, 1).unwrap();
        assert_eq!(run.summary.steps, 30);
        assert_eq!(run.timeseries.len(), 30);
        assert_eq!(run.path.len(), 31);
        assert!(run.summary.identified_free_cells <= run.summary.identified_cells);
        assert_eq!(run.missed.len(), s.map.free_count() - run.summary.identified_free_cells);
        assert!(run.summary.equivalent_cells <= s.map.free_count());
    }
}
