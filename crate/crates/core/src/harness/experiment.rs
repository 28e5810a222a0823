use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::{Aggregate, RunSummary, ScenarioSpec};
use crate::planner::{Planner, PlannerRun};
use crate::world::GridMap;

/// All runs of one planner on one scenario, in seed order.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub planner: String,
    pub scenario: String,
    pub map: GridMap,
    pub runs: Vec<PlannerRun>,
    pub aggregate: Aggregate,
}

impl ExperimentResult {
    pub fn summaries(&self) -> Vec<RunSummary> {
        self.runs.iter().map(|r| r.summary.clone()).collect()
    }
}

/// Runs seeds `base_seed .. base_seed + n_runs` in parallel. The first failing
/// seed, in seed order, aborts the experiment.
pub fn run_experiment(
    planner: &dyn Planner,
    scenario: &ScenarioSpec,
    n_runs: usize,
    base_seed: u64,
) -> Result<ExperimentResult> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("an experiment needs at least one run".into()));
    }
    let outcomes: Vec<(u64, Result<PlannerRun>)> = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed + i;
            (seed, planner.run(scenario, seed))
        })
        .collect();
    let mut runs = Vec::with_capacity(n_runs);
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(run) => runs.push(run),
            Err(e) => {
                return Err(Error::RunFailed {
                    seed,
                    source: Box::new(e),
                })
            }
        }
    }
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    Ok(ExperimentResult {
        planner: planner.name().to_string(),
        scenario: scenario.name.clone(),
        map: scenario.map.clone(),
        aggregate: Aggregate::of(&summaries),
        runs,
    })
}
