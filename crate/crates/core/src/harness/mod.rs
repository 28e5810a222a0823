//! Scenarios, repeated runs, metrics and output files.

mod config;
mod experiment;
mod metrics;
mod output;
mod scenarios;

use std::collections::VecDeque;

use crate::world::{Cell, GridMap};

pub use config::Settings;
pub use experiment::{run_experiment, ExperimentResult};
pub use metrics::{
    disc_coverage, equivalent_identified_cells, identified_cells, unmarked_free_cells, Aggregate, RunSummary, Stats,
    TimePoint, TimeSeries,
};
pub use output::{
    emit_outputs, read_path_csv, render_svg, run_dir_name, write_run, write_solution, write_summary, write_timeseries,
    write_trace,
};
pub use scenarios::{scenario, ScenarioSpec};

/// Ground-truth free cells 4-connected to `start`, indexed by flat position.
pub fn reachable_cells(map: &GridMap, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    if !map.is_free(start) {
        return seen;
    }
    seen[map.flat(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in map.neighbors4(c) {
            if map.is_free(n) && !seen[map.flat(n)] {
                seen[map.flat(n)] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}
