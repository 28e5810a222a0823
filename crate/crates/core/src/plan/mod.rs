//! Tour ordering, line-of-sight distance closure and sampling-based local
//! planning.

mod closure;
mod rrt;
mod tsp;

pub use closure::{metric_closure, MetricClosure};
pub use rrt::{rrt_star, segment_is_free, RrtFailure, RrtParams};
pub use tsp::{
    closed_tour, open_path_best_destination, solver_for, DistanceMatrix, HeldKarp, LocalSearch, Tour, TourKind,
    TourSolver, EXACT_VERTEX_LIMIT,
};
