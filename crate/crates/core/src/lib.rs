//! Grid-world toolkit for informative path planning.
//!
//! Two planners share the same world model:
//!
//! * [`hipp`] explores an unknown map with a noisy 72-ray range sensor. Each
//!   step it turns ray counts into occupancy beliefs, scores cells by the
//!   Shannon entropy of their neighborhood minus a distance penalty, picks a
//!   handful with an epsilon-greedy rule, orders them with a closed TSP tour
//!   and drives one sample period towards the first one (detouring with RRT*
//!   when the believed map shows an obstacle in between).
//! * [`benchmark`] remaps a known map: waypoints spread by the free-arc
//!   coverage controller over visibility-limited Voronoi cells, then an open
//!   TSP path from the start through all waypoints with a free destination.
//!
//! [`harness`] runs both over the built-in scenarios and reports travelled
//! distance, identified cells and cells per distance. Planners are looked up
//! by name through [`planner::PlannerRegistry`].

pub mod benchmark;
pub mod error;
pub mod gain;
pub mod harness;
pub mod hipp;
pub mod plan;
pub mod planner;
pub mod robot;
pub mod sensing;
pub mod world;

pub use error::{Error, MapParseError, Result};
pub use world::{load_map, Cell, CellIndex, GridMap, Point2};
