use crate::error::{Error, Result};
use crate::world::{load_map, Cell, GridMap, Point2};

const SCENARIO_TEXT: [&str; 3] = [
    include_str!("../../scenarios/scenario1.map"),
    include_str!("../../scenarios/scenario2.map"),
    include_str!("../../scenarios/scenario3.map"),
];

/// A map plus the pose a run starts from.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub map: GridMap,
    pub start: Cell,
}

impl ScenarioSpec {
    /// Starts from the lowest-numbered free cell, which for the built-ins is
    /// the bottom-left corner.
    pub fn from_map(name: impl Into<String>, map: GridMap) -> Result<Self> {
        let start = first_free_cell(&map).ok_or_else(|| Error::InvalidParameter("map has no free cell".into()))?;
        Ok(Self {
            name: name.into(),
            map,
            start,
        })
    }

    pub fn start_point(&self) -> Point2 {
        self.map.center(self.start)
    }
}

fn first_free_cell(map: &GridMap) -> Option<Cell> {
    map.free_cells().min_by_key(|&c| map.index_of(c))
}

/// Built-in scenario 1, 2 or 3.
pub fn scenario(number: usize) -> Result<ScenarioSpec> {
    let text = SCENARIO_TEXT
        .get(number.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidParameter(format!("no built-in scenario {number}; choose 1, 2 or 3")))?;
    ScenarioSpec::from_map(format!("scenario{number}"), load_map(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_expected_free_cells() {
        let counts: Vec<usize> = (1..=3).map(|n| scenario(n).unwrap().map.free_count()).collect();
        assert_eq!(counts, vec![400, 355, 346]);
        for n in 1..=3 {
            let s = scenario(n).unwrap();
            assert_eq!((s.map.width(), s.map.height()), (20, 20));
            assert_eq!(s.start, Cell::new(0, 0));
        }
    }

    #[test]
    fn builtins_are_connected() {
        for n in 1..=3 {
            let s = scenario(n).unwrap();
            let reach = crate::harness::reachable_cells(&s.map, s.start);
            assert_eq!(reach.iter().filter(|&&r| r).count(), s.map.free_count(), "scenario {n}");
        }
    }

    #[test]
    fn unknown_scenario_rejected() {
        assert!(scenario(0).is_err());
        assert!(scenario(4).is_err());
    }
}
