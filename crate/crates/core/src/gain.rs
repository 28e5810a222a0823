//! Mapping-gain field and epsilon-greedy destination selection.
//!
//! A cell's raw score is the Shannon entropy of its belief minus a linear
//! penalty on its distance from the robot. The field is that score summed over
//! the 3x3 neighborhood (zero outside the map), so cells surrounded by
//! uncertain cells win over isolated ones.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::{BeliefMap, RayCountMap};
use crate::world::{Cell, GridMap, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    /// Gain lost per cell width of distance from the robot.
    pub beta_distance: f64,
    /// Probability of filling a slot with a random candidate.
    pub epsilon_greedy: f64,
    /// Cells chosen per step.
    pub top_k: usize,
}

impl Default for GainParams {
    fn default() -> Self {
        Self {
            beta_distance: 0.05,
            epsilon_greedy: 0.1,
            top_k: 5,
        }
    }
}

impl GainParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta_distance) || !(0.0..=1.0).contains(&self.epsilon_greedy) || self.top_k == 0
        {
            return Err(Error::InvalidParameter(format!("bad gain parameters: {self:?}")));
        }
        Ok(())
    }
}

/// Binary Shannon entropy in bits.
pub fn cell_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GainField {
    pub fn get(&self, cell: Cell) -> f64 {
        self.values[cell.row * self.width + cell.col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// Entropy-minus-distance score convolved with a 3x3 box of ones.
pub fn gain_field(beliefs: &BeliefMap, robot: Point2, params: &GainParams, map: &GridMap) -> GainField {
    let (w, h) = (beliefs.width(), beliefs.height());
    debug_assert_eq!((w, h), (map.width(), map.height()));
    let raw: Vec<f64> = (0..w * h)
        .map(|i| {
            let cell = Cell::new(i / w, i % w);
            let entropy = cell_entropy(beliefs.get(cell)).expect("beliefs are probabilities");
            entropy - params.beta_distance * map.center(cell).distance(robot)
        })
        .collect();
    let mut values = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut sum = 0.0;
            for r in row.saturating_sub(1)..=(row + 1).min(h - 1) {
                for c in col.saturating_sub(1)..=(col + 1).min(w - 1) {
                    sum += raw[r * w + c];
                }
            }
            values[row * w + col] = sum;
        }
    }
    GainField {
        width: w,
        height: h,
        values,
    }
}

/// Beliefs at or below this count as fully known.
const KNOWN_TOLERANCE: f64 = 1e-6;

/// Cells worth driving to: partially known cells (belief strictly between 0
/// and 1) and unobserved cells bordering an observed one.
pub fn candidate_cells(map: &GridMap, counts: &RayCountMap, beliefs: &BeliefMap) -> Vec<Cell> {
    map.cells()
        .filter(|&c| {
            let p = beliefs.get(c);
            if p > KNOWN_TOLERANCE && p < 1.0 {
                return true;
            }
            !counts.is_observed(c) && map.neighbors8(c).any(|n| counts.is_observed(n))
        })
        .collect()
}

/// Picks up to `top_k` distinct candidates. Each slot takes the best remaining
/// candidate (ties to the lower serpentine index) with probability `1 - eps`
/// and a uniformly random remaining one otherwise.
pub fn select_cells<R: Rng + ?Sized>(
    field: &GainField,
    params: &GainParams,
    map: &GridMap,
    candidates: &[Cell],
    rng: &mut R,
) -> Result<Vec<Cell>> {
    if candidates.is_empty() {
        return Err(Error::ExplorationComplete);
    }
    let mut pool = candidates.to_vec();
    pool.sort_by(|&a, &b| {
        field
            .get(b)
            .total_cmp(&field.get(a))
            .then_with(|| map.index_of(a).cmp(&map.index_of(b)))
    });
    let k = params.top_k.min(pool.len());
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let pick = if rng.gen_bool(params.epsilon_greedy) {
            rng.gen_range(0..pool.len())
        } else {
            0
        };
        chosen.push(pool.remove(pick));
    }
    Ok(chosen)
}
