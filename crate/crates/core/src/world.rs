//! Ground-truth occupancy grid and the 2D geometry every other module builds on.
//!
//! All coordinates are in cell-width units: cell `(row, col)` covers the
//! half-open square `[col, col + 1) x [row, row + 1)`, with row 0 at the
//! bottom of the map. `GridMap::cell_width` converts to meters for reporting.
//!
//! Cells carry two numberings. `Cell` is the plain `(row, col)` pair used for
//! storage. `CellIndex` is the 1-based serpentine (boustrophedon) number: row 0
//! runs left to right, row 1 right to left, and so on.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MapParseError, Result};

/// Tolerance used for "within range" comparisons on cell-center distances.
pub const DISTANCE_TOLERANCE: f64 = 1e-9;

/// Two crossing parameters closer than this count as a simultaneous (corner) crossing.
const CORNER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(length: f64, angle: f64) -> Self {
        Self::new(length * angle.cos(), length * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Angle of the vector from `self` towards `other`.
    pub fn bearing_to(self, other: Point2) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Grid coordinate of a cell. Row 0 is the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// True when the two cells share an edge or a corner.
    pub fn touches(self, other: Cell) -> bool {
        self != other && self.row.abs_diff(other.row) <= 1 && self.col.abs_diff(other.col) <= 1
    }
}

/// 1-based boustrophedon cell number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(usize);

impl CellIndex {
    pub fn new(j: usize) -> Option<Self> {
        (j >= 1).then_some(Self(j))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

/// How a ray traversal ended.
#[derive(Debug, Clone, Copy, PartialEq)]
enum WalkEnd {
    /// Reached the end of the segment.
    Completed,
    /// Crossed the map border at parameter `t`.
    LeftMap(f64),
    /// The visitor asked to stop.
    Stopped,
}

/// Result of casting a ray against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayCast {
    /// Distance to the first obstacle face or the border, or the full range.
    pub distance: f64,
    /// False when nothing was within range.
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_width: f64,
    occupied: Vec<bool>,
}

impl GridMap {
    /// An obstacle-free map.
    pub fn open(width: usize, height: usize, cell_width: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "map dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(cell_width > 0.0 && cell_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cell width must be positive, got {cell_width}"
            )));
        }
        Ok(Self {
            width,
            height,
            cell_width,
            occupied: vec![false; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// Total number of cells, N.
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major storage offset of a cell.
    pub fn flat(&self, cell: Cell) -> usize {
        debug_assert!(cell.row < self.height && cell.col < self.width);
        cell.row * self.width + cell.col
    }

    pub fn cell_at(&self, flat: usize) -> Cell {
        Cell::new(flat / self.width, flat % self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell_at(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|&c| self.is_free(c))
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| !o).count()
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.occupied[self.flat(cell)]
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.is_occupied(cell)
    }

    pub fn set_occupied(&mut self, cell: Cell, occupied: bool) {
        let i = self.flat(cell);
        self.occupied[i] = occupied;
    }

    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    /// 4-neighbors and diagonal neighbors inside the map.
    pub fn neighbors8(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (r, c) = (cell.row as i64, cell.col as i64);
        (-1..=1_i64)
            .flat_map(move |dr| (-1..=1_i64).map(move |dc| (r + dr, c + dc)))
            .filter(move |&(rr, cc)| (rr, cc) != (r, c) && self.in_bounds(rr, cc))
            .map(|(rr, cc)| Cell::new(rr as usize, cc as usize))
    }

    pub fn neighbors4(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (r, c) = (cell.row as i64, cell.col as i64);
        [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter(move |&(rr, cc)| self.in_bounds(rr, cc))
            .map(|(rr, cc)| Cell::new(rr as usize, cc as usize))
    }

    pub fn index_of(&self, cell: Cell) -> CellIndex {
        let offset = if cell.row.is_multiple_of(2) {
            cell.col
        } else {
            self.width - 1 - cell.col
        };
        CellIndex(cell.row * self.width + offset + 1)
    }

    pub fn cell_of(&self, index: CellIndex) -> Result<Cell> {
        let j = index.get();
        if j == 0 || j > self.len() {
            return Err(Error::CellOutOfRange(j));
        }
        let row = (j - 1) / self.width;
        let offset = (j - 1) % self.width;
        let col = if row.is_multiple_of(2) {
            offset
        } else {
            self.width - 1 - offset
        };
        Ok(Cell::new(row, col))
    }

    pub fn center(&self, cell: Cell) -> Point2 {
        Point2::new(cell.col as f64 + 0.5, cell.row as f64 + 0.5)
    }

    pub fn cell_center(&self, index: CellIndex) -> Result<Point2> {
        Ok(self.center(self.cell_of(index)?))
    }

    /// Cell containing `p` under the half-open convention.
    pub fn cell_containing(&self, p: Point2) -> Option<Cell> {
        if !p.is_finite() {
            return None;
        }
        let (col, row) = (p.x.floor() as i64, p.y.floor() as i64);
        self.in_bounds(row, col).then(|| Cell::new(row as usize, col as usize))
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.cell_containing(p).is_some()
    }

    /// Inside the map and not inside an occupied cell.
    pub fn is_free_point(&self, p: Point2) -> bool {
        self.cell_containing(p).is_some_and(|c| self.is_free(c))
    }

    /// Upper corner of the map in cell-width units.
    pub fn extent(&self) -> Point2 {
        Point2::new(self.width as f64, self.height as f64)
    }

    pub fn to_meters(&self, length: f64) -> f64 {
        length * self.cell_width
    }

    /// Grid DDA over the segment `origin -> endpoint`.
    ///
    /// Visits every cell containing a point of the segment, in order, with the
    /// parameter at which the segment enters it. Boundary points belong to the
    /// cell above/right of them, so a crossing in a positive direction happens
    /// at the boundary and a crossing in a negative direction just after it.
    /// With `closed_end == false` the endpoint itself is excluded.
    fn walk(
        &self,
        origin: Point2,
        endpoint: Point2,
        closed_end: bool,
        mut visit: impl FnMut(Cell, f64) -> bool,
    ) -> WalkEnd {
        let Some(start) = self.cell_containing(origin) else {
            return WalkEnd::LeftMap(0.0);
        };
        if !visit(start, 0.0) {
            return WalkEnd::Stopped;
        }
        let d = endpoint - origin;
        // an open end also drops cells entered within rounding of the endpoint
        let end_t = if closed_end { 1.0 } else { 1.0 - DISTANCE_TOLERANCE };
        let (mut cx, mut cy) = (start.col as i64, start.row as i64);
        let crossing = |c: i64, o: f64, dv: f64| -> f64 {
            if dv > 0.0 {
                ((c + 1) as f64 - o) / dv
            } else if dv < 0.0 {
                (c as f64 - o) / dv
            } else {
                f64::INFINITY
            }
        };
        loop {
            let tx = crossing(cx, origin.x, d.x);
            let ty = crossing(cy, origin.y, d.y);
            let t = tx.min(ty);
            if t > 1.0 {
                return WalkEnd::Completed;
            }
            let x_hit = (tx - t).abs() <= CORNER_TOLERANCE;
            let y_hit = (ty - t).abs() <= CORNER_TOLERANCE;
            let step_pos_x = x_hit && d.x > 0.0;
            let step_pos_y = y_hit && d.y > 0.0;
            let step_neg_x = x_hit && d.x < 0.0;
            let step_neg_y = y_hit && d.y < 0.0;

            if step_pos_x || step_pos_y {
                let reached = if closed_end { t <= 1.0 } else { t < end_t };
                if !reached {
                    return WalkEnd::Completed;
                }
                cx += step_pos_x as i64;
                cy += step_pos_y as i64;
                if !self.in_bounds(cy, cx) {
                    return WalkEnd::LeftMap(t);
                }
                if !visit(Cell::new(cy as usize, cx as usize), t) {
                    return WalkEnd::Stopped;
                }
            }
            if step_neg_x || step_neg_y {
                if t >= end_t {
                    return WalkEnd::Completed;
                }
                cx -= step_neg_x as i64;
                cy -= step_neg_y as i64;
                if !self.in_bounds(cy, cx) {
                    return WalkEnd::LeftMap(t);
                }
                if !visit(Cell::new(cy as usize, cx as usize), t) {
                    return WalkEnd::Stopped;
                }
            }
        }
    }

    /// Cells touched by the closed segment `origin -> endpoint`, clipped at the
    /// map border. An origin outside the map yields no cells.
    pub fn traverse_ray(&self, origin: Point2, endpoint: Point2) -> Vec<Cell> {
        let mut out = Vec::new();
        self.walk(origin, endpoint, true, |c, _| {
            out.push(c);
            true
        });
        out
    }

    /// Like [`traverse_ray`](Self::traverse_ray) but over `[origin, endpoint)`:
    /// a cell touched only by the endpoint is not included. This is the set a
    /// sensor pulse passes through before reflecting at `endpoint`.
    pub fn traverse_ray_open(&self, origin: Point2, endpoint: Point2) -> Vec<Cell> {
        let mut out = Vec::new();
        self.walk(origin, endpoint, false, |c, _| {
            out.push(c);
            true
        });
        out
    }

    pub fn line_of_sight(&self, a: Point2, b: Point2) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        let mut clear = true;
        let end = self.walk(a, b, true, |c, _| {
            clear = self.is_free(c);
            clear
        });
        clear && end == WalkEnd::Completed
    }

    /// Distance along `angle` from `origin` to the first obstacle face or the
    /// map border, capped at `max_range`.
    pub fn cast_ray(&self, origin: Point2, angle: f64, max_range: f64) -> RayCast {
        let endpoint = origin + Point2::from_polar(max_range, angle);
        let mut hit_t = None;
        let end = self.walk(origin, endpoint, true, |c, t| {
            if self.is_occupied(c) {
                hit_t = Some(t);
                false
            } else {
                true
            }
        });
        match (hit_t, end) {
            (Some(t), _) | (None, WalkEnd::LeftMap(t)) => RayCast {
                distance: t * max_range,
                hit: true,
            },
            _ => RayCast {
                distance: max_range,
                hit: false,
            },
        }
    }

    /// Cells whose centers lie within `radius` of `center`, ignoring obstacles.
    pub fn disc_cells_euclidean(&self, center: Point2, radius: f64) -> Vec<Cell> {
        let r = radius.max(0.0);
        let row_lo = (center.y - r - 0.5).floor().max(0.0) as usize;
        let col_lo = (center.x - r - 0.5).floor().max(0.0) as usize;
        let row_hi = ((center.y + r - 0.5).ceil().max(-1.0) as i64).min(self.height as i64 - 1);
        let col_hi = ((center.x + r - 0.5).ceil().max(-1.0) as i64).min(self.width as i64 - 1);
        let mut out = Vec::new();
        if row_hi < 0 || col_hi < 0 {
            return out;
        }
        for row in row_lo..=row_hi as usize {
            for col in col_lo..=col_hi as usize {
                let cell = Cell::new(row, col);
                if self.center(cell).distance(center) <= r + DISTANCE_TOLERANCE {
                    out.push(cell);
                }
            }
        }
        out
    }

    /// Range-limited visibility disc: cells whose centers are within `radius`
    /// of `center` and in line of sight from it.
    pub fn disc_cells(&self, center: Point2, radius: f64) -> Vec<Cell> {
        self.disc_cells_euclidean(center, radius)
            .into_iter()
            .filter(|&c| self.line_of_sight(center, self.center(c)))
            .collect()
    }

    /// Text form accepted by [`load_map`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.width, self.height, self.cell_width);
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                s.push(if self.is_occupied(Cell::new(row, col)) {
                    '#'
                } else {
                    '.'
                });
            }
            s.push('\n');
        }
        s
    }
}

impl FromStr for GridMap {
    type Err = MapParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_map(s)
    }
}

/// Parses the map text format: a `width height cell_width` header followed by
/// `height` rows of `width` characters from `{'#', '.'}`, top row first.
pub fn load_map(text: &str) -> Result<GridMap, MapParseError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(MapParseError::Header {
            line: 1,
            reason: "empty input".into(),
        })?;
    let header_err = |reason: String| MapParseError::Header {
        line: header_line + 1,
        reason,
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(header_err(format!("expected 3 fields, found {}", fields.len())));
    }
    let width: usize = fields[0]
        .parse()
        .map_err(|_| header_err(format!("bad width {:?}", fields[0])))?;
    let height: usize = fields[1]
        .parse()
        .map_err(|_| header_err(format!("bad height {:?}", fields[1])))?;
    let cell_width: f64 = fields[2]
        .parse()
        .map_err(|_| header_err(format!("bad cell width {:?}", fields[2])))?;
    if width == 0 || height == 0 {
        return Err(header_err("dimensions must be positive".into()));
    }
    if !(cell_width > 0.0 && cell_width.is_finite()) {
        return Err(header_err("cell width must be positive".into()));
    }

    let rows: Vec<&str> = lines.map(|(_, l)| l).collect();
    let rows: Vec<&str> = {
        // trailing blank lines are not rows
        let keep = rows.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
        rows[..keep].to_vec()
    };
    if rows.len() != height {
        return Err(MapParseError::RowCount {
            expected: height,
            found: rows.len(),
        });
    }
    let mut occupied = vec![false; width * height];
    for (i, line) in rows.iter().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        for (c, &ch) in chars.iter().enumerate().take(width) {
            let is_wall = match ch {
                '#' => true,
                '.' => false,
                other => {
                    return Err(MapParseError::InvalidChar {
                        row: i + 1,
                        col: c + 1,
                        ch: other,
                    })
                }
            };
            let grid_row = height - 1 - i;
            occupied[grid_row * width + c] = is_wall;
        }
        if chars.len() != width {
            return Err(MapParseError::RaggedRow {
                row: i + 1,
                expected: width,
                found: chars.len(),
            });
        }
    }
    Ok(GridMap {
        width,
        height,
        cell_width,
        occupied,
    })
}
