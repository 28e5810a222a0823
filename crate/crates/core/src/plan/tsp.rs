use crate::error::{Error, Result};
use crate::world::Point2;

/// Largest vertex count (start included) handed to the exact solver.
pub const EXACT_VERTEX_LIMIT: usize = 13;

const TIE_TOLERANCE: f64 = 1e-9;

/// Symmetric matrix of nonnegative distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn filled(n: usize, value: f64) -> Self {
        let mut m = Self {
            n,
            d: vec![value; n * n],
        };
        for i in 0..n {
            m.d[i * n + i] = 0.0;
        }
        m
    }

    pub fn euclidean(points: &[Point2]) -> Self {
        let mut m = Self::filled(points.len(), 0.0);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                m.set(i, j, points[i].distance(points[j]));
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.d[i * self.n + j] = v;
        self.d[j * self.n + i] = v;
    }

    pub(crate) fn set_directed(&mut self, i: usize, j: usize, v: f64) {
        self.d[i * self.n + j] = v;
    }

    pub fn all_finite(&self) -> bool {
        self.d.iter().all(|v| v.is_finite())
    }

    /// Length of visiting `order` in sequence, plus the closing edge if `closed`.
    pub fn walk_length(&self, order: &[usize], closed: bool) -> f64 {
        let mut len: f64 = order.windows(2).map(|w| self.get(w[0], w[1])).sum();
        if closed && order.len() > 1 {
            len += self.get(order[order.len() - 1], order[0]);
        }
        len
    }
}

/// Whether a tour returns to its start vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourKind {
    Closed,
    /// Fixed start, destination chosen by the solver.
    Open,
}

/// Visiting order over matrix vertices; `order[0]` is always vertex 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
    pub closed: bool,
    /// False when a heuristic produced the tour.
    pub exact: bool,
}

impl Tour {
    /// Vertices after the start.
    pub fn stops(&self) -> &[usize] {
        &self.order[1..]
    }
}

/// A strategy for ordering vertices of a distance matrix.
pub trait TourSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Largest instance (vertices including the start) the solver accepts.
    fn max_vertices(&self) -> usize;

    fn solve(&self, dm: &DistanceMatrix, kind: TourKind) -> Result<Tour>;
}

/// Dynamic programming over subsets. Among equal-length optima it returns the
/// lexicographically smallest visiting order.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeldKarp;

impl TourSolver for HeldKarp {
    fn name(&self) -> &'static str {
        "held-karp"
    }

    fn max_vertices(&self) -> usize {
        EXACT_VERTEX_LIMIT
    }

    fn solve(&self, dm: &DistanceMatrix, kind: TourKind) -> Result<Tour> {
        let n = dm.len();
        if n == 0 {
            return Err(Error::EmptyPoints);
        }
        if n > self.max_vertices() {
            return Err(Error::InvalidParameter(format!(
                "held-karp limited to {} vertices, got {n}",
                self.max_vertices()
            )));
        }
        let m = n - 1;
        let full = (1usize << m) - 1;
        // rest[s * n + v]: cheapest way to start at v, visit every vertex in s
        // (bit i is vertex i + 1) and then finish.
        let mut rest = vec![f64::INFINITY; (full + 1) * n];
        for (v, r) in rest.iter_mut().enumerate().take(n) {
            *r = match kind {
                TourKind::Closed => dm.get(v, 0),
                TourKind::Open => 0.0,
            };
        }
        for s in 1..=full {
            for v in 0..n {
                if v > 0 && s & (1 << (v - 1)) != 0 {
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut bits = s;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let u = i + 1;
                    let c = dm.get(v, u) + rest[(s & !(1 << i)) * n + u];
                    if c < best {
                        best = c;
                    }
                }
                rest[s * n + v] = best;
            }
        }
        let total = rest[full * n];
        if !total.is_finite() {
            return Err(Error::Disconnected);
        }
        let mut order = Vec::with_capacity(n);
        order.push(0);
        let (mut cur, mut s) = (0usize, full);
        while s != 0 {
            let target = rest[s * n + cur];
            let tol = TIE_TOLERANCE * target.abs().max(1.0);
            let next = (0..m)
                .filter(|i| s & (1 << i) != 0)
                .find(|&i| dm.get(cur, i + 1) + rest[(s & !(1 << i)) * n + i + 1] <= target + tol)
                .expect("some successor realizes the optimum");
            order.push(next + 1);
            s &= !(1 << next);
            cur = next + 1;
        }
        let closed = kind == TourKind::Closed;
        Ok(Tour {
            length: dm.walk_length(&order, closed),
            order,
            closed,
            exact: true,
        })
    }
}

/// Nearest-neighbor construction improved by 2-opt and or-opt moves.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalSearch;

impl LocalSearch {
    fn nearest_neighbor(dm: &DistanceMatrix) -> Vec<usize> {
        let n = dm.len();
        let mut visited = vec![false; n];
        let mut order = vec![0];
        visited[0] = true;
        for _ in 1..n {
            let cur = *order.last().unwrap();
            let next = (0..n)
                .filter(|&v| !visited[v])
                .min_by(|&a, &b| dm.get(cur, a).total_cmp(&dm.get(cur, b)))
                .unwrap();
            visited[next] = true;
            order.push(next);
        }
        order
    }

    fn two_opt(dm: &DistanceMatrix, order: &mut [usize], closed: bool) -> bool {
        let n = order.len();
        let mut improved_any = false;
        loop {
            let mut improved = false;
            for i in 1..n.saturating_sub(1) {
                for j in i + 1..n {
                    let (a, b, c) = (order[i - 1], order[i], order[j]);
                    let delta = if j + 1 < n || closed {
                        let e = order[(j + 1) % n];
                        dm.get(a, c) + dm.get(b, e) - dm.get(a, b) - dm.get(c, e)
                    } else {
                        dm.get(a, c) - dm.get(a, b)
                    };
                    if delta < -1e-10 {
                        order[i..=j].reverse();
                        improved = true;
                    }
                }
            }
            if !improved {
                return improved_any;
            }
            improved_any = true;
        }
    }

    /// Moves short segments (possibly reversed) to better positions.
    fn or_opt(dm: &DistanceMatrix, order: &mut Vec<usize>, closed: bool) -> bool {
        let n = order.len();
        let mut best_len = dm.walk_length(order, closed);
        let mut improved_any = false;
        let mut improved = true;
        while improved {
            improved = false;
            'search: for seg in 1..=3.min(n.saturating_sub(2)) {
                for i in 1..=n - seg {
                    let segment: Vec<usize> = order[i..i + seg].to_vec();
                    let mut remainder = order.clone();
                    remainder.drain(i..i + seg);
                    for pos in 1..=remainder.len() {
                        if pos == i {
                            continue;
                        }
                        for reversed in [false, true] {
                            let mut cand = remainder.clone();
                            let piece = segment.iter().copied();
                            if reversed {
                                cand.splice(pos..pos, piece.rev());
                            } else {
                                cand.splice(pos..pos, piece);
                            }
                            let len = dm.walk_length(&cand, closed);
                            if len < best_len - 1e-10 {
                                *order = cand;
                                best_len = len;
                                improved = true;
                                improved_any = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        improved_any
    }
}

impl TourSolver for LocalSearch {
    fn name(&self) -> &'static str {
        "nn-2opt"
    }

    fn max_vertices(&self) -> usize {
        usize::MAX
    }

    fn solve(&self, dm: &DistanceMatrix, kind: TourKind) -> Result<Tour> {
        if dm.is_empty() {
            return Err(Error::EmptyPoints);
        }
        if !dm.all_finite() {
            return Err(Error::Disconnected);
        }
        let closed = kind == TourKind::Closed;
        let mut order = Self::nearest_neighbor(dm);
        loop {
            let a = Self::two_opt(dm, &mut order, closed);
            let b = Self::or_opt(dm, &mut order, closed);
            if !a && !b {
                break;
            }
        }
        Ok(Tour {
            length: dm.walk_length(&order, closed),
            order,
            closed,
            exact: false,
        })
    }
}

/// Exact solver when the instance is small enough, local search otherwise.
pub fn solver_for(vertices: usize) -> &'static dyn TourSolver {
    if vertices <= EXACT_VERTEX_LIMIT {
        &HeldKarp
    } else {
        &LocalSearch
    }
}

/// Shortest closed tour from `start` through every point and back. Exact for
/// up to 12 points. Vertex 0 of the result is `start`; vertex `i` is
/// `points[i - 1]`.
pub fn closed_tour(start: Point2, points: &[Point2]) -> Result<Tour> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let mut all = Vec::with_capacity(points.len() + 1);
    all.push(start);
    all.extend_from_slice(points);
    let dm = DistanceMatrix::euclidean(&all);
    solver_for(dm.len()).solve(&dm, TourKind::Closed)
}

/// Shortest path from vertex 0 through every other vertex of `dm`, with the
/// end vertex left free. `waypoints` only sizes the instance; distances come
/// from `dm`.
pub fn open_path_best_destination(_start: Point2, waypoints: &[Point2], dm: &DistanceMatrix) -> Result<Tour> {
    if waypoints.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if dm.len() != waypoints.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "distance matrix has {} vertices for {} waypoints plus start",
            dm.len(),
            waypoints.len()
        )));
    }
    if !dm.all_finite() {
        return Err(Error::Disconnected);
    }
    solver_for(dm.len()).solve(dm, TourKind::Open)
}
