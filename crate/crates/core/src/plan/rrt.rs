use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrtParams {
    /// Longest tree edge, cell widths.
    pub step_size: f64,
    pub goal_bias: f64,
    pub max_iterations: usize,
    /// Neighborhood searched for parents and rewiring, cell widths.
    pub rewire_radius: f64,
    /// Belief at or above which a cell blocks motion.
    pub occupancy_threshold: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            goal_bias: 0.1,
            max_iterations: 3000,
            rewire_radius: 1.5,
            occupancy_threshold: 0.8,
        }
    }
}

impl RrtParams {
    pub fn validate(&self) -> Result<()> {
        let positive = self.step_size > 0.0
            && self.rewire_radius > 0.0
            && self.max_iterations > 0
            && self.occupancy_threshold > 0.0
            && self.occupancy_threshold <= 1.0;
        if positive && (0.0..=1.0).contains(&self.goal_bias) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid RRT* parameters: {self:?}")))
        }
    }

    /// Spacing of collision samples along an edge.
    pub fn check_spacing(&self) -> f64 {
        self.step_size / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RrtFailure {
    #[error("start point is inside an obstacle")]
    StartBlocked,
    #[error("goal point is inside an obstacle")]
    GoalBlocked,
    #[error("no path found within the iteration budget")]
    Exhausted,
}

/// True if points spaced at most `spacing` apart along `a..=b` all pass.
pub fn segment_is_free(a: Point2, b: Point2, spacing: f64, is_obstacle: &dyn Fn(Point2) -> bool) -> bool {
    let n = ((a.distance(b) / spacing).ceil() as usize).max(1);
    (0..=n).all(|i| !is_obstacle(a.lerp(b, i as f64 / n as f64)))
}

struct Node {
    at: Point2,
    parent: Option<usize>,
    cost: f64,
    children: Vec<usize>,
}

/// Uniform buckets over the sampling region for radius queries.
struct Buckets {
    size: f64,
    cols: usize,
    rows: usize,
    slots: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(extent: Point2, size: f64) -> Self {
        let cols = ((extent.x / size).ceil() as usize).max(1);
        let rows = ((extent.y / size).ceil() as usize).max(1);
        Self {
            size,
            cols,
            rows,
            slots: vec![Vec::new(); cols * rows],
        }
    }

    fn key(&self, p: Point2) -> (usize, usize) {
        let c = ((p.x / self.size).floor().max(0.0) as usize).min(self.cols - 1);
        let r = ((p.y / self.size).floor().max(0.0) as usize).min(self.rows - 1);
        (c, r)
    }

    fn insert(&mut self, p: Point2, id: usize) {
        let (c, r) = self.key(p);
        self.slots[r * self.cols + c].push(id);
    }

    /// Ids in buckets within `ring` of the bucket holding `p`.
    fn around(&self, p: Point2, ring: usize) -> impl Iterator<Item = usize> + '_ {
        let (c, r) = self.key(p);
        let (c0, c1) = (c.saturating_sub(ring), (c + ring).min(self.cols - 1));
        let (r0, r1) = (r.saturating_sub(ring), (r + ring).min(self.rows - 1));
        (r0..=r1).flat_map(move |rr| (c0..=c1).flat_map(move |cc| self.slots[rr * self.cols + cc].iter().copied()))
    }
}

struct Tree {
    nodes: Vec<Node>,
    buckets: Buckets,
}

impl Tree {
    fn nearest(&self, p: Point2) -> usize {
        let mut ring = 0;
        let max_ring = self.buckets.cols.max(self.buckets.rows);
        loop {
            let best = self.buckets.around(p, ring).min_by(|&a, &b| {
                self.nodes[a]
                    .at
                    .distance(p)
                    .total_cmp(&self.nodes[b].at.distance(p))
                    .then(a.cmp(&b))
            });
            if let Some(b) = best {
                // anything outside the searched rings is at least ring * size away
                if self.nodes[b].at.distance(p) <= ring as f64 * self.buckets.size || ring >= max_ring {
                    return b;
                }
            }
            ring += 1;
            if ring > max_ring {
                return best.expect("tree is never empty");
            }
        }
    }

    fn within(&self, p: Point2, radius: f64) -> Vec<usize> {
        let ring = (radius / self.buckets.size).ceil() as usize;
        let mut ids: Vec<usize> = self
            .buckets
            .around(p, ring)
            .filter(|&i| self.nodes[i].at.distance(p) <= radius)
            .collect();
        ids.sort_unstable();
        ids
    }

    fn add(&mut self, at: Point2, parent: usize, cost: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            at,
            parent: Some(parent),
            cost,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        self.buckets.insert(at, id);
        id
    }

    fn reparent(&mut self, id: usize, parent: usize, cost: f64) {
        if let Some(old) = self.nodes[id].parent {
            self.nodes[old].children.retain(|&c| c != id);
        }
        self.nodes[id].parent = Some(parent);
        self.nodes[parent].children.push(id);
        let delta = cost - self.nodes[id].cost;
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            self.nodes[n].cost += delta;
            stack.extend(self.nodes[n].children.iter().copied());
        }
    }

    fn path_to(&self, mut id: usize) -> Vec<Point2> {
        let mut out = vec![self.nodes[id].at];
        while let Some(p) = self.nodes[id].parent {
            out.push(self.nodes[p].at);
            id = p;
        }
        out.reverse();
        out
    }
}

/// Asymptotically optimal rapidly-exploring random tree over the rectangle
/// `[0, extent.x) x [0, extent.y)`. The returned polyline starts at `start`
/// and ends at `goal`.
pub fn rrt_star<R: Rng + ?Sized>(
    start: Point2,
    goal: Point2,
    extent: Point2,
    is_obstacle: &dyn Fn(Point2) -> bool,
    params: &RrtParams,
    rng: &mut R,
) -> Result<Vec<Point2>, RrtFailure> {
    if is_obstacle(start) {
        return Err(RrtFailure::StartBlocked);
    }
    if is_obstacle(goal) {
        return Err(RrtFailure::GoalBlocked);
    }
    let spacing = params.check_spacing();
    let free = |a: Point2, b: Point2| segment_is_free(a, b, spacing, is_obstacle);
    if start.distance(goal) <= params.step_size && free(start, goal) {
        return Ok(vec![start, goal]);
    }

    let mut tree = Tree {
        nodes: vec![Node {
            at: start,
            parent: None,
            cost: 0.0,
            children: Vec::new(),
        }],
        buckets: Buckets::new(extent, params.rewire_radius),
    };
    tree.buckets.insert(start, 0);
    // nodes that can reach the goal with one free edge of at most step_size
    let mut goal_links: Vec<usize> = Vec::new();

    for _ in 0..params.max_iterations {
        let sample = if rng.gen_bool(params.goal_bias) {
            goal
        } else {
            Point2::new(rng.gen_range(0.0..extent.x), rng.gen_range(0.0..extent.y))
        };
        let near_id = tree.nearest(sample);
        let from = tree.nodes[near_id].at;
        let d = from.distance(sample);
        if d == 0.0 {
            continue;
        }
        let new = if d <= params.step_size {
            sample
        } else {
            from.lerp(sample, params.step_size / d)
        };
        if !free(from, new) {
            continue;
        }
        let neighbors = tree.within(new, params.rewire_radius);
        let mut parent = near_id;
        let mut cost = tree.nodes[near_id].cost + from.distance(new);
        for &n in &neighbors {
            let c = tree.nodes[n].cost + tree.nodes[n].at.distance(new);
            if c < cost - 1e-12 && free(tree.nodes[n].at, new) {
                parent = n;
                cost = c;
            }
        }
        let id = tree.add(new, parent, cost);
        for &n in &neighbors {
            if n == parent {
                continue;
            }
            let c = cost + new.distance(tree.nodes[n].at);
            if c < tree.nodes[n].cost - 1e-12 && free(new, tree.nodes[n].at) {
                tree.reparent(n, id, c);
            }
        }
        if new.distance(goal) <= params.step_size && free(new, goal) {
            goal_links.push(id);
        }
    }

    let best = goal_links.into_iter().min_by(|&a, &b| {
        let ca = tree.nodes[a].cost + tree.nodes[a].at.distance(goal);
        let cb = tree.nodes[b].cost + tree.nodes[b].at.distance(goal);
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let best = best.ok_or(RrtFailure::Exhausted)?;
    let mut path = tree.path_to(best);
    if path.last() != Some(&goal) {
        path.push(goal);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, Cell, GridMap};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_length(p: &[Point2]) -> f64 {
        p.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    fn ground_truth(map: &GridMap) -> impl Fn(Point2) -> bool + '_ {
        move |p| !map.is_free_point(p)
    }

    #[test]
    fn open_space_paths_are_near_straight() {
        let map = GridMap::open(20, 20, 0.5).unwrap();
        let obstacle = ground_truth(&map);
        let (start, goal) = (Point2::new(3.0, 3.0), Point2::new(15.0, 12.0));
        let params = RrtParams::default();
        let good = (0..100)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = rrt_star(start, goal, map.extent(), &obstacle, &params, &mut rng).unwrap();
                path_length(&p) <= 1.1 * start.distance(goal)
            })
            .count();
        assert!(good >= 95, "{good}/100 within 10% of straight line");
    }

    #[test]
    fn wall_gap_is_found() {
        // wall over x in [10, 11) with a single gap at row 10
        let mut map = GridMap::open(20, 20, 0.5).unwrap();
        for r in (0..20).filter(|&r| r != 10) {
            map.set_occupied(Cell::new(r, 10), true);
        }
        let obstacle = ground_truth(&map);
        let (start, goal) = (Point2::new(5.0, 3.0), Point2::new(15.0, 3.0));
        // any route must pass through the gap square [10, 11] x [10, 11]
        let lower = Point2::new(10.0, 10.0).distance(start) + 1.0 + Point2::new(11.0, 10.0).distance(goal);
        let grid = grid_dijkstra(&map, start, goal);
        let params = RrtParams::default();
        let mut found = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let Ok(p) = rrt_star(start, goal, map.extent(), &obstacle, &params, &mut rng) else {
                continue;
            };
            found += 1;
            for w in p.windows(2) {
                assert!(segment_is_free(w[0], w[1], params.check_spacing(), &obstacle));
            }
            let len = path_length(&p);
            // edge sampling may shave a corner by less than the check spacing
            assert!(len >= lower - 2.0 * params.check_spacing(), "{len} < {lower}");
            // octile paths through cell centers overestimate by at most 8.3%,
            // plus half a diagonal at each end
            assert!(len >= grid / 1.0824 - std::f64::consts::SQRT_2);
            assert!(
                p.iter().any(|q| (10.0..=11.0).contains(&q.x)) || p.windows(2).any(|w| w[0].x < 10.0 && w[1].x > 11.0)
            );
            assert!(len <= grid * 1.2, "{len} vs grid {grid}");
        }
        assert!(found >= 9, "found {found}/10");
    }

    /// 8-connected shortest path length between the cells of `a` and `b`.
    fn grid_dijkstra(map: &GridMap, a: Point2, b: Point2) -> f64 {
        let src = map.flat(map.cell_containing(a).unwrap());
        let dst = map.flat(map.cell_containing(b).unwrap());
        let mut dist = vec![f64::INFINITY; map.len()];
        let mut done = vec![false; map.len()];
        dist[src] = 0.0;
        while let Some(f) = (0..map.len())
            .filter(|&f| !done[f] && dist[f].is_finite())
            .min_by(|&x, &y| dist[x].total_cmp(&dist[y]))
        {
            done[f] = true;
            let c = map.cell_at(f);
            for n in map.neighbors8(c).filter(|&n| map.is_free(n)) {
                let diag = n.row != c.row && n.col != c.col;
                let nd = dist[f] + if diag { std::f64::consts::SQRT_2 } else { 1.0 };
                let nf = map.flat(n);
                dist[nf] = dist[nf].min(nd);
            }
        }
        dist[dst]
    }

    #[test]
    fn sealed_goal_fails() {
        let text = "6 6 0.5\n......\n.###..\n.#.#..\n.###..\n......\n......\n";
        let map = load_map(text).unwrap();
        let obstacle = ground_truth(&map);
        let params = RrtParams {
            max_iterations: 500,
            ..RrtParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let goal = Point2::new(2.5, 3.5);
        assert!(map.is_free_point(goal));
        let r = rrt_star(Point2::new(0.5, 0.5), goal, map.extent(), &obstacle, &params, &mut rng);
        assert_eq!(r, Err(RrtFailure::Exhausted));
        let r = rrt_star(
            Point2::new(0.5, 0.5),
            Point2::new(1.5, 3.5),
            map.extent(),
            &obstacle,
            &params,
            &mut rng,
        );
        assert_eq!(r, Err(RrtFailure::GoalBlocked));
        let r = rrt_star(Point2::new(1.5, 3.5), goal, map.extent(), &obstacle, &params, &mut rng);
        assert_eq!(r, Err(RrtFailure::StartBlocked));
    }

    #[test]
    fn short_free_hop_is_direct() {
        let map = GridMap::open(5, 5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = rrt_star(
            Point2::new(1.0, 1.0),
            Point2::new(1.3, 1.2),
            map.extent(),
            &ground_truth(&map),
            &RrtParams::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(p.len(), 2);
    }
}
