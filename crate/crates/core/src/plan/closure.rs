use crate::plan::tsp::DistanceMatrix;
use crate::world::{GridMap, Point2};

/// All-pairs shortest distances over the line-of-sight graph, with next-hop
/// data for recovering the underlying routes.
#[derive(Debug, Clone)]
pub struct MetricClosure {
    pub dist: DistanceMatrix,
    next: Vec<Option<usize>>,
}

impl MetricClosure {
    /// Vertex sequence of a shortest route from `i` to `j`, both included.
    /// `None` when `j` is unreachable from `i`.
    pub fn route(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        let n = self.dist.len();
        if i == j {
            return Some(vec![i]);
        }
        let mut out = vec![i];
        let mut cur = i;
        while cur != j {
            cur = self.next[cur * n + j]?;
            out.push(cur);
        }
        Some(out)
    }

    pub fn is_connected(&self) -> bool {
        self.dist.all_finite()
    }
}

pub fn metric_closure(points: &[Point2], map: &GridMap) -> MetricClosure {
    let n = points.len();
    let mut dist = DistanceMatrix::filled(n, f64::INFINITY);
    let mut next = vec![None; n * n];
    for i in 0..n {
        next[i * n + i] = Some(i);
        for j in i + 1..n {
            if map.line_of_sight(points[i], points[j]) {
                dist.set(i, j, points[i].distance(points[j]));
                next[i * n + j] = Some(j);
                next[j * n + i] = Some(i);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist.get(i, k);
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let via = dik + dist.get(k, j);
                if via < dist.get(i, j) - 1e-12 {
                    // write one direction only; symmetry is restored below
                    dist.set_directed(i, j, via);
                    next[i * n + j] = next[i * n + k];
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let v = dist.get(i, j).min(dist.get(j, i));
            dist.set(i, j, v);
        }
    }
    MetricClosure { dist, next }
}
