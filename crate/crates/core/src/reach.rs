//! Curve quantifiers as graph reachability: can two nodes be joined while
//! avoiding a ball around a center?
//!
//! Balls are taken in the inner length metric of the domain. Visible nodes
//! get the exact straight-line distance, the rest the graph length distance.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::engine::{MetricKind, QhGraph};
use crate::geometry::point_segment_distance;

/// Inner distance between two nodes.
pub fn inner_distance(graph: &QhGraph, u: usize, v: usize) -> f64 {
    if u == v {
        return 0.0;
    }
    let g = graph.grid();
    let (a, b) = (g.point(u), g.point(v));
    if graph.domain().segment_inside_known(a, g.dist(u), b, g.dist(v)) {
        a.dist(b)
    } else {
        graph.distance(MetricKind::Length, u, v)
    }
}

/// Inner distance from a center node to every node within reach of `cap`;
/// farther nodes read as infinity.
#[derive(Clone, Debug)]
pub struct InnerField {
    pub center: usize,
    pub cap: f64,
    values: Vec<f64>,
    visible: Vec<bool>,
}

impl InnerField {
    pub fn new(graph: &QhGraph, center: usize, cap: f64) -> Self {
        let g = graph.grid();
        // graph lengths overshoot straight lines by a few percent
        let radius = 1.1 * cap + 4.0 * g.h();
        let tree = graph.dijkstra(MetricKind::Length, &[center], None, radius);
        let (pc, dc) = (g.point(center), g.dist(center));
        let mut values = tree.dist;
        let mut visible = vec![false; values.len()];
        for v in 0..values.len() {
            if values[v].is_finite() {
                let pv = g.point(v);
                if graph.domain().segment_inside_known(pc, dc, pv, g.dist(v)) {
                    values[v] = pc.dist(pv);
                    visible[v] = true;
                }
            }
        }
        InnerField { center, cap, values, visible }
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Lower bound for the field along the edge `u v` of length `len`.
    pub fn clearance(&self, graph: &QhGraph, u: usize, v: usize, len: f64) -> f64 {
        if self.visible[u] && self.visible[v] {
            let g = graph.grid();
            return point_segment_distance(g.point(self.center), g.point(u), g.point(v));
        }
        let (a, b) = (self.values[u], self.values[v]);
        a.min(b).min(0.5 * (a + b - len))
    }
}

#[derive(PartialEq)]
struct Wide(f64, u32);

impl Eq for Wide {}

impl Ord for Wide {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Wide {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Largest radius `ρ` such that `x` and `y` are joined by a graph path
/// whose edges all keep clearance ≥ `ρ` from the field's center. Every
/// smaller ball can be avoided and every larger one separates the pair, so
/// this is the exact limit of a bisection on `ρ`.
pub fn bottleneck(graph: &QhGraph, field: &InnerField, x: usize, y: usize) -> f64 {
    if x == y {
        return f64::INFINITY;
    }
    let n = graph.len();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[x] = f64::INFINITY;
    heap.push(Wide(f64::INFINITY, x as u32));
    while let Some(Wide(b, u)) = heap.pop() {
        let u = u as usize;
        if done[u] || b < best[u] {
            continue;
        }
        done[u] = true;
        if u == y {
            break;
        }
        for (v, len, _) in graph.edges_of(u) {
            if done[v] {
                continue;
            }
            let c = b.min(field.clearance(graph, u, v, len));
            if c > best[v] {
                best[v] = c;
                heap.push(Wide(c, v as u32));
            }
        }
    }
    best[y].max(0.0)
}

/// BFS test: are `x` and `y` joined by edges with clearance ≥ `rho`?
pub fn connected_avoiding(graph: &QhGraph, field: &InnerField, x: usize, y: usize, rho: f64) -> bool {
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::from([x]);
    seen[x] = true;
    while let Some(u) = queue.pop_front() {
        if u == y {
            return true;
        }
        for (v, len, _) in graph.edges_of(u) {
            if !seen[v] && field.clearance(graph, u, v, len) >= rho {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;
    use crate::engine::graph_for;
    use crate::geometry::Point2;

    fn node(g: &QhGraph, x: f64, y: f64) -> usize {
        g.grid().snap(Point2::new(x, y)).unwrap().0
    }

    #[test]
    fn disk_field_is_euclidean() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 16.0).unwrap();
        let c = node(&g, 0.0, 0.0);
        let f = InnerField::new(&g, c, 2.0);
        for v in 0..g.len() {
            assert_eq!(f.value(v), g.grid().point(v).norm());
        }
    }

    #[test]
    fn slit_field_goes_around_the_tip() {
        // continuum value 2·hypot(0.5, 0.125); nodes within h/2 of the tip are cut
        let exact = 2.0 * 0.5f64.hypot(0.125);
        let mut prev = f64::INFINITY;
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let g = graph_for(&gallery("slit-disk").unwrap(), h).unwrap();
            let (a, b) = (node(&g, 0.5, 0.125), node(&g, 0.5, -0.125));
            let d = inner_distance(&g, a, b);
            assert!(d >= exact - 1e-12 && d < prev, "{d} vs {exact}");
            prev = d;
        }
        // stencil anisotropy at this angle is about 2.7%
        assert!(prev < exact * 1.05, "{prev} vs {exact}");
    }

    #[test]
    fn bottleneck_matches_bfs_threshold() {
        for name in ["disk", "slit-disk", "rooms-and-corridors"] {
            let g = graph_for(&gallery(name).unwrap(), 1.0 / 16.0).unwrap();
            let gr = g.grid();
            let (c, x, y) = (gr.len() / 2, gr.len() / 5, 4 * gr.len() / 5);
            let f = InnerField::new(&g, c, 10.0);
            let t = bottleneck(&g, &f, x, y);
            assert!(t > 0.0, "{name}");
            assert!(connected_avoiding(&g, &f, x, y, t), "{name}");
            assert!(!connected_avoiding(&g, &f, x, y, t + 1e-9), "{name}");
        }
    }

    #[test]
    fn annulus_connects_opposite_points() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 64.0).unwrap();
        let (c, y, z) = (node(&g, 0.0, 0.0), node(&g, 0.7, 0.0), node(&g, -0.7, 0.0));
        let f = InnerField::new(&g, c, 2.0);
        assert!(bottleneck(&g, &f, y, z) >= 0.5);
    }
}
