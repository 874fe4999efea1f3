//! Seeded sampling of nodes, pairs and the distance slack budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{converge, MetricKind, QhGraph};
use crate::error::{LabError, Result};
use crate::geometry::Point2;

/// Independent RNG stream for one estimator.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform point of the domain by rejection from its bounding box.
pub fn random_point<R: Rng>(graph: &QhGraph, rng: &mut R) -> Point2 {
    let dom = graph.domain();
    let (lo, hi) = dom.bounding_box();
    loop {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if dom.contains(p) && dom.raw_distance(p) > 0.0 {
            return p;
        }
    }
}

/// Uniform continuous point snapped to its nearest node. The continuous
/// draw does not depend on h, so estimates stay comparable across grids.
pub fn random_node<R: Rng>(graph: &QhGraph, rng: &mut R) -> usize {
    for _ in 0..10_000 {
        let p = random_point(graph, rng);
        if let Ok((u, _)) = graph.grid().snap(p) {
            return u;
        }
    }
    graph.grid().incenter()
}

pub fn random_nodes(graph: &QhGraph, n: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut r = rng(seed, stream);
    (0..n).map(|_| random_node(graph, &mut r)).collect()
}

/// Node farthest from the incenter in the length metric (lowest index on
/// ties). Catches cusp tips and other deep corners that uniform sampling
/// rarely hits.
pub fn extremal_node(graph: &QhGraph) -> usize {
    let tree = graph.tree(MetricKind::Length, graph.grid().incenter());
    let mut best = 0;
    for v in 1..graph.len() {
        if tree.dist[v] > tree.dist[best] {
            best = v;
        }
    }
    best
}

/// `n` node pairs: the extremal node against the incenter, then random pairs.
pub fn sample_pairs(graph: &QhGraph, n: usize, seed: u64, stream: u64) -> Vec<(usize, usize)> {
    if n == 0 {
        return Vec::new();
    }
    let mut r = rng(seed, stream);
    let mut out = vec![(extremal_node(graph), graph.grid().incenter())];
    while out.len() < n {
        let x = random_node(graph, &mut r);
        let y = random_node(graph, &mut r);
        out.push((x, y));
    }
    out
}

/// `m` indices spread evenly over `0..len`, endpoints included.
pub fn spread(len: usize, m: usize) -> Vec<usize> {
    if len == 0 || m == 0 {
        return Vec::new();
    }
    let m = m.min(len);
    if m == 1 {
        return vec![len / 2];
    }
    let mut v: Vec<usize> = (0..m).map(|k| k * (len - 1) / (m - 1)).collect();
    v.dedup();
    v
}

/// Tolerance for comparing measured quantities with continuum bounds:
/// `3 · rel · |value| + abs`, where `rel` is the relative discretization
/// error of a reference distance at spacings 4h, 2h, h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub rel: f64,
    pub abs: f64,
}

impl Slack {
    pub const TIGHT: Slack = Slack { rel: 0.0, abs: 1e-9 };

    pub fn of(&self, value: f64) -> f64 {
        3.0 * self.rel * value.abs() + self.abs
    }

    /// Measures `rel` on a reference qh distance between two deep nodes
    /// that lie on all three grids.
    pub fn measure(graph: &QhGraph) -> Result<Slack> {
        let h = graph.h();
        let g = graph.grid();
        let coarse: Vec<usize> = (0..g.len())
            .filter(|&u| {
                let (i, j) = g.grid_coords(u);
                i.rem_euclid(4) == 0 && j.rem_euclid(4) == 0
            })
            .collect();
        let a = *coarse
            .iter()
            .max_by(|&&u, &&v| g.dist(u).total_cmp(&g.dist(v)).then(v.cmp(&u)))
            .ok_or(LabError::Resolution { h, reason: "no node on the coarse grid".into() })?;
        let floor = (16.0 * h).min(0.5 * g.dist(a));
        let tree = graph.tree(MetricKind::Length, a);
        let b = coarse
            .iter()
            .copied()
            .filter(|&u| g.dist(u) >= floor)
            .max_by(|&u, &v| tree.dist[u].total_cmp(&tree.dist[v]).then(v.cmp(&u)))
            .unwrap_or(a);
        let hs = [4.0 * h, 2.0 * h, h];
        let c = converge(graph.domain(), MetricKind::Quasihyperbolic, g.point(a), g.point(b), &hs)?;
        let f3 = c.values[2];
        if !(f3 > 0.0) {
            return Err(LabError::Inconsistent("reference distance is zero".into()));
        }
        let err = c.error_estimate.unwrap_or((c.values[2] - c.values[1]).abs());
        Ok(Slack { rel: err / f3, abs: 1e-9 })
    }

    pub fn with_rel(rel: f64) -> Slack {
        Slack { rel, abs: 1e-9 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;
    use crate::engine::graph_for;

    #[test]
    fn pairs_are_reproducible() {
        let g = graph_for(&gallery("square").unwrap(), 1.0 / 16.0).unwrap();
        let a = sample_pairs(&g, 20, 7, 0);
        assert_eq!(a, sample_pairs(&g, 20, 7, 0));
        assert_ne!(a, sample_pairs(&g, 20, 8, 0));
        assert_eq!(a.len(), 20);
    }

    #[test]
    fn extremal_node_reaches_cusp_tip() {
        let g = graph_for(&gallery("cusp").unwrap(), 1.0 / 64.0).unwrap();
        let p = g.grid().point(extremal_node(&g));
        assert!(p.x < 0.3, "{p:?}");
    }

    #[test]
    fn spread_keeps_endpoints() {
        assert_eq!(spread(10, 3), vec![0, 4, 9]);
        assert_eq!(spread(3, 10), vec![0, 1, 2]);
        assert_eq!(spread(5, 1), vec![2]);
        assert!(spread(0, 4).is_empty());
    }

    #[test]
    fn slack_is_small_on_disk() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 64.0).unwrap();
        let s = Slack::measure(&g).unwrap();
        assert!(s.rel >= 0.0 && s.rel < 0.05, "{s:?}");
        for name in ["slit-disk", "cusp", "rooms-and-corridors", "snowflake-polygon"] {
            let g = graph_for(&gallery(name).unwrap(), 1.0 / 64.0).unwrap();
            let s = Slack::measure(&g).unwrap();
            assert!(s.rel < 0.05, "{name} {s:?}");
        }
    }
}
