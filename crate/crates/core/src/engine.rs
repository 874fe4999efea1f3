//! Weighted neighbor graph over a [`GridDomain`] and shortest paths in the
//! quasihyperbolic and length metrics.
//!
//! Edge `(u, v)` carries its euclidean length `L` and the trapezoid
//! quasihyperbolic weight `L · (1/d(u) + 1/d(v)) / 2`. Dijkstra accumulates
//! weights in path order, so the distance of a returned geodesic equals the
//! cumulative length stored on its [`Arc`] bit for bit.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::curve::{qh_segment_length, Arc};
use crate::domain::PlanarDomain;
use crate::error::{LabError, Result};
use crate::geometry::Point2;
use crate::grid::{discretize, GridDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[serde(rename = "qh")]
    Quasihyperbolic,
    Length,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Quasihyperbolic => "qh",
            MetricKind::Length => "length",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qh" | "quasihyperbolic" | "k" => Ok(MetricKind::Quasihyperbolic),
            "length" | "l" | "euclidean" => Ok(MetricKind::Length),
            other => Err(LabError::InvalidParameter(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QhGraph {
    grid: GridDomain,
    len: Vec<f64>,
    qh: Vec<f64>,
}

pub fn build_graph(grid: GridDomain) -> QhGraph {
    let (offsets, nbrs) = grid.csr();
    let mut len = Vec::with_capacity(nbrs.len());
    let mut qh = Vec::with_capacity(nbrs.len());
    for u in 0..grid.len() {
        let (pu, du) = (grid.point(u), grid.dist(u));
        for &v in &nbrs[offsets[u] as usize..offsets[u + 1] as usize] {
            let (pv, dv) = (grid.point(v as usize), grid.dist(v as usize));
            let l = pu.dist(pv);
            len.push(l);
            qh.push(l * 0.5 * (1.0 / du + 1.0 / dv));
        }
    }
    QhGraph { grid, len, qh }
}

/// Discretize and build in one step.
pub fn graph_for(domain: &PlanarDomain, h: f64) -> Result<QhGraph> {
    Ok(build_graph(discretize(domain, h)?))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances and predecessor links from a set of sources.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub metric: MetricKind,
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl ShortestPathTree {
    pub fn reached(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Node path from the nearest source to `v`.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        if !self.reached(v) {
            return None;
        }
        let mut path = vec![v];
        let mut u = v;
        while self.pred[u] != u32::MAX {
            u = self.pred[u] as usize;
            path.push(u);
        }
        path.reverse();
        Some(path)
    }
}

impl QhGraph {
    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn domain(&self) -> &PlanarDomain {
        self.grid.domain()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn weights(&self, metric: MetricKind) -> &[f64] {
        match metric {
            MetricKind::Quasihyperbolic => &self.qh,
            MetricKind::Length => &self.len,
        }
    }

    /// Edge slot of `(u, v)` in the adjacency arrays.
    fn edge_slot(&self, u: usize, v: usize) -> Option<usize> {
        let (offsets, nbrs) = self.grid.csr();
        let lo = offsets[u] as usize;
        let row = &nbrs[lo..offsets[u + 1] as usize];
        row.binary_search(&(v as u32)).ok().map(|k| lo + k)
    }

    /// Euclidean length and quasihyperbolic weight of edge `(u, v)`.
    pub fn edge(&self, u: usize, v: usize) -> Option<(f64, f64)> {
        self.edge_slot(u, v).map(|k| (self.len[k], self.qh[k]))
    }

    /// Iterate `(neighbor, euclidean length, qh weight)` for node `u`.
    pub fn edges_of(&self, u: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let (offsets, nbrs) = self.grid.csr();
        (offsets[u] as usize..offsets[u + 1] as usize)
            .map(move |k| (nbrs[k] as usize, self.len[k], self.qh[k]))
    }

    /// Dijkstra from `sources`, stopping once `target` is settled or the
    /// frontier exceeds `radius`. Ties go to the smaller node index, both in
    /// the settle order and in predecessor choice.
    pub fn dijkstra(
        &self,
        metric: MetricKind,
        sources: &[usize],
        target: Option<usize>,
        radius: f64,
    ) -> ShortestPathTree {
        self.dijkstra_filtered(metric, sources, target, radius, |_, _, _| true)
    }

    /// Dijkstra restricted to edges accepted by `allow(u, v, slot)`.
    pub(crate) fn dijkstra_filtered<F>(
        &self,
        metric: MetricKind,
        sources: &[usize],
        target: Option<usize>,
        radius: f64,
        allow: F,
    ) -> ShortestPathTree
    where
        F: Fn(usize, usize, usize) -> bool,
    {
        let n = self.len();
        let w = self.weights(metric);
        let (offsets, nbrs) = self.grid.csr();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapItem { dist: 0.0, node: s as u32 });
        }
        while let Some(HeapItem { dist: du, node }) = heap.pop() {
            let u = node as usize;
            if done[u] || du > dist[u] {
                continue;
            }
            if du > radius {
                break;
            }
            done[u] = true;
            if target == Some(u) {
                break;
            }
            for k in offsets[u] as usize..offsets[u + 1] as usize {
                let v = nbrs[k] as usize;
                if done[v] || !allow(u, v, k) {
                    continue;
                }
                let nd = du + w[k];
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = node;
                    heap.push(HeapItem { dist: nd, node: v as u32 });
                } else if nd == dist[v] && node < pred[v] {
                    pred[v] = node;
                }
            }
        }
        // drop tentative labels beyond what was settled so callers only see exact values
        for v in 0..n {
            if !done[v] {
                dist[v] = f64::INFINITY;
                pred[v] = u32::MAX;
            }
        }
        ShortestPathTree { metric, dist, pred }
    }

    /// Full single-source tree.
    pub fn tree(&self, metric: MetricKind, src: usize) -> ShortestPathTree {
        self.dijkstra(metric, &[src], None, f64::INFINITY)
    }

    /// Distances from `src`, exact at least at every node of `targets`.
    pub fn distances_to(&self, metric: MetricKind, src: usize, targets: &[usize]) -> Vec<f64> {
        let n = self.len();
        let w = self.weights(metric);
        let (offsets, nbrs) = self.grid.csr();
        let mut want = vec![false; n];
        let mut remaining = 0usize;
        for &t in targets {
            if !want[t] {
                want[t] = true;
                remaining += 1;
            }
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: src as u32 });
        while let Some(HeapItem { dist: du, node }) = heap.pop() {
            let u = node as usize;
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            if want[u] {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for k in offsets[u] as usize..offsets[u + 1] as usize {
                let v = nbrs[k] as usize;
                let nd = du + w[k];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(HeapItem { dist: nd, node: v as u32 });
                }
            }
        }
        for v in 0..n {
            if !done[v] {
                dist[v] = f64::INFINITY;
            }
        }
        dist
    }

    /// Graph distance between two nodes.
    pub fn distance(&self, metric: MetricKind, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.dijkstra(metric, &[u], Some(v), f64::INFINITY).dist[v]
    }

    /// Arc through a node path; cumulative lengths are the running edge sums.
    pub fn arc_from_path(&self, path: &[usize]) -> Result<Arc> {
        if path.is_empty() {
            return Err(LabError::InvalidParameter("empty path".into()));
        }
        let g = &self.grid;
        let n = path.len();
        let mut vertices = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut cum_len = Vec::with_capacity(n);
        let mut cum_qh = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n);
        let (mut l, mut q) = (0.0, 0.0);
        for (i, &u) in path.iter().enumerate() {
            if i > 0 {
                let (el, eq) = self.edge(path[i - 1], u).ok_or_else(|| {
                    LabError::Internal(format!("nodes {} and {u} are not adjacent", path[i - 1]))
                })?;
                l += el;
                q += eq;
            }
            vertices.push(g.point(u));
            d.push(g.dist(u));
            cum_len.push(l);
            cum_qh.push(q);
            nodes.push(Some(u));
        }
        Ok(Arc::from_parts(vertices, d, cum_len, cum_qh, nodes))
    }

    /// Shortest path between two nodes.
    pub fn geodesic_nodes(&self, metric: MetricKind, u: usize, v: usize) -> Result<GeodesicResult> {
        let tree = self.dijkstra(metric, &[u], Some(v), f64::INFINITY);
        let path = tree
            .path_to(v)
            .ok_or_else(|| LabError::Internal(format!("node {v} unreachable from {u}")))?;
        let arc = self.arc_from_path(&path)?;
        let distance = arc.metric_length(metric);
        debug_assert_eq!(distance, tree.dist[v]);
        Ok(GeodesicResult {
            arc,
            metric,
            distance,
            h: self.h(),
            src_node: u,
            dst_node: v,
            src_snap: 0.0,
            dst_snap: 0.0,
            extrapolated: None,
            error_estimate: None,
        })
    }

    /// Random graph walk of `steps` edges starting at `start`.
    pub fn random_walk<R: rand::Rng>(&self, start: usize, steps: usize, rng: &mut R) -> Vec<usize> {
        let mut path = vec![start];
        let mut u = start;
        for _ in 0..steps {
            let nb = self.grid.neighbors(u);
            if nb.is_empty() {
                break;
            }
            u = nb[rng.gen_range(0..nb.len())] as usize;
            path.push(u);
        }
        path
    }
}

/// A graph geodesic between two query points.
#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub arc: Arc,
    pub metric: MetricKind,
    pub distance: f64,
    pub h: f64,
    pub src_node: usize,
    pub dst_node: usize,
    /// Euclidean displacement from each query point to its snapped node.
    pub src_snap: f64,
    pub dst_snap: f64,
    pub extrapolated: Option<f64>,
    pub error_estimate: Option<f64>,
}

impl GeodesicResult {
    pub fn to_json(&self) -> Value {
        json!({
            "metric": self.metric.label(),
            "distance": self.distance,
            "h": self.h,
            "extrapolated": self.extrapolated,
            "error_estimate": self.error_estimate,
            "snap": [self.src_snap, self.dst_snap],
            "arc": self.arc.to_coords(),
        })
    }
}

/// Shortest path between two points, each snapped to its nearest visible node.
pub fn shortest_path(graph: &QhGraph, metric: MetricKind, src: Point2, dst: Point2) -> Result<GeodesicResult> {
    let (u, su) = graph.grid().snap(src)?;
    let (v, sv) = graph.grid().snap(dst)?;
    let mut r = graph.geodesic_nodes(metric, u, v)?;
    r.src_snap = su;
    r.dst_snap = sv;
    Ok(r)
}

/// Quasihyperbolic length of an arc by the adaptive trapezoid rule on exact `d`.
pub fn qh_length(graph: &QhGraph, arc: &Arc) -> Result<f64> {
    let dom = graph.domain();
    let v = arc.vertices();
    let mut d = Vec::with_capacity(v.len());
    for &p in v {
        d.push(dom.boundary_distance(p).map_err(|_| LabError::Geometry(p))?);
    }
    let mut total = 0.0;
    for i in 1..v.len() {
        if !dom.segment_inside_known(v[i - 1], d[i - 1], v[i], d[i]) {
            return Err(LabError::Geometry(v[i - 1].lerp(v[i], 0.5)));
        }
        total += qh_segment_length(dom, v[i - 1], d[i - 1], v[i], d[i]);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    pub observed_order: Option<f64>,
    pub extrapolated: Option<f64>,
    pub error_estimate: Option<f64>,
    pub monotone: bool,
    pub converged: bool,
}

/// Richardson extrapolation over the last three of a halving sequence,
/// assuming first-order error in `h`.
pub fn extrapolate(h: &[f64], values: &[f64]) -> Result<Convergence> {
    if h.len() < 3 || h.len() != values.len() {
        return Err(LabError::InvalidParameter("need at least 3 spacings".into()));
    }
    for w in h.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(LabError::InvalidParameter(
                "each spacing must halve the previous one".into(),
            ));
        }
    }
    let n = values.len();
    let (f1, f2, f3) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (f2 - f1, f3 - f2);
    let monotone = values
        .windows(3)
        .all(|w| (w[1] - w[0]) * (w[2] - w[1]) >= 0.0);
    let mut c = Convergence {
        h: h.to_vec(),
        values: values.to_vec(),
        observed_order: None,
        extrapolated: None,
        error_estimate: None,
        monotone,
        converged: false,
    };
    if d2 == 0.0 {
        c.extrapolated = Some(f3);
        c.error_estimate = Some(0.0);
        c.converged = true;
        return Ok(c);
    }
    if d1 == 0.0 || (d2 / d1).abs() >= 1.0 {
        return Ok(c);
    }
    c.observed_order = Some((d1 / d2).abs().log2());
    c.extrapolated = Some(f3 + d2);
    c.error_estimate = Some(d2.abs());
    c.converged = true;
    Ok(c)
}

/// Graph distance between `src` and `dst` on each spacing, then extrapolated.
pub fn converge(
    dom: &PlanarDomain,
    metric: MetricKind,
    src: Point2,
    dst: Point2,
    h_list: &[f64],
) -> Result<Convergence> {
    if h_list.len() < 3 {
        return Err(LabError::InvalidParameter("need at least 3 spacings".into()));
    }
    let mut values = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let g = graph_for(dom, h)?;
        values.push(shortest_path(&g, metric, src, dst)?.distance);
    }
    extrapolate(h_list, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gallery, DomainKind};
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn trapezoid_weights() {
        let g = graph_for(&gallery("halfplane-window").unwrap(), 0.1).unwrap();
        // pick nodes whose d is known: (0, 1.0) has d = 1.0 (distance to y=0 and y=2)
        let a = g.grid().snap(p(0.0, 1.0)).unwrap().0;
        let b = g.grid().snap(p(0.1, 1.0)).unwrap().0;
        let (l, q) = g.edge(a, b).unwrap();
        assert_abs_diff_eq!(l, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 0.1, epsilon = 1e-15);
        let c = g.grid().snap(p(0.2, 1.1)).unwrap().0;
        let (l, _) = g.edge(a, c).unwrap();
        assert_abs_diff_eq!(l, 0.1 * 5f64.sqrt(), epsilon = 1e-15);
        // d = 1.0 and d = 0.5
        let lo = g.grid().snap(p(0.0, 0.5)).unwrap().0;
        let lo2 = g.grid().snap(p(0.0, 0.6)).unwrap().0;
        let (_, q) = g.edge(lo, lo2).unwrap();
        assert_abs_diff_eq!(q, 0.1 * 0.5 * (1.0 / 0.5 + 1.0 / 0.6), epsilon = 1e-15);
    }

    #[test]
    fn direct_weight_formula() {
        // 0.1 × ½(1 + 2) = 0.15
        assert_abs_diff_eq!(0.1 * 0.5 * (1.0 / 1.0 + 1.0 / 0.5), 0.15, epsilon = 1e-15);
    }

    #[test]
    fn identity_path() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 16.0).unwrap();
        let r = shortest_path(&g, MetricKind::Quasihyperbolic, p(0.0, 0.0), p(0.0, 0.0)).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.arc.len(), 1);
    }

    #[test]
    fn distance_equals_arc_length_bitwise() {
        let g = graph_for(&gallery("slit-disk").unwrap(), 1.0 / 32.0).unwrap();
        for m in [MetricKind::Quasihyperbolic, MetricKind::Length] {
            let r = shortest_path(&g, m, p(0.5, 0.2), p(0.5, -0.2)).unwrap();
            assert_eq!(r.distance, r.arc.metric_length(m));
            assert_eq!(r.arc.start(), g.grid().point(r.src_node));
        }
    }

    #[test]
    fn square_length_metric_within_anisotropy() {
        let g = graph_for(&gallery("square").unwrap(), 1.0 / 64.0).unwrap();
        let r = shortest_path(&g, MetricKind::Length, p(0.25, 0.25), p(0.75, 0.75)).unwrap();
        assert!((r.distance - 0.5f64.hypot(0.5)).abs() <= 0.028 * 0.5f64.hypot(0.5));
    }

    #[test]
    fn qh_length_exact_integrals() {
        let strip = PlanarDomain::new(DomainKind::Rectangle { min: p(-10.0, 0.0), max: p(10.0, 10.0) }).unwrap();
        let g = graph_for(&strip, 1.0).unwrap();
        let a = Arc::from_polyline(&strip, &[p(0.0, 1.0), p(0.0, std::f64::consts::E)]).unwrap();
        assert!((qh_length(&g, &a).unwrap() - 1.0).abs() < 2e-3);
        assert_eq!(qh_length(&g, &Arc::single(p(0.0, 1.0), 1.0)).unwrap(), 0.0);
        let disk = gallery("disk").unwrap();
        let gd = graph_for(&disk, 0.25).unwrap();
        let r = Arc::from_polyline(&disk, &[p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        assert!((qh_length(&gd, &r).unwrap() - 2f64.ln()).abs() < 2e-3);
    }

    #[test]
    fn qh_length_rejects_arc_outside() {
        let slit = gallery("slit-disk").unwrap();
        let g = graph_for(&slit, 0.25).unwrap();
        let a = Arc::from_polyline(&gallery("disk").unwrap(), &[p(0.5, 0.1), p(0.5, -0.1)]).unwrap();
        assert!(matches!(qh_length(&g, &a), Err(LabError::Geometry(_))));
    }

    #[test]
    fn extrapolation_cases() {
        let c = extrapolate(&[0.4, 0.2, 0.1], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.extrapolated, Some(1.0));
        assert_eq!(c.error_estimate, Some(0.0));
        // first-order sequence f = 1 + h
        let c = extrapolate(&[0.4, 0.2, 0.1], &[1.4, 1.2, 1.1]).unwrap();
        assert_abs_diff_eq!(c.extrapolated.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.observed_order.unwrap(), 1.0, epsilon = 1e-12);
        let c = extrapolate(&[0.4, 0.2, 0.1], &[1.0, 1.1, 1.3]).unwrap();
        assert!(!c.converged && c.extrapolated.is_none());
        assert!(extrapolate(&[0.4, 0.3, 0.1], &[1.0, 1.0, 1.0]).is_err());
        assert!(extrapolate(&[0.4, 0.2], &[1.0, 1.0]).is_err());
    }
}
