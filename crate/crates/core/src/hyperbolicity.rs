//! Gromov hyperbolicity of the quasihyperbolic graph: four-point defect,
//! thin triangles, tripods, and the empirical quasigeodesic stability radius.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{quasigeodesic_check, Arc};
use crate::engine::{GeodesicResult, MetricKind, QhGraph};
use crate::error::{LabError, Result};
use crate::geometry::Point2;
use crate::sampling;

const QH: MetricKind = MetricKind::Quasihyperbolic;

/// ½(k(w,x) + k(w,y) − k(x,y)) from three distances, clamped at 0.
pub fn gromov(dwx: f64, dwy: f64, dxy: f64) -> f64 {
    (0.5 * (dwx + dwy - dxy)).max(0.0)
}

/// Gromov product `(x|y)_w` on the graph; points are snapped to nodes.
pub fn gromov_product(graph: &QhGraph, w: Point2, x: Point2, y: Point2) -> Result<f64> {
    let g = graph.grid();
    let (w, x, y) = (g.snap(w)?.0, g.snap(x)?.0, g.snap(y)?.0);
    Ok(gromov_nodes(graph, w, x, y))
}

pub fn gromov_nodes(graph: &QhGraph, w: usize, x: usize, y: usize) -> f64 {
    let dw = graph.distances_to(QH, w, &[x, y]);
    gromov(dw[x], dw[y], graph.distance(QH, x, y))
}

/// Four-point defect of six pairwise distances: half the gap between the
/// largest and the middle of the three pairing sums.
pub fn four_point_defect(dxy: f64, dzw: f64, dxz: f64, dyw: f64, dxw: f64, dyz: f64) -> f64 {
    let mut s = [dxy + dzw, dxz + dyw, dxw + dyz];
    s.sort_by(|a, b| b.total_cmp(a));
    (0.5 * (s[0] - s[1])).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub nodes: [usize; 4],
    pub points: [Point2; 4],
    pub defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub four_point: f64,
    pub thin_triangle: f64,
    pub tripod_insize: f64,
    pub quadruples: usize,
    pub triangles: usize,
    pub pool: usize,
    pub seed: u64,
    pub h: f64,
    pub witness: Quadruple,
}

/// Pool and triangle sizes for [`delta_estimate`].
#[derive(Clone, Copy, Debug)]
pub struct DeltaConfig {
    pub farthest: usize,
    pub random: usize,
    pub triangles: usize,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        DeltaConfig { farthest: 48, random: 0, triangles: 20 }
    }
}

/// Four-point δ over `quadruple_samples` random quadruples, with the
/// thin-triangle and tripod measurements on a few triangles.
pub fn delta_four_point(graph: &QhGraph, quadruple_samples: usize, seed: u64) -> Result<DeltaEstimate> {
    delta_estimate(graph, quadruple_samples, seed, DeltaConfig::default())
}

/// Node pool: farthest-point sampling in k from a random start, plus
/// uniform random nodes. Returns the pool and its distance matrix.
fn node_pool(graph: &QhGraph, seed: u64, cfg: DeltaConfig) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = graph.len();
    let mut r = sampling::rng(seed, 11);
    let mut pool = vec![sampling::random_node(graph, &mut r)];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut near = vec![f64::INFINITY; n];
    loop {
        let last = *pool.last().unwrap();
        let t = graph.tree(QH, last);
        for (m, &d) in near.iter_mut().zip(&t.dist) {
            *m = m.min(d);
        }
        rows.push(t.dist);
        if pool.len() >= cfg.farthest.max(1) {
            break;
        }
        let mut best = 0;
        for v in 1..n {
            if near[v] > near[best] {
                best = v;
            }
        }
        if near[best] == 0.0 {
            break;
        }
        pool.push(best);
    }
    for _ in 0..cfg.random {
        pool.push(sampling::random_node(graph, &mut r));
    }
    let extra: Vec<Vec<f64>> = pool[rows.len()..]
        .par_iter()
        .map(|&u| graph.distances_to(QH, u, &pool))
        .collect();
    rows.extend(extra);
    let m = pool.len();
    let mat = (0..m)
        .map(|i| (0..m).map(|j| if i <= j { rows[i][pool[j]] } else { rows[j][pool[i]] }).collect())
        .collect();
    (pool, mat)
}

pub fn delta_estimate(
    graph: &QhGraph,
    quadruple_samples: usize,
    seed: u64,
    cfg: DeltaConfig,
) -> Result<DeltaEstimate> {
    if quadruple_samples < 100 {
        return Err(LabError::InvalidParameter("need at least 100 quadruples".into()));
    }
    let (pool, dm) = node_pool(graph, seed, cfg);
    let m = pool.len();
    let mut r = sampling::rng(seed, 12);
    let g = graph.grid();
    let mut best = Quadruple {
        nodes: [pool[0]; 4],
        points: [g.point(pool[0]); 4],
        defect: 0.0,
    };
    use rand::Rng;
    for _ in 0..quadruple_samples {
        let q = [r.gen_range(0..m), r.gen_range(0..m), r.gen_range(0..m), r.gen_range(0..m)];
        let [x, y, z, w] = q;
        let e = four_point_defect(dm[x][y], dm[z][w], dm[x][z], dm[y][w], dm[x][w], dm[y][z]);
        if e > best.defect {
            let nodes = q.map(|i| pool[i]);
            best = Quadruple { nodes, points: nodes.map(|u| g.point(u)), defect: e };
        }
    }
    let tris: Vec<[usize; 3]> = (0..cfg.triangles)
        .map(|_| {
            let a = r.gen_range(0..m);
            let mut b = r.gen_range(0..m);
            while m > 1 && dm[a][b] == 0.0 {
                b = r.gen_range(0..m);
            }
            let c = r.gen_range(0..m);
            [pool[a], pool[b], pool[c]]
        })
        .collect();
    let measured: Vec<(f64, f64)> = tris
        .par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let sides = triangle(graph, t[0], t[1], t[2])?;
            let thin = thin_triangle(graph, &sides);
            let tp = tripod_points(graph, &sides)?;
            Ok((thin, tp.insize))
        })
        .collect::<Result<_>>()?;
    let thin = measured.iter().fold(0.0f64, |a, b| a.max(b.0));
    let insize = measured.iter().fold(0.0f64, |a, b| a.max(b.1));
    Ok(DeltaEstimate {
        four_point: best.defect,
        thin_triangle: thin,
        tripod_insize: insize,
        quadruples: quadruple_samples,
        triangles: tris.len(),
        pool: m,
        seed,
        h: graph.h(),
        witness: best,
    })
}

/// Geodesic triangle with sides [x,y], [y,z], [z,x].
pub fn triangle(graph: &QhGraph, x: usize, y: usize, z: usize) -> Result<[GeodesicResult; 3]> {
    Ok([
        graph.geodesic_nodes(QH, x, y)?,
        graph.geodesic_nodes(QH, y, z)?,
        graph.geodesic_nodes(QH, z, x)?,
    ])
}

fn arc_nodes(arc: &Arc) -> Vec<usize> {
    arc.nodes().iter().flatten().copied().collect()
}

/// Largest k-distance from a point of the graph path `from` to the graph
/// path `to`. Along an edge of weight w with endpoint distances a and b the
/// distance is min(a + t, b + w − t), whose largest value is (a + b + w)/2;
/// edges the two paths share contribute nothing beyond their endpoints.
fn directed_hausdorff(graph: &QhGraph, from: &[usize], to: &[usize]) -> f64 {
    if from.is_empty() || to.is_empty() {
        return 0.0;
    }
    let t = graph.dijkstra(QH, to, None, f64::INFINITY);
    let shared = path_edges(to);
    let mut worst = from.iter().map(|&u| t.dist[u]).fold(0.0, f64::max);
    for e in from.windows(2) {
        if shared.contains(&edge_key(e[0], e[1])) {
            continue;
        }
        if let Some((_, w)) = graph.edge(e[0], e[1]) {
            worst = worst.max(0.5 * (t.dist[e[0]] + t.dist[e[1]] + w));
        }
    }
    worst
}

pub(crate) fn edge_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

pub(crate) fn path_edges(path: &[usize]) -> HashSet<(usize, usize)> {
    path.windows(2).map(|e| edge_key(e[0], e[1])).collect()
}

/// Largest distance from a point of one side to the union of the other two.
pub fn thin_triangle(graph: &QhGraph, sides: &[GeodesicResult; 3]) -> f64 {
    let nodes: Vec<Vec<usize>> = sides.iter().map(|s| arc_nodes(&s.arc)).collect();
    (0..3)
        .map(|i| {
            let other: Vec<usize> = nodes[(i + 1) % 3].iter().chain(&nodes[(i + 2) % 3]).copied().collect();
            directed_hausdorff(graph, &nodes[i], &other)
        })
        .fold(0.0, f64::max)
}

/// Point of a graph-path arc at cumulative qh length `t`, with the qh
/// lengths back to the two nodes of its edge.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ArcPoint {
    pub point: Point2,
    pub d: f64,
    pub t: f64,
    pub edge: (usize, usize),
    pub back: f64,
    pub ahead: f64,
}

pub fn arc_point(arc: &Arc, t: f64) -> Result<ArcPoint> {
    let node = |i: usize| {
        arc.nodes()[i].ok_or_else(|| LabError::InvalidParameter("arc vertex is not a grid node".into()))
    };
    let t = t.clamp(0.0, arc.qh_length());
    let (p, d) = arc.point_at_length(arc.length_at_qh(t));
    if arc.len() == 1 {
        let u = node(0)?;
        return Ok(ArcPoint { point: p, d, t, edge: (u, u), back: 0.0, ahead: 0.0 });
    }
    let q = arc.cum_qh();
    let i = q.partition_point(|&c| c <= t).clamp(1, arc.len() - 1) - 1;
    Ok(ArcPoint {
        point: p,
        d,
        t,
        edge: (node(i)?, node(i + 1)?),
        back: (t - q[i]).max(0.0),
        ahead: (q[i + 1] - t).max(0.0),
    })
}

/// k-distance between two arc points through the nodes of their edges.
/// With `same_arc`, the stretch of arc between them is also a candidate.
pub fn arc_point_distance(graph: &QhGraph, a: &ArcPoint, b: &ArcPoint, same_arc: bool) -> f64 {
    let mut best = if same_arc { (a.t - b.t).abs() } else { f64::INFINITY };
    let ta = [b.edge.0, b.edge.1];
    for (src, off) in [(a.edge.0, a.back), (a.edge.1, a.ahead)] {
        let dist = graph.distances_to(QH, src, &ta);
        best = best.min(off + dist[b.edge.0] + b.back).min(off + dist[b.edge.1] + b.ahead);
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripodPoints {
    /// on [x,y], [y,z], [z,x]
    pub u: Point2,
    pub v: Point2,
    pub w: Point2,
    /// (y|z)_x, (x|z)_y, (x|y)_z
    pub products: [f64; 3],
    pub sides: [f64; 3],
    pub insize: f64,
    /// k(u,v), k(v,w), k(w,u)
    pub pair_distances: [f64; 3],
    pub u_point: ArcPoint,
    pub v_point: ArcPoint,
    pub w_point: ArcPoint,
}

fn orient(side: &GeodesicResult, from: usize, to: usize) -> Result<Arc> {
    if side.src_node == from && side.dst_node == to {
        Ok(side.arc.clone())
    } else if side.src_node == to && side.dst_node == from {
        Ok(side.arc.reversed())
    } else {
        Err(LabError::InvalidParameter("triangle sides do not share endpoints".into()))
    }
}

/// Internal points of the tripod map on a geodesic triangle, and its insize.
pub fn tripod_points(graph: &QhGraph, sides: &[GeodesicResult; 3]) -> Result<TripodPoints> {
    let (x, y) = (sides[0].src_node, sides[0].dst_node);
    let z = if sides[1].src_node == y || sides[1].src_node == x {
        sides[1].dst_node
    } else {
        sides[1].src_node
    };
    let xy = orient(&sides[0], x, y)?;
    let yz = orient(&sides[1], y, z)?;
    let zx = orient(&sides[2], z, x)?;
    let (kxy, kyz, kzx) = (xy.qh_length(), yz.qh_length(), zx.qh_length());
    let products = [gromov(kxy, kzx, kyz), gromov(kxy, kyz, kzx), gromov(kzx, kyz, kxy)];
    let sides_len = [kxy, kyz, kzx];
    let tol = 1e-9 * (1.0 + kxy + kyz + kzx);
    for (p, s) in products.iter().zip(sides_len) {
        if *p > s + tol {
            return Err(LabError::Inconsistent(format!("Gromov product {p} exceeds side {s}")));
        }
    }
    let u = arc_point(&xy, products[0])?;
    let v = arc_point(&yz, products[1])?;
    let w = arc_point(&zx, products[2])?;
    let pair_distances = [
        arc_point_distance(graph, &u, &v, false),
        arc_point_distance(graph, &v, &w, false),
        arc_point_distance(graph, &w, &u, false),
    ];
    let insize = pair_distances.iter().copied().fold(0.0, f64::max);
    Ok(TripodPoints {
        u: u.point,
        v: v.point,
        w: w.point,
        products,
        sides: sides_len,
        insize,
        pair_distances,
        u_point: u,
        v_point: v,
        w_point: w,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub index: usize,
    pub from: Point2,
    pub to: Point2,
    pub hausdorff: Option<f64>,
    pub rejected: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub lambda: f64,
    pub mu: f64,
    pub max: f64,
    pub records: Vec<StabilityRecord>,
}

/// Symmetric Hausdorff k-distance between two graph-path arcs.
pub fn hausdorff_between(graph: &QhGraph, a: &Arc, b: &Arc) -> Result<f64> {
    let (na, nb) = (arc_nodes(a), arc_nodes(b));
    if na.len() != a.len() || nb.len() != b.len() {
        return Err(LabError::InvalidParameter("arc vertices must all be grid nodes".into()));
    }
    Ok(directed_hausdorff(graph, &na, &nb).max(directed_hausdorff(graph, &nb, &na)))
}

/// Symmetric Hausdorff k-distance between a graph-path arc and the
/// geodesic joining its endpoints.
pub fn hausdorff_to_geodesic(graph: &QhGraph, arc: &Arc) -> Result<f64> {
    let nodes = arc_nodes(arc);
    if nodes.len() != arc.len() {
        return Err(LabError::InvalidParameter("arc vertices must all be grid nodes".into()));
    }
    let geo = graph.geodesic_nodes(QH, nodes[0], *nodes.last().unwrap())?;
    hausdorff_between(graph, arc, &geo.arc)
}

/// Largest Hausdorff distance between the `(λ, μ)`-quasigeodesic samples
/// and their geodesics. Samples failing the quasigeodesic check are
/// rejected with the worst margin as the reason.
pub fn stability_r(
    graph: &QhGraph,
    lambda: f64,
    mu: f64,
    samples: &[Arc],
    pair_samples: usize,
) -> Result<StabilityEstimate> {
    let records: Vec<StabilityRecord> = samples
        .par_iter()
        .enumerate()
        .map(|(index, arc)| -> Result<StabilityRecord> {
            let check = quasigeodesic_check(graph, arc, QH, lambda, mu, pair_samples);
            let (hausdorff, rejected) = if check.pass {
                (Some(hausdorff_to_geodesic(graph, arc)?), None)
            } else {
                (None, Some(format!("quasigeodesic margin {:.3e}", check.worst_margin)))
            };
            Ok(StabilityRecord { index, from: arc.start(), to: arc.end(), hausdorff, rejected })
        })
        .collect::<Result<_>>()?;
    let max = records.iter().filter_map(|r| r.hausdorff).fold(0.0, f64::max);
    Ok(StabilityEstimate { lambda, mu, max, records })
}
