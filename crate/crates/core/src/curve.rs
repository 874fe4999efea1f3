//! Polyline curves carrying euclidean and quasihyperbolic arclength, plus the
//! curve-level constants: double-cone, quasiconvexity and quasigeodesic checks.

use serde::Serialize;

use crate::domain::PlanarDomain;
use crate::engine::{MetricKind, QhGraph};
use crate::error::{LabError, Result};
use crate::geometry::Point2;

/// A polyline with cumulative euclidean and quasihyperbolic lengths.
///
/// `nodes[i]` is the grid node under vertex `i` when the vertex came from a
/// graph path, `None` for interpolated cut points.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    vertices: Vec<Point2>,
    d: Vec<f64>,
    cum_len: Vec<f64>,
    cum_qh: Vec<f64>,
    nodes: Vec<Option<usize>>,
}

impl Arc {
    pub(crate) fn from_parts(
        vertices: Vec<Point2>,
        d: Vec<f64>,
        cum_len: Vec<f64>,
        cum_qh: Vec<f64>,
        nodes: Vec<Option<usize>>,
    ) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert_eq!(vertices.len(), d.len());
        debug_assert_eq!(vertices.len(), cum_len.len());
        debug_assert_eq!(vertices.len(), cum_qh.len());
        debug_assert_eq!(vertices.len(), nodes.len());
        Self { vertices, d, cum_len, cum_qh, nodes }
    }

    pub fn single(p: Point2, d: f64) -> Self {
        Self::from_parts(vec![p], vec![d], vec![0.0], vec![0.0], vec![None])
    }

    /// Arc through arbitrary points of `domain`; quasihyperbolic lengths use
    /// [`qh_segment_length`]. Repeated consecutive points are collapsed.
    pub fn from_polyline(domain: &PlanarDomain, pts: &[Point2]) -> Result<Self> {
        let mut vertices: Vec<Point2> = Vec::with_capacity(pts.len());
        for &p in pts {
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        if vertices.is_empty() {
            return Err(LabError::InvalidParameter("empty polyline".into()));
        }
        let d = vertices
            .iter()
            .map(|&p| domain.boundary_distance(p).map_err(|_| LabError::Geometry(p)))
            .collect::<Result<Vec<f64>>>()?;
        let mut cum_len = vec![0.0];
        let mut cum_qh = vec![0.0];
        for i in 1..vertices.len() {
            let (a, b) = (vertices[i - 1], vertices[i]);
            if !domain.segment_inside_known(a, d[i - 1], b, d[i]) {
                return Err(LabError::Geometry(a.lerp(b, 0.5)));
            }
            cum_len.push(cum_len[i - 1] + a.dist(b));
            cum_qh.push(cum_qh[i - 1] + qh_segment_length(domain, a, d[i - 1], b, d[i]));
        }
        let n = vertices.len();
        Ok(Self::from_parts(vertices, d, cum_len, cum_qh, vec![None; n]))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn cum_len(&self) -> &[f64] {
        &self.cum_len
    }

    pub fn cum_qh(&self) -> &[f64] {
        &self.cum_qh
    }

    pub fn nodes(&self) -> &[Option<usize>] {
        &self.nodes
    }

    pub fn start(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Point2 {
        *self.vertices.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cum_len.last().unwrap()
    }

    pub fn qh_length(&self) -> f64 {
        *self.cum_qh.last().unwrap()
    }

    pub fn metric_length(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Quasihyperbolic => self.qh_length(),
            MetricKind::Length => self.length(),
        }
    }

    pub fn max_d(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn reversed(&self) -> Arc {
        let (tl, tq) = (self.length(), self.qh_length());
        let mut a = self.clone();
        a.vertices.reverse();
        a.d.reverse();
        a.nodes.reverse();
        a.cum_len = self.cum_len.iter().rev().map(|&c| tl - c).collect();
        a.cum_qh = self.cum_qh.iter().rev().map(|&c| tq - c).collect();
        a
    }

    /// Join `self` and `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Arc) -> Result<Arc> {
        if self.end() != other.start() {
            return Err(LabError::InvalidParameter("arcs do not share an endpoint".into()));
        }
        let mut a = self.clone();
        let (l0, q0) = (self.length(), self.qh_length());
        for i in 1..other.len() {
            a.vertices.push(other.vertices[i]);
            a.d.push(other.d[i]);
            a.cum_len.push(l0 + other.cum_len[i]);
            a.cum_qh.push(q0 + other.cum_qh[i]);
            a.nodes.push(other.nodes[i]);
        }
        Ok(a)
    }

    /// Segment index and fraction for euclidean arclength `s` (clamped).
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.len();
        if n == 1 {
            return (0, 0.0);
        }
        let s = s.clamp(0.0, self.length());
        // first vertex with cum_len > s, minus one
        let k = self.cum_len.partition_point(|&c| c <= s);
        if k >= n {
            return (n - 2, 1.0);
        }
        let i = k - 1;
        let seg = self.cum_len[i + 1] - self.cum_len[i];
        (i, if seg > 0.0 { (s - self.cum_len[i]) / seg } else { 0.0 })
    }

    fn point_in_segment(&self, i: usize, f: f64) -> (Point2, f64) {
        if f == 0.0 || self.len() == 1 {
            return (self.vertices[i], self.d[i]);
        }
        if f == 1.0 {
            return (self.vertices[i + 1], self.d[i + 1]);
        }
        (
            self.vertices[i].lerp(self.vertices[i + 1], f),
            self.d[i] + (self.d[i + 1] - self.d[i]) * f,
        )
    }

    /// Quasihyperbolic length of the first `f` fraction of segment `i`,
    /// integrating the linear interpolant of `1/d`; exact at `f = 1`.
    fn partial_qh(&self, i: usize, f: f64) -> f64 {
        if self.len() == 1 || f == 0.0 {
            return 0.0;
        }
        let q = self.cum_qh[i + 1] - self.cum_qh[i];
        if f == 1.0 {
            return q;
        }
        let (wa, wb) = (1.0 / self.d[i], 1.0 / self.d[i + 1]);
        q * 2.0 * (wa * f + 0.5 * (wb - wa) * f * f) / (wa + wb)
    }

    /// Point and interpolated `d` at euclidean arclength `s`.
    pub fn point_at_length(&self, s: f64) -> (Point2, f64) {
        let (i, f) = self.locate(s);
        self.point_in_segment(i, f)
    }

    /// Cumulative quasihyperbolic length at euclidean arclength `s`.
    pub fn qh_at_length(&self, s: f64) -> f64 {
        let (i, f) = self.locate(s);
        self.cum_qh[i] + self.partial_qh(i, f)
    }

    /// Euclidean arclength at cumulative quasihyperbolic length `t`.
    pub fn length_at_qh(&self, t: f64) -> f64 {
        let n = self.len();
        if n == 1 {
            return 0.0;
        }
        let t = t.clamp(0.0, self.qh_length());
        let k = self.cum_qh.partition_point(|&c| c <= t);
        if k >= n {
            return self.length();
        }
        let i = k - 1;
        let q = self.cum_qh[i + 1] - self.cum_qh[i];
        let seg = self.cum_len[i + 1] - self.cum_len[i];
        if q <= 0.0 {
            return self.cum_len[i];
        }
        // solve q * 2 (wa f + (wb - wa) f^2 / 2) / (wa + wb) = target for f in [0, 1]
        let target = (t - self.cum_qh[i]) / q * 0.5 * (1.0 / self.d[i] + 1.0 / self.d[i + 1]);
        let (wa, wb) = (1.0 / self.d[i], 1.0 / self.d[i + 1]);
        let a = 0.5 * (wb - wa);
        let f = if a.abs() < 1e-14 * wa {
            target / wa
        } else {
            let disc = (wa * wa + 4.0 * a * target).max(0.0);
            2.0 * target / (wa + disc.sqrt())
        };
        self.cum_len[i] + f.clamp(0.0, 1.0) * seg
    }

    /// Restriction to euclidean arclengths `[from, to]`, with interpolated cut vertices.
    pub fn subarc(&self, from: f64, to: f64) -> Result<Arc> {
        let total = self.length();
        let eps = 1e-12 * total.max(1.0);
        if !(from >= -eps && from <= to && to <= total + eps) {
            return Err(LabError::InvalidParameter(format!(
                "subarc range [{from}, {to}] outside [0, {total}]"
            )));
        }
        let (from, to) = (from.clamp(0.0, total), to.clamp(0.0, total));
        let (i0, f0) = self.locate(from);
        let (p0, d0) = self.point_in_segment(i0, f0);
        let q0 = self.cum_qh[i0] + self.partial_qh(i0, f0);
        let node_at = |i: usize, f: f64| -> Option<usize> {
            if self.len() == 1 || f == 0.0 {
                self.nodes[i]
            } else if f == 1.0 {
                self.nodes[i + 1]
            } else {
                None
            }
        };
        let mut arc = Arc::from_parts(vec![p0], vec![d0], vec![0.0], vec![0.0], vec![node_at(i0, f0)]);
        if to == from {
            return Ok(arc);
        }
        for j in 0..self.len() {
            let c = self.cum_len[j];
            if c > from && c < to {
                arc.vertices.push(self.vertices[j]);
                arc.d.push(self.d[j]);
                arc.cum_len.push(c - from);
                arc.cum_qh.push(self.cum_qh[j] - q0);
                arc.nodes.push(self.nodes[j]);
            }
        }
        let (i1, f1) = self.locate(to);
        let (p1, d1) = self.point_in_segment(i1, f1);
        if p1 != *arc.vertices.last().unwrap() {
            arc.vertices.push(p1);
            arc.d.push(d1);
            arc.cum_len.push(to - from);
            arc.cum_qh.push(self.cum_qh[i1] + self.partial_qh(i1, f1) - q0);
            arc.nodes.push(node_at(i1, f1));
        }
        Ok(arc)
    }

    /// The point at half the euclidean length.
    pub fn midpoint(&self) -> Result<Point2> {
        if self.length() <= 0.0 {
            return Err(LabError::InvalidParameter("midpoint of a zero-length arc".into()));
        }
        Ok(self.point_at_length(0.5 * self.length()).0)
    }

    /// The point at half the quasihyperbolic length.
    pub fn qh_midpoint(&self) -> Result<Point2> {
        if self.qh_length() <= 0.0 {
            return Err(LabError::InvalidParameter("midpoint of a zero-length arc".into()));
        }
        Ok(self.point_at_length(self.length_at_qh(0.5 * self.qh_length())).0)
    }

    /// Index of the vertex closest (in euclidean arclength) to `s`; lower index on ties.
    pub fn nearest_vertex(&self, s: f64) -> usize {
        let (i, f) = self.locate(s);
        if self.len() == 1 || f <= 0.5 {
            i
        } else {
            i + 1
        }
    }

    pub fn to_coords(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|&p| p.into()).collect()
    }
}

/// Composite trapezoid of `1/d` along `[a, b]`, bisecting while the endpoint
/// boundary distances differ by more than 10%.
pub fn qh_segment_length(domain: &PlanarDomain, a: Point2, da: f64, b: Point2, db: f64) -> f64 {
    fn rec(domain: &PlanarDomain, a: Point2, da: f64, b: Point2, db: f64, depth: u32) -> f64 {
        if (da - db).abs() <= 0.1 * da.min(db) || depth >= 40 {
            return a.dist(b) * 0.5 * (1.0 / da + 1.0 / db);
        }
        let m = a.lerp(b, 0.5);
        let dm = domain.raw_distance(m);
        rec(domain, a, da, m, dm, depth + 1) + rec(domain, m, dm, b, db, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    rec(domain, a, da, b, db, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSample {
    /// Euclidean arclength from the start.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub d: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub constant: f64,
    pub witness: Point2,
    pub witness_length: f64,
    pub profile: Vec<ConeSample>,
}

/// `max_z min{ℓ(arc[x,z]), ℓ(arc[z,y])} / d(z)` over all vertices plus
/// midpoints of segments longer than a tenth of the local boundary distance.
pub fn double_cone_constant(arc: &Arc, domain: &PlanarDomain) -> ConeReport {
    let total = arc.length();
    let mut profile = Vec::with_capacity(arc.len());
    let push = |profile: &mut Vec<ConeSample>, s: f64, p: Point2, d: f64| {
        let ratio = if d > 0.0 { s.min(total - s).max(0.0) / d } else { f64::INFINITY };
        profile.push(ConeSample { s, x: p.x, y: p.y, d, ratio });
    };
    fn refine(
        domain: &PlanarDomain,
        out: &mut Vec<(f64, Point2, f64)>,
        (sa, a, da): (f64, Point2, f64),
        (sb, b, db): (f64, Point2, f64),
        depth: u32,
    ) {
        if sb - sa <= 0.1 * da.min(db) || depth >= 16 {
            return;
        }
        let m = a.lerp(b, 0.5);
        let sm = 0.5 * (sa + sb);
        let dm = if domain.contains(m) { domain.raw_distance(m) } else { 0.0 };
        refine(domain, out, (sa, a, da), (sm, m, dm), depth + 1);
        out.push((sm, m, dm));
        refine(domain, out, (sm, m, dm), (sb, b, db), depth + 1);
    }
    let mut extra = Vec::new();
    for i in 0..arc.len() {
        push(&mut profile, arc.cum_len[i], arc.vertices[i], arc.d[i]);
        if i + 1 < arc.len() {
            extra.clear();
            refine(
                domain,
                &mut extra,
                (arc.cum_len[i], arc.vertices[i], arc.d[i]),
                (arc.cum_len[i + 1], arc.vertices[i + 1], arc.d[i + 1]),
                0,
            );
            for &(s, p, d) in &extra {
                push(&mut profile, s, p, d);
            }
        }
    }
    if arc.len() > 1 && total > 0.0 {
        // the euclidean midpoint always witnesses (ℓ/2) / d(mid)
        let (m, _) = arc.point_at_length(0.5 * total);
        let dm = if domain.contains(m) { domain.raw_distance(m) } else { 0.0 };
        let at = profile.partition_point(|c| c.s < 0.5 * total);
        if profile.get(at).map(|c| c.s) != Some(0.5 * total) {
            let ratio = if dm > 0.0 { 0.5 * total / dm } else { f64::INFINITY };
            profile.insert(at, ConeSample { s: 0.5 * total, x: m.x, y: m.y, d: dm, ratio });
        }
    }
    let mut best = 0;
    for k in 1..profile.len() {
        if profile[k].ratio > profile[best].ratio {
            best = k;
        }
    }
    let w = profile[best];
    ConeReport {
        constant: w.ratio,
        witness: Point2::new(w.x, w.y),
        witness_length: w.s,
        profile,
    }
}

/// `ℓ(arc) / dist_xy`; infinite when the endpoints coincide but the arc has length.
pub fn quasiconvexity_constant(arc: &Arc, dist_xy: f64) -> f64 {
    let l = arc.length();
    if dist_xy <= 0.0 {
        return if l > 0.0 { f64::INFINITY } else { 0.0 };
    }
    l / dist_xy
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasigeodesicCheck {
    pub pass: bool,
    /// Smallest margin over all checked pairs (negative means violated).
    pub worst_margin: f64,
    pub worst_pair: (usize, usize),
    pub pairs_checked: usize,
}

/// Checks `t/λ − μ ≤ dist(arc(t), arc(t')) ≤ λ t + μ` at grid-node vertices
/// of `arc`, parameterized by the metric's own arclength. Up to
/// `pair_samples` evenly spread vertices act as sources and are compared
/// against every other node vertex.
pub fn quasigeodesic_check(
    graph: &QhGraph,
    arc: &Arc,
    metric: MetricKind,
    lambda: f64,
    mu: f64,
    pair_samples: usize,
) -> QuasigeodesicCheck {
    const TOL: f64 = 1e-9;
    let param = match metric {
        MetricKind::Quasihyperbolic => arc.cum_qh(),
        MetricKind::Length => arc.cum_len(),
    };
    let idx: Vec<usize> = (0..arc.len()).filter(|&i| arc.nodes[i].is_some()).collect();
    let mut out = QuasigeodesicCheck {
        pass: true,
        worst_margin: f64::INFINITY,
        worst_pair: (0, 0),
        pairs_checked: 0,
    };
    if idx.len() < 2 {
        return out;
    }
    let m = pair_samples.clamp(1, idx.len());
    let sources: Vec<usize> = if m == 1 {
        vec![idx[0]]
    } else {
        (0..m).map(|k| idx[k * (idx.len() - 1) / (m - 1)]).collect()
    };
    let targets: Vec<usize> = idx.iter().map(|&i| arc.nodes[i].unwrap()).collect();
    for &i in &sources {
        let tree = graph.distances_to(metric, arc.nodes[i].unwrap(), &targets);
        for &j in &idx {
            let dt = (param[i] - param[j]).abs();
            let dist = tree[arc.nodes[j].unwrap()];
            let lower = dist - (dt / lambda - mu);
            let upper = lambda * dt + mu - dist;
            let margin = lower.min(upper);
            out.pairs_checked += 1;
            if margin < out.worst_margin {
                out.worst_margin = margin;
                out.worst_pair = (i, j);
            }
        }
    }
    out.pass = out.worst_margin >= -TOL;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn disk() -> PlanarDomain {
        gallery("disk").unwrap()
    }

    #[test]
    fn subarc_of_segment() {
        let a = Arc::from_polyline(&disk(), &[p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        let s = a.subarc(0.125, 0.375).unwrap();
        assert_eq!(s.vertices(), &[p(0.125, 0.0), p(0.375, 0.0)]);
        assert_eq!(a.subarc(0.0, a.length()).unwrap().vertices(), a.vertices());
        let h = a.length() / 2.0;
        let (l, r) = (a.subarc(0.0, h).unwrap(), a.subarc(h, a.length()).unwrap());
        assert_abs_diff_eq!(l.length(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(r.length(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(l.qh_length() + r.qh_length(), a.qh_length(), epsilon = 1e-12);
        assert!(a.subarc(0.2, 0.1).is_err());
        assert!(a.subarc(0.0, 2.0).is_err());
    }

    #[test]
    fn midpoints() {
        let sq = gallery("halfplane-window").unwrap();
        let a = Arc::from_polyline(&sq, &[p(0.0, 0.5), p(1.0, 0.5)]).unwrap();
        assert_eq!(a.midpoint().unwrap(), p(0.5, 0.5));
        let v = Arc::from_polyline(&sq, &[p(0.0, 0.5), p(1.0, 1.5), p(2.0 - 1e-9, 0.5)]).unwrap();
        let m = v.midpoint().unwrap();
        assert!(m.dist(p(1.0, 1.5)) < 1e-9);
        let n = 400;
        let quarter: Vec<Point2> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_2 * k as f64 / n as f64;
                p(0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let q = Arc::from_polyline(&disk(), &quarter).unwrap();
        let m = q.midpoint().unwrap();
        let t = std::f64::consts::FRAC_PI_4;
        assert!(m.dist(p(0.5 * t.cos(), 0.5 * t.sin())) < 1e-5);
        assert!(Arc::single(p(0.0, 0.0), 1.0).midpoint().is_err());
    }

    #[test]
    fn chord_cone_constant() {
        let a = Arc::from_polyline(&disk(), &[p(-0.5, 0.0), p(0.5, 0.0)]).unwrap();
        let r = double_cone_constant(&a, &disk());
        assert_abs_diff_eq!(r.constant, 0.5, epsilon = 1e-15);
        assert_eq!(r.witness, p(0.0, 0.0));
        let single = double_cone_constant(&Arc::single(p(0.1, 0.1), 0.8), &disk());
        assert_eq!(single.constant, 0.0);
    }

    #[test]
    fn radial_cone_matches_dense_oracle() {
        // oracle: max_t min(t, 0.9 - t) / (1 - t) on 1e5 samples
        let n = 100_000;
        let oracle = (0..=n)
            .map(|k| {
                let t = 0.9 * k as f64 / n as f64;
                t.min(0.9 - t) / (1.0 - t)
            })
            .fold(0.0, f64::max);
        let a = Arc::from_polyline(&disk(), &[p(0.0, 0.0), p(0.9, 0.0)]).unwrap();
        let r = double_cone_constant(&a, &disk());
        assert!((r.constant - oracle).abs() < 1e-3, "{} vs {oracle}", r.constant);
    }

    #[test]
    fn cone_is_reversal_symmetric() {
        let a = Arc::from_polyline(&disk(), &[p(-0.7, 0.1), p(0.0, 0.3), p(0.4, -0.6)]).unwrap();
        let r1 = double_cone_constant(&a, &disk()).constant;
        let r2 = double_cone_constant(&a.reversed(), &disk()).constant;
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-12);
        let rep = double_cone_constant(&a, &disk());
        let max_d = rep.profile.iter().map(|c| c.d).fold(0.0, f64::max);
        assert!(r1 >= 0.5 * a.length() / max_d);
    }

    #[test]
    fn quasiconvexity_values() {
        let sq = gallery("halfplane-window").unwrap();
        let s = Arc::from_polyline(&sq, &[p(0.0, 0.5), p(1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(quasiconvexity_constant(&s, 1.0), 1.0);
        let v = Arc::from_polyline(&sq, &[p(-1.0, 0.5), p(0.0, 1.5), p(1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(quasiconvexity_constant(&v, 2.0), 2f64.sqrt(), epsilon = 1e-15);
        let n = 2000;
        let half: Vec<Point2> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / n as f64;
                p(t.cos() * 0.9, 0.95 + t.sin() * 0.9)
            })
            .collect();
        let c = Arc::from_polyline(&sq, &half).unwrap();
        assert_abs_diff_eq!(quasiconvexity_constant(&c, 1.8), std::f64::consts::FRAC_PI_2, epsilon = 1e-6);
        let lp = Arc::from_polyline(&sq, &[p(0.0, 0.5), p(0.5, 0.5), p(0.0, 0.5)]).unwrap();
        assert!(quasiconvexity_constant(&lp, 0.0).is_infinite());
    }

    #[test]
    fn qh_length_of_radial_segment() {
        // ∫_0^0.5 dt / (1 - t) = log 2
        let a = Arc::from_polyline(&disk(), &[p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        assert!((a.qh_length() - 2f64.ln()).abs() < 2e-3 * 2f64.ln());
    }

    #[test]
    fn qh_inverse_parameterization() {
        let a = Arc::from_polyline(&disk(), &[p(0.0, 0.0), p(0.3, 0.0), p(0.6, 0.2)]).unwrap();
        for k in 0..=20 {
            let s = a.length() * k as f64 / 20.0;
            let t = a.qh_at_length(s);
            assert_abs_diff_eq!(a.length_at_qh(t), s, epsilon = 1e-12);
        }
    }
}
