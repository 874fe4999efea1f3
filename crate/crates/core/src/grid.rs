//! Regular-grid discretization of a planar domain.

use std::collections::VecDeque;

use crate::domain::PlanarDomain;
use crate::error::{LabError, Result};
use crate::geometry::Point2;

const NONE: u32 = u32::MAX;

/// Half of the 16-direction stencil (king moves plus knight moves); the
/// other half is the negation.
pub const FORWARD_STENCIL: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (1, 1),
    (-1, 1),
    (2, 1),
    (1, 2),
    (-1, 2),
    (-2, 1),
];

/// Grid nodes of spacing `h` inside a domain, with the boundary distance at
/// every node and the admissible stencil adjacency. Immutable once built.
#[derive(Debug, Clone)]
pub struct GridDomain {
    domain: PlanarDomain,
    h: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    index: Vec<u32>,
    coords: Vec<(i64, i64)>,
    points: Vec<Point2>,
    dist: Vec<f64>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    dropped_cutoff: usize,
    dropped_disconnected: usize,
}

/// Clip a grid of spacing `h` to `dom`, drop nodes with `d <= h/2` and keep
/// the largest stencil-connected component.
pub fn discretize(dom: &PlanarDomain, h: f64) -> Result<GridDomain> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(LabError::InvalidParameter(format!("grid spacing must be positive, got {h}")));
    }
    let (lo, hi) = dom.bounding_box();
    let i0 = (lo.x / h).ceil() as i64;
    let i1 = (hi.x / h).floor() as i64;
    let j0 = (lo.y / h).ceil() as i64;
    let j1 = (hi.y / h).floor() as i64;
    if i1 < i0 || j1 < j0 {
        return Err(LabError::Resolution { h, reason: "no grid nodes in the bounding box".into() });
    }
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(LabError::InvalidParameter(format!("grid of {nx}x{ny} nodes is too large")));
    }

    let mut cand_index = vec![NONE; nx * ny];
    let mut coords = Vec::new();
    let mut points = Vec::new();
    let mut dist = Vec::new();
    let mut inside = 0usize;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = Point2::new(i as f64 * h, j as f64 * h);
            if !dom.contains(p) {
                continue;
            }
            inside += 1;
            let d = dom.raw_distance(p);
            if d > 0.5 * h {
                cand_index[(j - j0) as usize * nx + (i - i0) as usize] = points.len() as u32;
                coords.push((i, j));
                points.push(p);
                dist.push(d);
            }
        }
    }
    if points.is_empty() {
        return Err(LabError::Resolution {
            h,
            reason: "every node lies within h/2 of the boundary".into(),
        });
    }
    let dropped_cutoff = inside - points.len();

    let adj = build_adjacency(dom, &cand_index, &coords, &points, &dist, i0, j0, nx, ny);

    // connected components, largest kept (ties go to the component of the lowest node)
    let n = points.len();
    let mut comp = vec![NONE; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if comp[s] != NONE {
            continue;
        }
        let c = sizes.len() as u32;
        let mut size = 0usize;
        let mut queue = VecDeque::from([s]);
        comp[s] = c;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if comp[v as usize] == NONE {
                    comp[v as usize] = c;
                    queue.push_back(v as usize);
                }
            }
        }
        sizes.push(size);
    }
    let best = (0..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
    if sizes[best] * 2 < n {
        return Err(LabError::Resolution {
            h,
            reason: format!(
                "grid splits into {} pieces, the largest holds {} of {} nodes",
                sizes.len(),
                sizes[best],
                n
            ),
        });
    }

    let mut remap = vec![NONE; n];
    let mut g = GridDomain {
        domain: dom.clone(),
        h,
        i0,
        j0,
        nx,
        ny,
        index: vec![NONE; nx * ny],
        coords: Vec::with_capacity(sizes[best]),
        points: Vec::with_capacity(sizes[best]),
        dist: Vec::with_capacity(sizes[best]),
        offsets: Vec::with_capacity(sizes[best] + 1),
        neighbors: Vec::new(),
        dropped_cutoff,
        dropped_disconnected: n - sizes[best],
    };
    for u in 0..n {
        if comp[u] == best as u32 {
            let k = g.points.len() as u32;
            remap[u] = k;
            let (i, j) = coords[u];
            g.index[(j - j0) as usize * nx + (i - i0) as usize] = k;
            g.coords.push(coords[u]);
            g.points.push(points[u]);
            g.dist.push(dist[u]);
        }
    }
    g.offsets.push(0);
    for u in 0..n {
        if remap[u] == NONE {
            continue;
        }
        let mut nb: Vec<u32> = adj[u].iter().map(|&v| remap[v as usize]).collect();
        nb.sort_unstable();
        g.neighbors.extend_from_slice(&nb);
        g.offsets.push(g.neighbors.len() as u32);
    }
    Ok(g)
}

#[allow(clippy::too_many_arguments)]
fn build_adjacency(
    dom: &PlanarDomain,
    index: &[u32],
    coords: &[(i64, i64)],
    points: &[Point2],
    dist: &[f64],
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); points.len()];
    for u in 0..points.len() {
        let (i, j) = coords[u];
        for &(di, dj) in &FORWARD_STENCIL {
            let (a, b) = (i + di - i0, j + dj - j0);
            if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny {
                continue;
            }
            let v = index[b as usize * nx + a as usize];
            if v == NONE {
                continue;
            }
            let vi = v as usize;
            if dom.segment_inside_known(points[u], dist[u], points[vi], dist[vi]) {
                adj[u].push(v);
                adj[vi].push(u as u32);
            }
        }
    }
    adj
}

impl GridDomain {
    pub fn domain(&self) -> &PlanarDomain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, u: usize) -> Point2 {
        self.points[u]
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn dist(&self, u: usize) -> f64 {
        self.dist[u]
    }

    pub fn dists(&self) -> &[f64] {
        &self.dist
    }

    pub fn grid_coords(&self, u: usize) -> (i64, i64) {
        self.coords[u]
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }

    pub(crate) fn csr(&self) -> (&[u32], &[u32]) {
        (&self.offsets, &self.neighbors)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn dropped_cutoff(&self) -> usize {
        self.dropped_cutoff
    }

    pub fn dropped_disconnected(&self) -> usize {
        self.dropped_disconnected
    }

    /// Node at integer grid coordinates, if included.
    pub fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        let (a, b) = (i - self.i0, j - self.j0);
        if a < 0 || b < 0 || a as usize >= self.nx || b as usize >= self.ny {
            return None;
        }
        let v = self.index[b as usize * self.nx + a as usize];
        (v != NONE).then_some(v as usize)
    }

    /// Node of maximal boundary distance (lowest index on ties).
    pub fn incenter(&self) -> usize {
        let mut best = 0;
        for u in 1..self.len() {
            if self.dist[u] > self.dist[best] {
                best = u;
            }
        }
        best
    }

    /// Nearest included node visible from `p` along a straight segment.
    /// Returns the node and the snap displacement.
    pub fn snap(&self, p: Point2) -> Result<(usize, f64)> {
        let dp = self.domain.boundary_distance(p)?;
        let ci = (p.x / self.h).round() as i64;
        let cj = (p.y / self.h).round() as i64;
        let max_r = self.nx.max(self.ny) as i64 + 2;
        let mut best: Option<(usize, f64)> = None;
        for r in 0..=max_r {
            for j in (cj - r)..=(cj + r) {
                for i in (ci - r)..=(ci + r) {
                    if (i - ci).abs() != r && (j - cj).abs() != r {
                        continue;
                    }
                    let Some(u) = self.node_at(i, j) else { continue };
                    let dd = p.dist(self.points[u]);
                    let better = match best {
                        None => true,
                        Some((b, bd)) => dd < bd || (dd == bd && u < b),
                    };
                    if better && self.domain.segment_inside_known(p, dp, self.points[u], self.dist[u])
                    {
                        best = Some((u, dd));
                    }
                }
            }
            if let Some((_, bd)) = best {
                // nodes in later rings are at least (r + 1/2) h away
                if bd <= (r as f64 + 0.5) * self.h {
                    break;
                }
            }
        }
        best.ok_or(LabError::Membership(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;

    #[test]
    fn disk_center_kept_boundary_dropped() {
        let g = discretize(&gallery("disk").unwrap(), 0.5).unwrap();
        let c = g.node_at(0, 0).unwrap();
        assert_eq!(g.dist(c), 1.0);
        assert!(g.node_at(2, 0).is_none());
    }

    #[test]
    fn unit_square_quarter_spacing() {
        let g = discretize(&gallery("square").unwrap(), 0.25).unwrap();
        assert_eq!(g.len(), 9);
        let mut xs: Vec<(f64, f64)> = g.points().iter().map(|p| (p.x, p.y)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect: Vec<(f64, f64)> = [0.25, 0.5, 0.75]
            .iter()
            .flat_map(|&x| [0.25, 0.5, 0.75].iter().map(move |&y| (x, y)))
            .collect();
        assert_eq!(xs, expect);
        // every node clears the h/2 cutoff
        assert!(g.dists().iter().all(|&d| d >= 0.25));
        // row-major order
        assert_eq!(g.point(1), Point2::new(0.5, 0.25));
    }

    #[test]
    fn slit_blocks_edges() {
        let g = discretize(&gallery("slit-disk").unwrap(), 0.125).unwrap();
        for u in 0..g.len() {
            for &v in g.neighbors(u) {
                let (a, b) = (g.point(u), g.point(v as usize));
                if a.x > 0.0 && b.x > 0.0 {
                    assert!(a.y.signum() == b.y.signum(), "edge crosses slit: {a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn corridor_needs_resolution() {
        let r = gallery("rooms-and-corridors(3)").unwrap();
        assert!(matches!(discretize(&r, 0.25), Err(LabError::Resolution { .. })));
        assert!(discretize(&r, 1.0 / 16.0).is_ok());
    }

    #[test]
    fn snap_reports_displacement() {
        let g = discretize(&gallery("disk").unwrap(), 0.25).unwrap();
        let (u, disp) = g.snap(Point2::new(0.3, 0.05)).unwrap();
        assert_eq!(g.point(u), Point2::new(0.25, 0.0));
        assert!((disp - Point2::new(0.05, 0.05).norm()).abs() < 1e-15);
        assert!(g.snap(Point2::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn snap_respects_slit() {
        let g = discretize(&gallery("slit-disk").unwrap(), 0.125).unwrap();
        let (u, _) = g.snap(Point2::new(0.5, -0.01)).unwrap();
        assert!(g.point(u).y < 0.0);
    }
}
