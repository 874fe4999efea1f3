//! Bounded planar domains: analytic primitives and polygons with holes.
//!
//! Every domain exposes a membership predicate, the euclidean distance to
//! the boundary `d(p)`, and a segment-containment test used to decide which
//! grid edges are admissible. Slits count as boundary: two points on
//! opposite sides of a slit are never joined by a straight segment.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::geometry::{
    point_segment_distance, segments_intersect, signed_area, Point2,
};

/// Names accepted by [`gallery`].
pub const GALLERY: &[&str] = &[
    "disk",
    "square",
    "halfplane-window",
    "slit-disk",
    "cusp",
    "rooms-and-corridors",
    "snowflake-polygon",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    Disk { center: Point2, radius: f64 },
    Rectangle { min: Point2, max: Point2 },
    /// Disk minus the radius from the center to the rightmost boundary point.
    SlitDisk { center: Point2, radius: f64 },
    /// Outward cusp between `y = x^p` and `y = -x^p`, capped by a half disk.
    Cusp { exponent: f64 },
    RoomsAndCorridors { levels: usize },
    SnowflakePolygon { level: usize },
    Polygon { outer: Vec<Point2>, holes: Vec<Vec<Point2>> },
}

#[derive(Debug, Clone)]
enum Shape {
    Disk { center: Point2, radius: f64 },
    Rect { min: Point2, max: Point2 },
    Slit { center: Point2, radius: f64 },
    Poly(PolygonRegion),
}

#[derive(Debug, Clone)]
struct PolygonRegion {
    rings: Vec<Vec<Point2>>,
    edges: Vec<(Point2, Point2)>,
    min: Point2,
    max: Point2,
}

impl PolygonRegion {
    fn new(outer: &[Point2], holes: &[Vec<Point2>]) -> Result<Self> {
        if outer.len() < 3 {
            return Err(LabError::InvalidParameter(
                "polygon outer ring needs at least 3 vertices".into(),
            ));
        }
        let mut rings = Vec::with_capacity(1 + holes.len());
        // outer counter-clockwise, holes clockwise
        rings.push(normalize_ring(outer, true));
        for h in holes {
            if h.len() < 3 {
                return Err(LabError::InvalidParameter(
                    "polygon hole needs at least 3 vertices".into(),
                ));
            }
            rings.push(normalize_ring(h, false));
        }
        let mut edges = Vec::new();
        for ring in &rings {
            for i in 0..ring.len() {
                edges.push((ring[i], ring[(i + 1) % ring.len()]));
            }
        }
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &rings[0] {
            if !p.is_finite() {
                return Err(LabError::InvalidParameter("non-finite polygon vertex".into()));
            }
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Ok(Self { rings, edges, min, max })
    }

    fn contains(&self, p: Point2) -> bool {
        // even-odd rule over all rings
        let mut inside = false;
        for &(a, b) in &self.edges {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside && self.edge_distance(p) > 0.0
    }

    fn edge_distance(&self, p: Point2) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    fn crosses_boundary(&self, a: Point2, b: Point2) -> bool {
        self.edges.iter().any(|&(p, q)| segments_intersect(a, b, p, q))
    }
}

fn normalize_ring(ring: &[Point2], ccw: bool) -> Vec<Point2> {
    let mut r: Vec<Point2> = ring.to_vec();
    if r.len() > 1 && r.first() == r.last() {
        r.pop();
    }
    if (signed_area(&r) > 0.0) != ccw {
        r.reverse();
    }
    r
}

/// An open, bounded, connected planar domain.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    name: String,
    kind: DomainKind,
    shape: Shape,
}

impl PlanarDomain {
    pub fn new(kind: DomainKind) -> Result<Self> {
        let shape = match &kind {
            DomainKind::Disk { center, radius } => {
                positive("radius", *radius)?;
                Shape::Disk { center: *center, radius: *radius }
            }
            DomainKind::Rectangle { min, max } => {
                if !(max.x > min.x && max.y > min.y) {
                    return Err(LabError::InvalidParameter("empty rectangle".into()));
                }
                Shape::Rect { min: *min, max: *max }
            }
            DomainKind::SlitDisk { center, radius } => {
                positive("radius", *radius)?;
                Shape::Slit { center: *center, radius: *radius }
            }
            DomainKind::Cusp { exponent } => {
                if !(*exponent > 1.0) {
                    return Err(LabError::InvalidParameter(
                        "cusp exponent must exceed 1".into(),
                    ));
                }
                Shape::Poly(PolygonRegion::new(&cusp_outline(*exponent), &[])?)
            }
            DomainKind::RoomsAndCorridors { levels } => {
                if *levels == 0 {
                    return Err(LabError::InvalidParameter("need at least one room".into()));
                }
                Shape::Poly(PolygonRegion::new(&rooms_outline(*levels), &[])?)
            }
            DomainKind::SnowflakePolygon { level } => {
                if *level > 6 {
                    return Err(LabError::InvalidParameter("snowflake level above 6".into()));
                }
                Shape::Poly(PolygonRegion::new(&snowflake_outline(*level), &[])?)
            }
            DomainKind::Polygon { outer, holes } => Shape::Poly(PolygonRegion::new(outer, holes)?),
        };
        let name = kind_label(&kind);
        Ok(Self { name, kind, shape })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match &self.shape {
            Shape::Disk { center, radius } => p.dist(*center) < *radius,
            Shape::Rect { min, max } => p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y,
            Shape::Slit { center, radius } => {
                p.dist(*center) < *radius && slit_distance(*center, *radius, p) > 0.0
            }
            Shape::Poly(poly) => poly.contains(p),
        }
    }

    /// Distance to the boundary, `d(p) = dist(p, ∂X)`.
    pub fn boundary_distance(&self, p: Point2) -> Result<f64> {
        if !self.contains(p) {
            return Err(LabError::Membership(p));
        }
        Ok(self.raw_distance(p))
    }

    /// Boundary distance without the membership check; callers guarantee `p` is inside.
    pub(crate) fn raw_distance(&self, p: Point2) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => radius - p.dist(*center),
            Shape::Rect { min, max } => (p.x - min.x)
                .min(max.x - p.x)
                .min(p.y - min.y)
                .min(max.y - p.y),
            Shape::Slit { center, radius } => {
                (radius - p.dist(*center)).min(slit_distance(*center, *radius, p))
            }
            Shape::Poly(poly) => poly.edge_distance(p),
        }
    }

    /// True when the closed segment `[a, b]` lies in the domain. `da`, `db`
    /// are the boundary distances of the endpoints (both must be inside).
    pub(crate) fn segment_inside_known(&self, a: Point2, da: f64, b: Point2, db: f64) -> bool {
        if a.dist(b) < da.max(db) {
            return true;
        }
        match &self.shape {
            Shape::Disk { .. } | Shape::Rect { .. } => true,
            Shape::Slit { center, radius } => {
                let tip = *center + Point2::new(*radius, 0.0);
                !segments_intersect(a, b, *center, tip)
            }
            Shape::Poly(poly) => !poly.crosses_boundary(a, b),
        }
    }

    pub fn segment_inside(&self, a: Point2, b: Point2) -> bool {
        match (self.boundary_distance(a), self.boundary_distance(b)) {
            (Ok(da), Ok(db)) => self.segment_inside_known(a, da, b, db),
            _ => false,
        }
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        match &self.shape {
            Shape::Disk { center, radius } | Shape::Slit { center, radius } => (
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            ),
            Shape::Rect { min, max } => (*min, *max),
            Shape::Poly(poly) => (poly.min, poly.max),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.dist(hi)
    }

    /// Boundary pieces as polylines: closed rings repeat their first vertex,
    /// slits appear as open two-point polylines.
    pub fn boundary_polylines(&self, spacing: f64) -> Vec<Vec<Point2>> {
        match &self.shape {
            Shape::Disk { center, radius } => vec![circle(*center, *radius, spacing)],
            Shape::Slit { center, radius } => vec![
                circle(*center, *radius, spacing),
                vec![*center, *center + Point2::new(*radius, 0.0)],
            ],
            Shape::Rect { min, max } => vec![vec![
                *min,
                Point2::new(max.x, min.y),
                *max,
                Point2::new(min.x, max.y),
                *min,
            ]],
            Shape::Poly(poly) => poly
                .rings
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.push(r[0]);
                    r
                })
                .collect(),
        }
    }

    /// Dense point sampling of the boundary with at most `spacing` between samples.
    pub fn boundary_samples(&self, spacing: f64) -> Vec<Point2> {
        let mut out = Vec::new();
        for line in self.boundary_polylines(spacing) {
            for w in line.windows(2) {
                let n = ((w[0].dist(w[1]) / spacing).ceil() as usize).max(1);
                for k in 0..n {
                    out.push(w[0].lerp(w[1], k as f64 / n as f64));
                }
            }
            if let Some(last) = line.last() {
                out.push(*last);
            }
        }
        out
    }

    /// The JSON domain-file representation.
    pub fn to_file_value(&self) -> Value {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                json!({"kind": "disk", "params": {"cx": center.x, "cy": center.y, "r": radius}})
            }
            DomainKind::Rectangle { min, max } => json!({"kind": "rectangle",
                "params": {"x0": min.x, "y0": min.y, "x1": max.x, "y1": max.y}}),
            DomainKind::SlitDisk { center, radius } => {
                json!({"kind": "slit-disk", "params": {"cx": center.x, "cy": center.y, "r": radius}})
            }
            DomainKind::Cusp { exponent } => json!({"kind": "cusp", "params": {"exponent": exponent}}),
            DomainKind::RoomsAndCorridors { levels } => {
                json!({"kind": "rooms-and-corridors", "params": {"levels": levels}})
            }
            DomainKind::SnowflakePolygon { level } => {
                json!({"kind": "snowflake-polygon", "params": {"level": level}})
            }
            DomainKind::Polygon { outer, holes } => {
                let ring = |r: &Vec<Point2>| r.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>();
                json!({"kind": "polygon", "outer": ring(outer),
                       "holes": holes.iter().map(ring).collect::<Vec<_>>()})
            }
        }
    }

    pub fn from_file_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| LabError::InvalidParameter("domain file must be a JSON object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| LabError::InvalidParameter("missing \"kind\"".into()))?;
        let empty = Map::new();
        let params = obj.get("params").and_then(Value::as_object).unwrap_or(&empty);
        let num = |key: &str, default: f64| -> Result<f64> {
            match params.get(key) {
                None => Ok(default),
                Some(v) => v.as_f64().ok_or_else(|| {
                    LabError::InvalidParameter(format!("parameter '{key}' must be a number"))
                }),
            }
        };
        let kind = match kind {
            "disk" => DomainKind::Disk {
                center: Point2::new(num("cx", 0.0)?, num("cy", 0.0)?),
                radius: num("r", 1.0)?,
            },
            "rectangle" | "square" => DomainKind::Rectangle {
                min: Point2::new(num("x0", 0.0)?, num("y0", 0.0)?),
                max: Point2::new(num("x1", 1.0)?, num("y1", 1.0)?),
            },
            "slit-disk" => DomainKind::SlitDisk {
                center: Point2::new(num("cx", 0.0)?, num("cy", 0.0)?),
                radius: num("r", 1.0)?,
            },
            "cusp" | "outward-cusp" => DomainKind::Cusp { exponent: num("exponent", 2.0)? },
            "rooms-and-corridors" => DomainKind::RoomsAndCorridors {
                levels: num("levels", 3.0)? as usize,
            },
            "snowflake-polygon" => DomainKind::SnowflakePolygon { level: num("level", 2.0)? as usize },
            "polygon" => {
                let ring = |v: &Value| -> Result<Vec<Point2>> {
                    let arr: Vec<[f64; 2]> = serde_json::from_value(v.clone())?;
                    Ok(arr.into_iter().map(Point2::from).collect())
                };
                let outer = ring(
                    obj.get("outer")
                        .ok_or_else(|| LabError::InvalidParameter("polygon needs \"outer\"".into()))?,
                )?;
                let holes = match obj.get("holes") {
                    None | Some(Value::Null) => Vec::new(),
                    Some(Value::Array(hs)) => hs.iter().map(ring).collect::<Result<_>>()?,
                    Some(_) => {
                        return Err(LabError::InvalidParameter("\"holes\" must be an array".into()))
                    }
                };
                DomainKind::Polygon { outer, holes }
            }
            other => return Err(LabError::UnknownDomain(other.to_string())),
        };
        PlanarDomain::new(kind)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)?;
        Self::from_file_value(&v)
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("{what} must be positive")))
    }
}

fn slit_distance(center: Point2, radius: f64, p: Point2) -> f64 {
    point_segment_distance(p, center, center + Point2::new(radius, 0.0))
}

fn kind_label(kind: &DomainKind) -> String {
    match kind {
        DomainKind::Disk { .. } => "disk".into(),
        DomainKind::Rectangle { .. } => "rectangle".into(),
        DomainKind::SlitDisk { .. } => "slit-disk".into(),
        DomainKind::Cusp { exponent } => format!("cusp({exponent})"),
        DomainKind::RoomsAndCorridors { levels } => format!("rooms-and-corridors({levels})"),
        DomainKind::SnowflakePolygon { level } => format!("snowflake-polygon({level})"),
        DomainKind::Polygon { .. } => "polygon".into(),
    }
}

fn circle(center: Point2, radius: f64, spacing: f64) -> Vec<Point2> {
    let n = ((2.0 * PI * radius / spacing).ceil() as usize).max(16);
    (0..=n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            center + Point2::new(radius * t.cos(), radius * t.sin())
        })
        .collect()
}

fn cusp_outline(p: f64) -> Vec<Point2> {
    const CURVE: usize = 256;
    const CAP: usize = 128;
    let mut pts = Vec::with_capacity(2 * CURVE + CAP);
    for i in 0..=CURVE {
        let x = i as f64 / CURVE as f64;
        pts.push(Point2::new(x, x.powf(p)));
    }
    // half disk centered at (1, 0) closing the cusp on the right
    for k in 1..CAP {
        let t = PI / 2.0 - PI * k as f64 / CAP as f64;
        pts.push(Point2::new(1.0 + t.cos(), t.sin()));
    }
    for i in (1..=CURVE).rev() {
        let x = i as f64 / CURVE as f64;
        pts.push(Point2::new(x, -x.powf(p)));
    }
    pts
}

/// Unit rooms in a row, joined by corridors of width 1/4 and length 1/2.
fn rooms_outline(n: usize) -> Vec<Point2> {
    const PITCH: f64 = 1.5;
    const LO: f64 = 0.375;
    const HI: f64 = 0.625;
    let mut pts = Vec::new();
    for k in 0..n {
        let x0 = k as f64 * PITCH;
        if k > 0 {
            pts.push(Point2::new(x0, LO));
        }
        pts.push(Point2::new(x0, 0.0));
        pts.push(Point2::new(x0 + 1.0, 0.0));
        if k + 1 < n {
            pts.push(Point2::new(x0 + 1.0, LO));
        }
    }
    for k in (0..n).rev() {
        let x0 = k as f64 * PITCH;
        if k + 1 < n {
            pts.push(Point2::new(x0 + 1.0, HI));
        }
        pts.push(Point2::new(x0 + 1.0, 1.0));
        pts.push(Point2::new(x0, 1.0));
        if k > 0 {
            pts.push(Point2::new(x0, HI));
        }
    }
    pts
}

/// Koch snowflake with unit circumradius.
fn snowflake_outline(level: usize) -> Vec<Point2> {
    let mut ring: Vec<Point2> = (0..3)
        .map(|k| {
            let t = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
            Point2::new(t.cos(), t.sin())
        })
        .collect();
    let (s, c) = (-PI / 3.0).sin_cos();
    for _ in 0..level {
        let mut next = Vec::with_capacity(ring.len() * 4);
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let third = (b - a) * (1.0 / 3.0);
            let p1 = a + third;
            let p2 = a + third * 2.0;
            // rotate clockwise: outward for a counter-clockwise ring
            let peak = p1 + Point2::new(third.x * c - third.y * s, third.x * s + third.y * c);
            next.extend_from_slice(&[a, p1, peak, p2]);
        }
        ring = next;
    }
    ring
}

/// Look up a corpus domain. Names may carry a parameter, e.g. `cusp(3)` or
/// `rooms-and-corridors(4)`. A path to an existing JSON file is also accepted.
pub fn gallery(name: &str) -> Result<PlanarDomain> {
    let (base, arg) = match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
        _ => (name, None),
    };
    let arg_num = |default: f64| -> Result<f64> {
        match arg {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| LabError::UnknownDomain(name.to_string())),
        }
    };
    let kind = match base {
        "disk" => DomainKind::Disk { center: Point2::new(0.0, 0.0), radius: 1.0 },
        "square" => DomainKind::Rectangle { min: Point2::new(0.0, 0.0), max: Point2::new(1.0, 1.0) },
        "halfplane-window" => DomainKind::Rectangle {
            min: Point2::new(-2.0, 0.0),
            max: Point2::new(2.0, 2.0),
        },
        "slit-disk" => DomainKind::SlitDisk { center: Point2::new(0.0, 0.0), radius: 1.0 },
        "cusp" | "outward-cusp" => DomainKind::Cusp { exponent: arg_num(2.0)? },
        "rooms-and-corridors" => DomainKind::RoomsAndCorridors { levels: arg_num(3.0)? as usize },
        "snowflake-polygon" => DomainKind::SnowflakePolygon { level: arg_num(2.0)? as usize },
        _ => {
            let path = Path::new(name);
            if path.exists() {
                return PlanarDomain::load(path);
            }
            return Err(LabError::UnknownDomain(name.to_string()));
        }
    };
    let label = if arg.is_some() || matches!(base, "disk" | "square" | "halfplane-window" | "slit-disk")
    {
        name.to_string()
    } else {
        kind_label(&kind)
    };
    Ok(PlanarDomain::new(kind)?.with_name(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn disk_distances() {
        let d = gallery("disk").unwrap();
        assert_abs_diff_eq!(d.boundary_distance(p(0.5, 0.0)).unwrap(), 0.5);
        assert_abs_diff_eq!(d.boundary_distance(p(0.0, 0.0)).unwrap(), 1.0);
        assert!(matches!(d.boundary_distance(p(1.0, 0.0)), Err(LabError::Membership(_))));
        assert!(d.boundary_distance(p(2.0, 0.0)).is_err());
    }

    #[test]
    fn square_distance() {
        let s = gallery("square").unwrap();
        assert_abs_diff_eq!(s.boundary_distance(p(0.25, 0.5)).unwrap(), 0.25);
    }

    #[test]
    fn slit_is_boundary() {
        let s = gallery("slit-disk").unwrap();
        assert!(!s.contains(p(0.5, 0.0)));
        assert!(!s.contains(p(0.0, 0.0)));
        assert!(s.contains(p(-0.5, 0.0)));
        assert_abs_diff_eq!(s.boundary_distance(p(0.5, 0.1)).unwrap(), 0.1, epsilon = 1e-15);
        assert!(!s.segment_inside(p(0.5, 0.05), p(0.5, -0.05)));
        assert!(s.segment_inside(p(-0.5, 0.05), p(-0.5, -0.05)));
    }

    #[test]
    fn cusp_shape() {
        let c = gallery("cusp").unwrap();
        assert!(c.contains(p(0.5, 0.2)));
        assert!(!c.contains(p(0.5, 0.3)));
        assert!(c.contains(p(1.9, 0.0)));
        assert!(!c.contains(p(-0.1, 0.0)));
        // width at x = 0.1 is about 2 * 0.01
        assert!(c.boundary_distance(p(0.1, 0.0)).unwrap() < 0.011);
    }

    #[test]
    fn rooms_connect_through_corridors() {
        let r = gallery("rooms-and-corridors(3)").unwrap();
        assert!(r.contains(p(1.25, 0.5)));
        assert!(!r.contains(p(1.25, 0.8)));
        assert!(r.contains(p(3.5, 0.5)));
        assert_abs_diff_eq!(r.boundary_distance(p(1.25, 0.5)).unwrap(), 0.125, epsilon = 1e-12);
        let (lo, hi) = r.bounding_box();
        assert_eq!((lo.x, hi.x), (0.0, 4.0));
    }

    #[test]
    fn snowflake_is_star_shaped_around_origin() {
        let s = gallery("snowflake-polygon(3)").unwrap();
        assert!(s.contains(p(0.0, 0.0)));
        // inradius of the base triangle is 1/2
        assert!(s.boundary_distance(p(0.0, 0.0)).unwrap() >= 0.5 - 1e-12);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(gallery("bogus"), Err(LabError::UnknownDomain(_))));
    }

    #[test]
    fn polygon_with_hole_and_winding() {
        let outer = vec![p(0.0, 0.0), p(0.0, 4.0), p(4.0, 4.0), p(4.0, 0.0)]; // clockwise
        let hole = vec![p(1.0, 1.0), p(3.0, 1.0), p(3.0, 3.0), p(1.0, 3.0)];
        let d = PlanarDomain::new(DomainKind::Polygon { outer, holes: vec![hole] }).unwrap();
        assert!(!d.contains(p(2.0, 2.0)));
        assert!(d.contains(p(0.5, 2.0)));
        assert_abs_diff_eq!(d.boundary_distance(p(0.5, 2.0)).unwrap(), 0.5);
        assert!(!d.segment_inside(p(0.5, 2.0), p(3.5, 2.0)));
    }

    #[test]
    fn file_round_trip() {
        for name in GALLERY {
            let d = gallery(name).unwrap();
            let back = PlanarDomain::from_file_value(&d.to_file_value()).unwrap();
            assert_eq!(back.kind(), d.kind());
        }
        let v: Value = serde_json::from_str(
            r#"{"kind":"polygon","outer":[[0,0],[2,0],[2,1],[0,1]],"holes":[]}"#,
        )
        .unwrap();
        let d = PlanarDomain::from_file_value(&v).unwrap();
        assert_abs_diff_eq!(d.boundary_distance(p(1.0, 0.5)).unwrap(), 0.5);
    }
}
