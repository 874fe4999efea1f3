//! Estimators for John, quasihyperbolic John, LLC₂, LEC, Gehring–Hayman,
//! ball separation and uniformity constants.
//!
//! Every estimate is a maximum over sampled instances. An instance is fully
//! described by its [`Instance`] record and re-evaluates bit-identically
//! through [`evaluate`] on the same grid.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{double_cone_constant, quasiconvexity_constant, Arc};
use crate::domain::PlanarDomain;
use crate::engine::{graph_for, MetricKind, QhGraph};
use crate::error::{LabError, Result};
use crate::geometry::Point2;
use crate::reach::{bottleneck, inner_distance, InnerField};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    John,
    Qhjohn,
    Llc2,
    Lec,
    Gh,
    Bs,
    Uniform,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::John,
        Condition::Qhjohn,
        Condition::Llc2,
        Condition::Lec,
        Condition::Gh,
        Condition::Bs,
        Condition::Uniform,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::John => "john",
            Condition::Qhjohn => "qhjohn",
            Condition::Llc2 => "llc2",
            Condition::Lec => "lec",
            Condition::Gh => "gh",
            Condition::Bs => "bs",
            Condition::Uniform => "uniform",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Condition::John | Condition::Uniform => Direction::Bracketed,
            _ => Direction::LowerBound,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Condition {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| LabError::InvalidParameter(format!("unknown condition '{s}'")))
    }
}

/// Candidate arcs joining a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    QhGeodesic,
    LengthGeodesic,
    /// length geodesics to and from the node of largest boundary distance
    ViaIncenter,
}

pub const ALL_FAMILIES: [Family; 3] = [Family::QhGeodesic, Family::LengthGeodesic, Family::ViaIncenter];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LowerBound,
    UpperBound,
    TwoSided,
    /// min over candidate arcs per pair (upper), max over pairs (lower)
    Bracketed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Estimate {
    Finite { value: f64 },
    Divergent { reason: String },
}

impl Estimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Estimate::Finite { value } => Some(*value),
            Estimate::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Estimate::Finite { .. })
    }
}

/// Which part of a qh geodesic a Gehring–Hayman instance compares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "part", rename_all = "kebab-case")]
pub enum Part {
    Whole,
    /// from x to the given vertex
    Head { vertex: usize },
    /// from the given vertex to y
    Tail { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    Cone { families: Vec<Family>, x: Point2, y: Point2 },
    Uniform { families: Vec<Family>, x: Point2, y: Point2 },
    GehringHayman { x: Point2, y: Point2, part: Part },
    BallSeparation { x: Point2, y: Point2, vertex: usize },
    Llc { center: Point2, r: f64, y: Point2, z: Point2 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub id: String,
    pub instance: Instance,
    #[serde(with = "crate::jsonf")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub h: f64,
    #[serde(with = "crate::jsonf")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub instances: usize,
    pub pairs: usize,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub estimate: Estimate,
    pub direction: Direction,
    pub h: f64,
    pub seed: u64,
    pub samples: SampleInfo,
    pub witnesses: Vec<Witness>,
    pub trend: Vec<TrendPoint>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct EstimatorConfig {
    pub pairs: usize,
    pub seed: u64,
    pub families: Vec<Family>,
    pub points_per_geodesic: usize,
    pub centers: usize,
    pub radii: usize,
    pub c_max: f64,
    pub witnesses: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            pairs: 100,
            seed: 0,
            families: ALL_FAMILIES.to_vec(),
            points_per_geodesic: 8,
            centers: 20,
            radii: 5,
            c_max: 64.0,
            witnesses: 5,
        }
    }
}

const QH: MetricKind = MetricKind::Quasihyperbolic;
const LEN: MetricKind = MetricKind::Length;

fn node(graph: &QhGraph, p: Point2) -> Result<usize> {
    Ok(graph.grid().snap(p)?.0)
}

/// The candidate arc of `family` from `x` to `y`.
pub fn family_arc(graph: &QhGraph, family: Family, x: usize, y: usize) -> Result<Arc> {
    match family {
        Family::QhGeodesic => Ok(graph.geodesic_nodes(QH, x, y)?.arc),
        Family::LengthGeodesic => Ok(graph.geodesic_nodes(LEN, x, y)?.arc),
        Family::ViaIncenter => {
            let c = graph.grid().incenter();
            let a = graph.geodesic_nodes(LEN, x, c)?.arc;
            let b = graph.geodesic_nodes(LEN, c, y)?.arc;
            a.concat(&b)
        }
    }
}

/// Smallest cone constant among the family arcs joining `x` and `y`.
pub fn john_value(graph: &QhGraph, families: &[Family], x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for &f in families {
        let arc = family_arc(graph, f, x, y)?;
        best = best.min(double_cone_constant(&arc, graph.domain()).constant);
    }
    Ok(best)
}

/// Smallest `max(cone, quasiconvexity)` among the family arcs.
pub fn uniform_value(graph: &QhGraph, families: &[Family], x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let dist = inner_distance(graph, x, y);
    let mut best = f64::INFINITY;
    for &f in families {
        let arc = family_arc(graph, f, x, y)?;
        let cone = double_cone_constant(&arc, graph.domain()).constant;
        best = best.min(cone.max(quasiconvexity_constant(&arc, dist)));
    }
    Ok(best)
}

/// `ℓ(part of the qh geodesic) / inner distance of its endpoints`.
pub fn gh_value(graph: &QhGraph, x: usize, y: usize, part: Part) -> Result<f64> {
    if x == y {
        return Ok(1.0);
    }
    let arc = graph.geodesic_nodes(QH, x, y)?.arc;
    gh_value_on(graph, &arc, x, y, part)
}

fn vertex_node(arc: &Arc, k: usize) -> Result<usize> {
    arc.nodes()
        .get(k)
        .copied()
        .flatten()
        .ok_or_else(|| LabError::InvalidParameter(format!("vertex {k} is not on the geodesic")))
}

fn gh_value_on(graph: &QhGraph, arc: &Arc, x: usize, y: usize, part: Part) -> Result<f64> {
    let (len, a, b) = match part {
        Part::Whole => (arc.length(), x, y),
        Part::Head { vertex } => (arc.cum_len()[vertex.min(arc.len() - 1)], x, vertex_node(arc, vertex)?),
        Part::Tail { vertex } => (
            arc.length() - arc.cum_len()[vertex.min(arc.len() - 1)],
            y,
            vertex_node(arc, vertex)?,
        ),
    };
    if a == b {
        return Ok(1.0);
    }
    Ok(len / inner_distance(graph, a, b))
}

/// Ball separation at the vertex `z` of the qh geodesic `arc` from `x` to `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSplit {
    pub z: usize,
    pub dz: f64,
    /// inner distance from z to the nearer endpoint
    pub reach: f64,
    /// largest ball radius around z that a curve from x to y can avoid
    pub threshold: f64,
    /// required constant: min(threshold, reach) / d(z)
    pub required: f64,
}

pub fn ball_split(graph: &QhGraph, arc: &Arc, x: usize, y: usize, vertex: usize) -> Result<BallSplit> {
    let z = vertex_node(arc, vertex)?;
    let dz = graph.grid().dist(z);
    let reach = inner_distance(graph, z, x).min(inner_distance(graph, z, y));
    if reach == 0.0 {
        return Ok(BallSplit { z, dz, reach, threshold: 0.0, required: 0.0 });
    }
    let field = InnerField::new(graph, z, reach);
    let threshold = bottleneck(graph, &field, x, y);
    Ok(BallSplit { z, dz, reach, threshold, required: threshold.min(reach) / dz })
}

/// `r / ρ*`, where `ρ*` is the largest radius ≤ r whose closed ball around
/// `c` can be avoided by a curve from `y` to `z`.
pub fn llc_value(graph: &QhGraph, c: usize, r: f64, y: usize, z: usize) -> Result<f64> {
    if y == z || r <= 0.0 {
        return Ok(1.0);
    }
    for p in [y, z] {
        if inner_distance(graph, c, p) <= r {
            return Err(LabError::InvalidParameter(format!(
                "{:?} lies in the closed ball",
                graph.grid().point(p)
            )));
        }
    }
    let field = InnerField::new(graph, c, r);
    let rho = bottleneck(graph, &field, y, z).min(r);
    Ok(if rho > 0.0 { r / rho } else { f64::INFINITY })
}

/// Re-evaluates an instance on `graph`.
pub fn evaluate(graph: &QhGraph, instance: &Instance) -> Result<f64> {
    match instance {
        Instance::Cone { families, x, y } => john_value(graph, families, node(graph, *x)?, node(graph, *y)?),
        Instance::Uniform { families, x, y } => {
            uniform_value(graph, families, node(graph, *x)?, node(graph, *y)?)
        }
        Instance::GehringHayman { x, y, part } => gh_value(graph, node(graph, *x)?, node(graph, *y)?, *part),
        Instance::BallSeparation { x, y, vertex } => {
            let (x, y) = (node(graph, *x)?, node(graph, *y)?);
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            Ok(ball_split(graph, &arc, x, y, *vertex)?.required)
        }
        Instance::Llc { center, r, y, z } => {
            llc_value(graph, node(graph, *center)?, *r, node(graph, *y)?, node(graph, *z)?)
        }
    }
}

struct Scored {
    instance: Instance,
    value: f64,
}

fn assemble(
    graph: &QhGraph,
    cond: Condition,
    cfg: &EstimatorConfig,
    scored: Vec<Scored>,
    pairs: usize,
    description: String,
    notes: Vec<String>,
) -> ConditionReport {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].value.total_cmp(&scored[a].value).then(a.cmp(&b)));
    let witnesses = order
        .iter()
        .take(cfg.witnesses.max(1))
        .map(|&i| Witness {
            id: format!("{}-{i}", cond.label()),
            instance: scored[i].instance.clone(),
            value: scored[i].value,
        })
        .collect::<Vec<_>>();
    let max = order.first().map(|&i| scored[i].value).unwrap_or(0.0);
    let estimate = if max.is_finite() {
        Estimate::Finite { value: max }
    } else {
        Estimate::Divergent { reason: format!("instance value {max} is unbounded") }
    };
    ConditionReport {
        condition: cond,
        estimate,
        direction: cond.direction(),
        h: graph.h(),
        seed: cfg.seed,
        samples: SampleInfo { instances: scored.len(), pairs, description },
        witnesses,
        trend: Vec::new(),
        notes,
    }
}

fn point(graph: &QhGraph, u: usize) -> Point2 {
    graph.grid().point(u)
}

/// Max over sampled qh geodesics of their cone constant.
pub fn qh_john_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    pair_estimate(graph, Condition::Qhjohn, cfg, &[Family::QhGeodesic])
}

/// Max over pairs of the best cone constant among the candidate families.
pub fn john_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    pair_estimate(graph, Condition::John, cfg, &cfg.families)
}

/// Max over pairs of the best `max(cone, quasiconvexity)` among the families.
pub fn uniformity_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    pair_estimate(graph, Condition::Uniform, cfg, &cfg.families)
}

fn pair_estimate(
    graph: &QhGraph,
    cond: Condition,
    cfg: &EstimatorConfig,
    families: &[Family],
) -> Result<ConditionReport> {
    if families.is_empty() {
        return Err(LabError::InvalidParameter("no candidate families".into()));
    }
    let pairs = sampling::sample_pairs(graph, cfg.pairs, cfg.seed, 1);
    let scored = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Scored> {
            let (px, py) = (point(graph, x), point(graph, y));
            let (instance, value) = match cond {
                Condition::Uniform => (
                    Instance::Uniform { families: families.to_vec(), x: px, y: py },
                    uniform_value(graph, families, x, y)?,
                ),
                _ => (
                    Instance::Cone { families: families.to_vec(), x: px, y: py },
                    john_value(graph, families, x, y)?,
                ),
            };
            Ok(Scored { instance, value })
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = families.iter().map(|f| format!("{f:?}")).collect();
    let description = format!("{} pairs; families {}", pairs.len(), names.join(", "));
    Ok(assemble(graph, cond, cfg, scored, pairs.len(), description, Vec::new()))
}

/// Max ratio of qh-geodesic length to inner distance, over whole geodesics
/// and their subarcs from each endpoint to sampled vertices.
pub fn gehring_hayman_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    let pairs = sampling::sample_pairs(graph, cfg.pairs, cfg.seed, 1);
    let per_pair = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Vec<Scored>> {
            let (px, py) = (point(graph, x), point(graph, y));
            let mut out = Vec::new();
            let make = |part| Instance::GehringHayman { x: px, y: py, part };
            if x == y {
                out.push(Scored { instance: make(Part::Whole), value: 1.0 });
                return Ok(out);
            }
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            out.push(Scored { instance: make(Part::Whole), value: gh_value_on(graph, &arc, x, y, Part::Whole)? });
            for k in sampling::spread(arc.len(), cfg.points_per_geodesic + 2) {
                if k == 0 || k + 1 == arc.len() {
                    continue;
                }
                for part in [Part::Head { vertex: k }, Part::Tail { vertex: k }] {
                    out.push(Scored { instance: make(part), value: gh_value_on(graph, &arc, x, y, part)? });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<Scored> = per_pair.into_iter().flatten().collect();
    let description = format!(
        "{} pairs; whole geodesics plus subarcs at {} vertices each",
        pairs.len(),
        cfg.points_per_geodesic
    );
    Ok(assemble(graph, Condition::Gh, cfg, scored, pairs.len(), description, Vec::new()))
}

/// Max over sampled pairs and geodesic points z of the ball constant
/// needed so that every curve from x to y meets B(z, C d(z)).
pub fn ball_separation_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    let pairs = sampling::sample_pairs(graph, cfg.pairs, cfg.seed, 1);
    let per_pair = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Vec<Scored>> {
            let (px, py) = (point(graph, x), point(graph, y));
            if x == y {
                return Ok(vec![Scored {
                    instance: Instance::BallSeparation { x: px, y: py, vertex: 0 },
                    value: 0.0,
                }]);
            }
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            sampling::spread(arc.len(), cfg.points_per_geodesic)
                .into_iter()
                .map(|k| {
                    Ok(Scored {
                        instance: Instance::BallSeparation { x: px, y: py, vertex: k },
                        value: ball_split(graph, &arc, x, y, k)?.required,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<Scored> = per_pair.into_iter().flatten().collect();
    let description = format!("{} pairs; {} geodesic points each", pairs.len(), cfg.points_per_geodesic);
    Ok(assemble(graph, Condition::Bs, cfg, scored, pairs.len(), description, Vec::new()))
}

/// A sampled LLC₂-type instance: center, radius and two far points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LlcSample {
    pub center: usize,
    pub r: f64,
    pub y: usize,
    pub z: usize,
}

/// Draws up to `radii` instances around `center`; `radius` maps a uniform
/// draw in (0,1) to r. The two far points keep an inner distance of at
/// least r + 3h from the center so the grid resolves the gap.
fn llc_samples<R: Rng>(
    graph: &QhGraph,
    center: usize,
    radii: usize,
    rng: &mut R,
    radius: impl Fn(f64) -> f64,
) -> Vec<LlcSample> {
    let h = graph.h();
    let mut out = Vec::new();
    for _ in 0..radii {
        let r = radius(rng.gen_range(0.05..1.0));
        let mut far = Vec::with_capacity(2);
        for _ in 0..200 {
            let v = sampling::random_node(graph, rng);
            if inner_distance(graph, center, v) > r + 3.0 * h && !far.contains(&v) {
                far.push(v);
                if far.len() == 2 {
                    break;
                }
            }
        }
        if far.len() == 2 {
            out.push(LlcSample { center, r, y: far[0], z: far[1] });
        }
    }
    out
}

fn llc_scored(graph: &QhGraph, samples: &[LlcSample]) -> Result<Vec<Scored>> {
    samples
        .par_iter()
        .map(|s| {
            Ok(Scored {
                instance: Instance::Llc {
                    center: point(graph, s.center),
                    r: s.r,
                    y: point(graph, s.y),
                    z: point(graph, s.z),
                },
                value: llc_value(graph, s.center, s.r, s.y, s.z)?,
            })
        })
        .collect()
}

/// LLC₂ instances: random centers, radii up to the farthest inner
/// distance from the center, and two random points outside the ball.
pub fn llc2_samples(graph: &QhGraph, cfg: &EstimatorConfig) -> Vec<LlcSample> {
    let mut r = sampling::rng(cfg.seed, 21);
    let mut out = Vec::new();
    for _ in 0..cfg.centers {
        let c = sampling::random_node(graph, &mut r);
        let tree = graph.tree(LEN, c);
        let far = tree.dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        out.extend(llc_samples(graph, c, cfg.radii, &mut r, |u| u * far));
    }
    out
}

pub fn llc2_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    let samples = llc2_samples(graph, cfg);
    let scored = llc_scored(graph, &samples)?;
    let description = format!("{} centers x {} radii; {} instances", cfg.centers, cfg.radii, samples.len());
    let mut rep = assemble(graph, Condition::Llc2, cfg, scored, 0, description, Vec::new());
    cap_divergence(&mut rep, cfg.c_max);
    Ok(rep)
}

fn cap_divergence(rep: &mut ConditionReport, c_max: f64) {
    if let Some(v) = rep.estimate.value() {
        if v > c_max {
            rep.estimate = Estimate::Divergent { reason: format!("instance constant {v:.3} exceeds {c_max}") };
        }
    }
}

/// LEC: the smallest c in {1, 2, 4, ...} such that every sampled instance
/// with r < d(x)/c is joined outside the ball of radius r/c.
pub fn lec_constant(graph: &QhGraph, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    let mut c = 1.0;
    let mut notes = Vec::new();
    let mut last = None;
    while c <= cfg.c_max {
        let mut r = sampling::rng(cfg.seed, 30 + c.log2() as u64);
        let mut samples = Vec::new();
        for _ in 0..cfg.centers {
            let x = sampling::random_node(graph, &mut r);
            let dx = graph.grid().dist(x);
            samples.extend(llc_samples(graph, x, cfg.radii, &mut r, |u| u * dx / c));
        }
        let scored = llc_scored(graph, &samples)?;
        let worst = scored.iter().map(|s| s.value).fold(0.0, f64::max);
        notes.push(format!("c={c}: {} instances, worst r/rho {worst:.4}", scored.len()));
        let pass = worst <= c;
        last = Some((c, scored, samples.len()));
        if pass {
            break;
        }
        c *= 2.0;
    }
    let (c_at, scored, n) = last.expect("schedule is nonempty");
    let description = format!("schedule 1..{}; {n} instances at c={c_at}", cfg.c_max);
    let mut rep = assemble(graph, Condition::Lec, cfg, scored, 0, description, notes);
    rep.estimate = if c <= cfg.c_max {
        Estimate::Finite { value: c }
    } else {
        Estimate::Divergent { reason: format!("no c up to {} passes", cfg.c_max) }
    };
    Ok(rep)
}

/// Runs one estimator on a graph.
pub fn estimate(graph: &QhGraph, cond: Condition, cfg: &EstimatorConfig) -> Result<ConditionReport> {
    match cond {
        Condition::John => john_constant(graph, cfg),
        Condition::Qhjohn => qh_john_constant(graph, cfg),
        Condition::Llc2 => llc2_constant(graph, cfg),
        Condition::Lec => lec_constant(graph, cfg),
        Condition::Gh => gehring_hayman_constant(graph, cfg),
        Condition::Bs => ball_separation_constant(graph, cfg),
        Condition::Uniform => uniformity_constant(graph, cfg),
    }
}

/// Growth factor across the schedule at which an estimate is declared
/// divergent.
pub const DIVERGENCE_GROWTH: f64 = 2.0;

/// Runs the estimator on every spacing of `hs` (coarse to fine) and
/// returns the finest report with the trend attached. With three or more
/// spacings, growth by [`DIVERGENCE_GROWTH`] from the first to the last
/// value flags divergence. LEC keeps its own schedule-based verdict.
pub fn estimate_refined(
    domain: &PlanarDomain,
    hs: &[f64],
    cond: Condition,
    cfg: &EstimatorConfig,
) -> Result<ConditionReport> {
    if hs.is_empty() {
        return Err(LabError::InvalidParameter("empty h schedule".into()));
    }
    let mut trend = Vec::with_capacity(hs.len());
    let mut rep = None;
    for &h in hs {
        let g = graph_for(domain, h)?;
        let r = estimate(&g, cond, cfg)?;
        let v = match &r.estimate {
            Estimate::Finite { value } => *value,
            Estimate::Divergent { .. } => f64::INFINITY,
        };
        trend.push(TrendPoint { h, value: v });
        rep = Some(r);
    }
    let mut rep = rep.unwrap();
    if let Some(reason) = trend_divergence(&trend) {
        if cond != Condition::Lec && rep.estimate.is_finite() {
            rep.estimate = Estimate::Divergent { reason };
        }
    }
    rep.trend = trend;
    Ok(rep)
}

/// Divergence verdict of a refinement trend, if any.
pub fn trend_divergence(trend: &[TrendPoint]) -> Option<String> {
    if trend.len() < 3 {
        return None;
    }
    let (first, last) = (trend[0].value, trend[trend.len() - 1].value);
    if first > 0.0 && last >= DIVERGENCE_GROWTH * first {
        Some(format!(
            "estimate grew {:.2}x from h={} to h={}",
            last / first,
            trend[0].h,
            trend[trend.len() - 1].h
        ))
    } else {
        None
    }
}

/// Re-evaluates a witness; returns the fresh value and whether it matches
/// the recorded one bit for bit.
pub fn replay(graph: &QhGraph, w: &Witness) -> Result<(f64, bool)> {
    let v = evaluate(graph, &w.instance)?;
    Ok((v, v.to_bits() == w.value.to_bits()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn n(g: &QhGraph, x: f64, y: f64) -> usize {
        g.grid().snap(p(x, y)).unwrap().0
    }

    fn small(pairs: usize) -> EstimatorConfig {
        EstimatorConfig { pairs, centers: 4, radii: 3, ..Default::default() }
    }

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.label().parse::<Condition>().unwrap(), c);
        }
        assert!("bogus".parse::<Condition>().is_err());
    }

    #[test]
    fn degenerate_pairs() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 16.0).unwrap();
        let x = n(&g, 0.2, 0.3);
        assert_eq!(john_value(&g, &ALL_FAMILIES, x, x).unwrap(), 0.0);
        assert_eq!(uniform_value(&g, &ALL_FAMILIES, x, x).unwrap(), 0.0);
        assert_eq!(gh_value(&g, x, x, Part::Whole).unwrap(), 1.0);
        assert_eq!(llc_value(&g, n(&g, 0.0, 0.0), 0.1, x, x).unwrap(), 1.0);
    }

    #[test]
    fn via_incenter_is_a_one_cone_on_the_disk() {
        // two radii meeting at the center: min(s, L - s) <= 1 - |z| everywhere
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        for (a, b) in [((0.5, 0.0), (0.0, 0.75)), ((-0.8, 0.0), (0.6, 0.0)), ((0.3, 0.3), (-0.5, -0.5))] {
            let v = john_value(&g, &[Family::ViaIncenter], n(&g, a.0, a.1), n(&g, b.0, b.1)).unwrap();
            assert!(v <= 1.0 + 0.05, "{v}");
        }
    }

    #[test]
    fn radial_gehring_hayman_ratio_is_one() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let v = gh_value(&g, n(&g, 0.0, 0.0), n(&g, 0.75, 0.0), Part::Whole).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn ball_separation_disk_example() {
        // every curve from (-1/2, 0) to (1/2, 0) meets B(0, C) once C > 1/2,
        // since a curve avoiding a larger ball cannot start at distance 1/2
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let (x, y) = (n(&g, -0.5, 0.0), n(&g, 0.5, 0.0));
        let arc = g.geodesic_nodes(QH, x, y).unwrap().arc;
        let k = arc.nodes().iter().position(|&u| u == Some(n(&g, 0.0, 0.0))).unwrap();
        let b = ball_split(&g, &arc, x, y, k).unwrap();
        assert_eq!(b.reach, 0.5);
        assert_eq!(b.required, 0.5);
        // z at an endpoint contributes 0
        assert_eq!(ball_split(&g, &arc, x, y, 0).unwrap().required, 0.0);
    }

    #[test]
    fn llc_disk_example() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 64.0).unwrap();
        let v = llc_value(&g, n(&g, 0.0, 0.0), 0.5, n(&g, 0.7, 0.0), n(&g, -0.7, 0.0)).unwrap();
        assert_eq!(v, 1.0);
        assert!(llc_value(&g, n(&g, 0.0, 0.0), 0.8, n(&g, 0.7, 0.0), n(&g, -0.9, 0.0)).is_err());
    }

    #[test]
    fn slit_tip_llc_exceeds_one() {
        let g = graph_for(&gallery("slit-disk").unwrap(), 1.0 / 64.0).unwrap();
        // a ball of radius 0.95 around (-1/16, 0) covers the whole axis left of
        // the tip up to the boundary, so curves between the two sides of the
        // slit cross near (-1, 0): rho is about 0.9375 - h and r/rho about 1.02
        let c = n(&g, -0.0625, 0.0);
        let v = llc_value(&g, c, 0.95, n(&g, 0.9, 0.3), n(&g, 0.9, -0.3)).unwrap();
        assert!(v > 1.0 && v < 0.95 / (0.9375 - 2.0 / 64.0), "{v}");
        // a smaller ball leaves the far crossing free
        let v = llc_value(&g, c, 0.4, n(&g, 0.5, 0.2), n(&g, 0.5, -0.2)).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn disk_lec_passes_at_one() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let r = lec_constant(&g, &small(10)).unwrap();
        assert_eq!(r.estimate, Estimate::Finite { value: 1.0 });
    }

    #[test]
    fn john_is_at_most_qh_john_on_shared_pairs() {
        let g = graph_for(&gallery("slit-disk").unwrap(), 1.0 / 32.0).unwrap();
        let cfg = small(20);
        let a = john_constant(&g, &cfg).unwrap().estimate.value().unwrap();
        let b = qh_john_constant(&g, &cfg).unwrap().estimate.value().unwrap();
        assert!(a <= b, "{a} > {b}");
    }

    #[test]
    fn witnesses_replay_bit_identically() {
        let g = graph_for(&gallery("slit-disk").unwrap(), 1.0 / 32.0).unwrap();
        let cfg = small(6);
        for cond in Condition::ALL {
            let rep = estimate(&g, cond, &cfg).unwrap();
            assert!(!rep.witnesses.is_empty(), "{cond}");
            for w in &rep.witnesses {
                let json = serde_json::to_string(w).unwrap();
                let back: Witness = serde_json::from_str(&json).unwrap();
                let (v, same) = replay(&g, &back).unwrap();
                assert!(same, "{cond} {} {v} vs {}", w.id, w.value);
            }
            if let (Some(v), false) = (rep.estimate.value(), cond == Condition::Lec) {
                assert_eq!(v.to_bits(), rep.witnesses[0].value.to_bits(), "{cond}");
            }
        }
    }

    #[test]
    fn trend_rule() {
        let t = |v: &[f64]| -> Vec<TrendPoint> {
            v.iter().enumerate().map(|(i, &v)| TrendPoint { h: 1.0 / (1 << i) as f64, value: v }).collect()
        };
        assert!(trend_divergence(&t(&[1.0, 1.5, 2.0])).is_some());
        assert!(trend_divergence(&t(&[1.0, 1.5, 1.9])).is_none());
        assert!(trend_divergence(&t(&[1.0, 3.0])).is_none());
    }
}
