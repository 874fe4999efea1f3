//! Mechanical checks of the quantitative statements about the qh metric.
//!
//! Each suite samples instances, evaluates every inequality of the argument
//! on them and reports the worst margin. Sampling can falsify a universal
//! statement but never certify it; a passing suite means no counterexample
//! was found at this resolution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conditions::{
    ball_split, family_arc, llc2_samples, llc_value, Condition, ConditionReport, EstimatorConfig, Family, ALL_FAMILIES,
};
use crate::curve::{double_cone_constant, quasigeodesic_check, Arc};
use crate::hyperbolicity::{
    arc_point_distance, edge_key, hausdorff_between, path_edges, triangle, tripod_points, TripodPoints,
};
use crate::reach::{bottleneck, inner_distance, InnerField};
use crate::engine::{GeodesicResult, MetricKind, QhGraph};
use crate::error::{LabError, Result};
use crate::geometry::Point2;
use crate::sampling::{self, Slack};

const QH: MetricKind = MetricKind::Quasihyperbolic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    LogRatio,
    LogLength,
    ConeChain,
    Necessity,
    Sufficiency,
    HyperbolicJohn,
    LlcGhs,
    LecLlc,
    JohnGhs,
    UniformCoherence,
}

impl Statement {
    pub const ALL: [Statement; 10] = [
        Statement::LogRatio,
        Statement::LogLength,
        Statement::ConeChain,
        Statement::Necessity,
        Statement::Sufficiency,
        Statement::HyperbolicJohn,
        Statement::LlcGhs,
        Statement::LecLlc,
        Statement::JohnGhs,
        Statement::UniformCoherence,
    ];

    /// Identifier used on the command line and in reports.
    pub fn id(self) -> &'static str {
        match self {
            Statement::LogRatio => "eq2.1",
            Statement::LogLength => "eq2.2",
            Statement::ConeChain => "lemma3.1",
            Statement::Necessity => "thm1.2-nec",
            Statement::Sufficiency => "thm1.2-suf",
            Statement::HyperbolicJohn => "thm1.3",
            Statement::LlcGhs => "prop3.6",
            Statement::LecLlc => "prop3.9",
            Statement::JohnGhs => "prop3.10",
            Statement::UniformCoherence => "cor3.11",
        }
    }

    pub fn alias(self) -> &'static str {
        match self {
            Statement::LogRatio => "log-ratio",
            Statement::LogLength => "log-length",
            Statement::ConeChain => "cone-chain",
            Statement::Necessity => "necessity",
            Statement::Sufficiency => "sufficiency",
            Statement::HyperbolicJohn => "hyperbolic-john",
            Statement::LlcGhs => "llc-ghs",
            Statement::LecLlc => "lec-llc",
            Statement::JohnGhs => "john-ghs",
            Statement::UniformCoherence => "uniform-coherence",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Statement::LogRatio => "k(x,y) >= |log(d(x)/d(y))|",
            Statement::LogLength => "k-length >= log(1 + length / min d)",
            Statement::ConeChain => "double cone arcs are qh quasigeodesics with lambda = 3a",
            Statement::Necessity => "qh-John implies k(x,y) <= 6a log(1+2a) under d(u) <= 2 min d",
            Statement::Sufficiency => "the k <= A bound makes qh geodesics double 3e^{2A}-cone arcs",
            Statement::HyperbolicJohn => "John and delta-hyperbolic implies qh-John",
            Statement::LlcGhs => "LLC2 and GHS bound the qh-John constant by C0 Cgh Cbs",
            Statement::LecLlc => "qh-John and LEC imply LLC2 with c = 3ab(b+1) and ball separation",
            Statement::JohnGhs => "John and GHS bound the qh-John constant by Cgh(a+1)(1+Cbs)",
            Statement::UniformCoherence => "uniform iff John, Gehring-Hayman and ball separation",
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Statement {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Statement::ALL
            .into_iter()
            .find(|st| st.id() == s || st.alias() == s)
            .ok_or_else(|| LabError::InvalidParameter(format!("unknown statement '{s}'")))
    }
}

impl Serialize for Statement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for Statement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisNotMet { reason: String },
    Skipped { reason: String },
}

/// One inequality `lhs ≤ rhs` that did not hold within its slack.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    pub instance: usize,
    pub check: String,
    #[serde(with = "crate::jsonf")]
    pub lhs: f64,
    #[serde(with = "crate::jsonf")]
    pub rhs: f64,
    #[serde(with = "crate::jsonf")]
    pub slack: f64,
    pub witness: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub statement: Statement,
    pub instances: usize,
    pub checks: usize,
    /// Smallest `rhs − lhs` over all checks; positive means room to spare.
    #[serde(with = "crate::jsonf")]
    pub worst_margin: f64,
    pub worst_check: String,
    /// Smallest `rhs − lhs + slack`; negative exactly when there are failures.
    #[serde(with = "crate::jsonf")]
    pub worst_excess: f64,
    /// Largest slack granted to a single check.
    #[serde(with = "crate::jsonf")]
    pub slack_budget: f64,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
    pub hypothesis_failure_count: usize,
    pub hypothesis_failures: Vec<Failure>,
    /// Checks that held with less room than their slack.
    pub small_margins: usize,
    pub small_margin_instances: Vec<usize>,
    pub verdict: Verdict,
    pub details: Value,
}

impl VerificationOutcome {
    pub fn skipped(statement: Statement, reason: impl Into<String>, details: Value) -> Self {
        let reason = reason.into();
        let mut out = tally(statement, Vec::new(), details);
        out.verdict = Verdict::Skipped { reason };
        out
    }

    pub fn hypothesis_not_met(statement: Statement, reason: impl Into<String>, details: Value) -> Self {
        let mut out = tally(statement, Vec::new(), details);
        out.verdict = Verdict::HypothesisNotMet { reason: reason.into() };
        out
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn summary_line(&self) -> String {
        let status = match &self.verdict {
            Verdict::Pass => "pass".to_string(),
            Verdict::Fail => "fail".to_string(),
            Verdict::HypothesisNotMet { reason } => format!("hypothesis-not-met ({reason})"),
            Verdict::Skipped { reason } => format!("skipped ({reason})"),
        };
        format!(
            "statement={} instances={} worst_margin={} failures={} status={status}",
            self.statement,
            self.instances,
            fmt_margin(self.worst_margin),
            self.failure_count,
        )
    }
}

fn fmt_margin(m: f64) -> String {
    if m.is_finite() {
        format!("{m:+.4}")
    } else if m > 0.0 {
        "+inf".into()
    } else {
        "-inf".into()
    }
}

const MAX_LISTED: usize = 50;

#[derive(Clone, Debug)]
struct Check {
    label: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
    hypothesis: bool,
}

/// The checks evaluated on one sampled instance.
#[derive(Clone, Debug)]
pub(crate) struct InstanceChecks {
    witness: Value,
    checks: Vec<Check>,
}

impl InstanceChecks {
    pub(crate) fn new(witness: Value) -> Self {
        InstanceChecks { witness, checks: Vec::new() }
    }

    /// Claim `lhs ≤ rhs` up to `slack`.
    pub(crate) fn le(&mut self, label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) {
        self.checks.push(Check { label: label.into(), lhs, rhs, slack, hypothesis: false });
    }

    /// A hypothesis of the statement; when it fails the instance is set
    /// aside instead of counting against the statement.
    pub(crate) fn assume_le(&mut self, label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) {
        self.checks.push(Check { label: label.into(), lhs, rhs, slack, hypothesis: true });
    }
}

fn excess(c: &Check) -> f64 {
    let e = c.rhs - c.lhs + c.slack;
    if e.is_nan() {
        f64::NEG_INFINITY
    } else {
        e
    }
}

/// Folds per-instance checks, in instance order, into an outcome.
pub(crate) fn tally(statement: Statement, instances: Vec<InstanceChecks>, details: Value) -> VerificationOutcome {
    let mut out = VerificationOutcome {
        statement,
        instances: instances.len(),
        checks: 0,
        worst_margin: f64::INFINITY,
        worst_check: String::new(),
        worst_excess: f64::INFINITY,
        slack_budget: 0.0,
        failure_count: 0,
        failures: Vec::new(),
        hypothesis_failure_count: 0,
        hypothesis_failures: Vec::new(),
        small_margins: 0,
        small_margin_instances: Vec::new(),
        verdict: Verdict::Pass,
        details,
    };
    let failure = |i: usize, c: &Check, w: &Value| Failure {
        instance: i,
        check: c.label.clone(),
        lhs: c.lhs,
        rhs: c.rhs,
        slack: c.slack,
        witness: w.clone(),
    };
    for (i, inst) in instances.iter().enumerate() {
        if let Some(c) = inst.checks.iter().find(|c| c.hypothesis && excess(c) < 0.0) {
            out.hypothesis_failure_count += 1;
            if out.hypothesis_failures.len() < MAX_LISTED {
                out.hypothesis_failures.push(failure(i, c, &inst.witness));
            }
            continue;
        }
        for c in &inst.checks {
            out.checks += 1;
            out.slack_budget = out.slack_budget.max(c.slack);
            let margin = if (c.rhs - c.lhs).is_nan() { f64::NEG_INFINITY } else { c.rhs - c.lhs };
            if margin < out.worst_margin || out.worst_check.is_empty() {
                out.worst_margin = margin;
                out.worst_check = format!("{}#{i}", c.label);
            }
            let e = excess(c);
            out.worst_excess = out.worst_excess.min(e);
            if e < 0.0 {
                out.failure_count += 1;
                if out.failures.len() < MAX_LISTED {
                    out.failures.push(failure(i, c, &inst.witness));
                }
            } else if margin < c.slack {
                out.small_margins += 1;
                if out.small_margin_instances.last() != Some(&i) && out.small_margin_instances.len() < MAX_LISTED {
                    out.small_margin_instances.push(i);
                }
            }
        }
    }
    out.verdict = if out.failure_count > 0 {
        Verdict::Fail
    } else if out.hypothesis_failure_count > 0 {
        Verdict::HypothesisNotMet {
            reason: format!("{} instances violate a hypothesis", out.hypothesis_failure_count),
        }
    } else {
        Verdict::Pass
    };
    out
}

/// Sample counts, seed and slack shared by the suites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    pub slack: Slack,
    /// Source vertices per arc for quasigeodesic and distance checks.
    pub pair_checks: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { samples: 100, seed: 0, slack: Slack::TIGHT, pair_checks: 8 }
    }
}

/// Tolerance for inequalities that hold exactly on graph paths.
pub const EXACT: Slack = Slack { rel: 1e-12, abs: 1e-9 };

fn pt(p: Point2) -> Value {
    json!([p.x, p.y])
}

fn node_pt(graph: &QhGraph, u: usize) -> Value {
    pt(graph.grid().point(u))
}

fn require(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(LabError::InvalidParameter(format!("need at least {min} {what}, got {n}")));
    }
    Ok(())
}

/// `k(x,y) ≥ |log(d(x)/d(y))|` on sampled node pairs.
pub fn verify_log_ratio_bound(graph: &QhGraph, cfg: &SuiteConfig) -> Result<VerificationOutcome> {
    require(cfg.samples, 100, "pairs")?;
    let g = graph.grid();
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 40);
    let instances = pairs
        .par_iter()
        .map(|&(x, y)| {
            let k = graph.distance(QH, x, y);
            let lr = (g.dist(x) / g.dist(y)).ln().abs();
            let mut c = InstanceChecks::new(json!({ "x": node_pt(graph, x), "y": node_pt(graph, y), "k": k }));
            c.le("log-ratio", lr, k, EXACT.of(k));
            c
        })
        .collect();
    Ok(tally(Statement::LogRatio, instances, json!({ "pairs": pairs.len() })))
}

/// The left side of the log-length bound for an arc.
pub fn log_length_lower(arc: &Arc) -> f64 {
    let (d0, d1) = (arc.d()[0], arc.d()[arc.len() - 1]);
    (1.0 + arc.length() / d0.min(d1)).ln()
}

/// `ℓ_k(γ) ≥ log(1 + ℓ(γ)/min{d(x),d(y)})` on qh geodesics and random walks.
pub fn verify_log_length_bound(graph: &QhGraph, cfg: &SuiteConfig) -> Result<VerificationOutcome> {
    require(cfg.samples, 1, "curves")?;
    let mut r = sampling::rng(cfg.seed, 41);
    let mut paths = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let x = sampling::random_node(graph, &mut r);
        if i % 2 == 0 {
            let y = sampling::random_node(graph, &mut r);
            paths.push((x, Some(y), 0));
        } else {
            paths.push((x, None, r.gen_range(0..=200)));
        }
    }
    let instances = paths
        .par_iter()
        .map(|&(x, y, steps)| -> Result<InstanceChecks> {
            let (arc, kind) = match y {
                Some(y) => (graph.geodesic_nodes(QH, x, y)?.arc, "qh-geodesic"),
                None => {
                    // each walk gets its own stream so the set does not depend on scheduling
                    let mut wr = sampling::rng(cfg.seed ^ (x as u64).rotate_left(17), 42 + steps as u64);
                    (graph.arc_from_path(&graph.random_walk(x, steps, &mut wr))?, "random-walk")
                }
            };
            let lower = log_length_lower(&arc);
            let k = arc.qh_length();
            let mut c = InstanceChecks::new(json!({
                "kind": kind,
                "start": pt(arc.start()),
                "end": pt(arc.end()),
                "vertices": arc.len(),
                "length": arc.length(),
                "k_length": k,
            }));
            c.le("log-length", lower, k, EXACT.of(k));
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally(Statement::LogLength, instances, json!({ "curves": paths.len() })))
}

/// `6a·log(1 + 2a)`, the distance bound forced by qh-John.
pub fn necessity_constant(a: f64) -> f64 {
    6.0 * a * (2.0 * a).ln_1p()
}

/// `3e^{2A}`, the cone constant produced by the distance bound `A`.
pub fn cone_bound(big_a: f64) -> f64 {
    3.0 * (2.0 * big_a).exp()
}

/// `6a·log(1 + 2a·e^{R+4δ}) + 2R + 8δ`.
pub fn predicted_a(a: f64, delta: f64, r: f64) -> Result<f64> {
    if !(a >= 1.0 && delta >= 0.0 && r >= 0.0) || !(a.is_finite() && delta.is_finite() && r.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "need a >= 1, delta >= 0, R >= 0 (finite), got a={a}, delta={delta}, R={r}"
        )));
    }
    Ok(6.0 * a * (2.0 * a * (r + 4.0 * delta).exp()).ln_1p() + 2.0 * r + 8.0 * delta)
}

/// `3ab(b + 1)`, the LLC₂ constant from qh-John `a` and LEC `b`.
pub fn llc_from_lec(a: f64, b: f64) -> f64 {
    3.0 * a * b * (b + 1.0)
}

/// `C_gh(a + 1)(1 + C_bs)`, the qh-John bound from John and GHS.
pub fn john_ghs_coefficient(a: f64, c_gh: f64, c_bs: f64) -> f64 {
    c_gh * (a + 1.0) * (1.0 + c_bs)
}

/// A point of an arc at euclidean arclength `s`, with linearly interpolated `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicPoint {
    pub s: f64,
    pub point: Point2,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum SegmentKind {
    Forward(usize),
    Middle,
    Backward(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicSegment {
    pub kind: SegmentKind,
    pub from: DyadicPoint,
    pub to: DyadicPoint,
}

/// Splitting of an arc from `p` to `q` at the first points where `d`
/// reaches `2^i d(p)` going forward and `2^j d(q)` going backward.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DyadicDecomposition {
    pub length: f64,
    pub t_max: f64,
    pub n: usize,
    pub m: usize,
    pub forward: Vec<DyadicPoint>,
    pub backward: Vec<DyadicPoint>,
}

impl DyadicDecomposition {
    /// The `n + m + 1` segments in arc order.
    pub fn segments(&self) -> Vec<DyadicSegment> {
        let mut out = Vec::with_capacity(self.n + self.m + 1);
        for i in 0..self.n {
            out.push(DyadicSegment { kind: SegmentKind::Forward(i), from: self.forward[i], to: self.forward[i + 1] });
        }
        out.push(DyadicSegment { kind: SegmentKind::Middle, from: self.forward[self.n], to: self.backward[self.m] });
        for j in (0..self.m).rev() {
            out.push(DyadicSegment { kind: SegmentKind::Backward(j), from: self.backward[j + 1], to: self.backward[j] });
        }
        out
    }
}

/// Largest `n` with `2^n·d0 ≤ t`.
fn doublings(d0: f64, t: f64) -> usize {
    let mut n = 0;
    while d0 * 2f64.powi(n as i32 + 1) <= t {
        n += 1;
    }
    n
}

/// First point from the start of `arc` where the interpolated `d` reaches `target`.
fn first_crossing(arc: &Arc, target: f64) -> Option<DyadicPoint> {
    let (v, d, s) = (arc.vertices(), arc.d(), arc.cum_len());
    if d[0] >= target {
        return Some(DyadicPoint { s: 0.0, point: v[0], d: d[0] });
    }
    for i in 0..arc.len() - 1 {
        if d[i + 1] >= target {
            let f = (target - d[i]) / (d[i + 1] - d[i]);
            let point = v[i].lerp(v[i + 1], f);
            return Some(DyadicPoint { s: s[i] + f * (s[i + 1] - s[i]), point, d: d[i] + f * (d[i + 1] - d[i]) });
        }
    }
    None
}

pub fn dyadic_decomposition(arc: &Arc) -> Result<DyadicDecomposition> {
    let d = arc.d();
    let (dp, dq) = (d[0], d[arc.len() - 1]);
    if !(dp > 0.0 && dq > 0.0) {
        return Err(LabError::InvalidParameter("arc endpoints must lie inside the domain".into()));
    }
    let t_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_max < dp || t_max < dq {
        return Err(LabError::Internal(format!("max d {t_max} below an endpoint value")));
    }
    let length = arc.length();
    let rev = arc.reversed();
    let (n, m) = (doublings(dp, t_max), doublings(dq, t_max));
    let missing = |i| LabError::Internal(format!("no crossing for level {i}"));
    let mut forward = vec![DyadicPoint { s: 0.0, point: arc.start(), d: dp }];
    for i in 1..=n {
        forward.push(first_crossing(arc, dp * 2f64.powi(i as i32)).ok_or_else(|| missing(i))?);
    }
    let mut backward = vec![DyadicPoint { s: length, point: arc.end(), d: dq }];
    for j in 1..=m {
        let c = first_crossing(&rev, dq * 2f64.powi(j as i32)).ok_or_else(|| missing(j))?;
        backward.push(DyadicPoint { s: length - c.s, ..c });
    }
    Ok(DyadicDecomposition { length, t_max, n, m, forward, backward })
}

/// Adds the structural invariants of a decomposition as checks: the
/// crossing values and their first-ness, the doubling counts, the ordering
/// of the cut points and the factor-2 bound on every segment.
pub(crate) fn certify_decomposition(arc: &Arc, dec: &DyadicDecomposition, out: &mut InstanceChecks) {
    let (d, s) = (arc.d(), arc.cum_len());
    let tol = |v: f64| 1e-12 * v.abs() + 1e-15;
    let side = |pts: &[DyadicPoint], forward: bool, out: &mut InstanceChecks| {
        let base = pts[0].d;
        for (i, p) in pts.iter().enumerate().skip(1) {
            let target = base * 2f64.powi(i as i32);
            out.le(format!("crossing-value[{i}]"), (p.d - target).abs(), 0.0, tol(target));
            // vertices strictly before the crossing stay below the target
            let before = (0..arc.len())
                .filter(|&k| if forward { s[k] < p.s } else { s[k] > p.s })
                .map(|k| d[k])
                .fold(0.0, f64::max);
            out.le(format!("first-crossing[{i}]"), before, target, 0.0);
        }
        let top = base * 2f64.powi(pts.len() as i32 - 1);
        out.le("doubling-floor", top, dec.t_max, 0.0);
        // strict upper bound: t_max < 2^{n+1} d
        out.le("doubling-ceiling", dec.t_max, 2.0 * top - tol(top), 0.0);
    };
    side(&dec.forward, true, out);
    side(&dec.backward, false, out);
    let segs = dec.segments();
    out.le("cover-start", segs[0].from.s, 0.0, 0.0);
    out.le("cover-end", dec.length, segs[segs.len() - 1].to.s, 0.0);
    for w in segs.windows(2) {
        out.le("contiguous", (w[0].to.s - w[1].from.s).abs(), 0.0, 0.0);
    }
    for seg in &segs {
        out.le("ordered", seg.from.s, seg.to.s, 0.0);
        let cap = 2.0 * seg.from.d.min(seg.to.d);
        let inner = (0..arc.len())
            .filter(|&k| s[k] > seg.from.s && s[k] < seg.to.s)
            .map(|k| d[k])
            .fold(seg.from.d.max(seg.to.d), f64::max);
        out.le(format!("doubling-window[{:?}]", seg.kind), inner, cap, tol(cap));
    }
}

/// Middle term `3a·log(1 + a·d(z)/d(y))` of the cone chain.
pub fn cone_chain_middle(a: f64, dy: f64, dz: f64) -> f64 {
    3.0 * a * (a * dz / dy).ln_1p()
}

/// Checks the cone chain on a graph-path arc with cone constant at most `a`:
/// for `y` before the euclidean midpoint `x₀` and `z` between `y` and `x₀`,
/// `k(y,z) ≤ ℓ_k(γ[y,z]) ≤ 3a log(1 + a d(z)/d(y)) ≤ 3a k(y,z) + 3a log 3a`,
/// together with `ℓ(γ[y,z]) ≤ a d(z)` and `d(y) ≤ 2a d(z)` used to get there.
/// `a` is raised to 1 when smaller, as the argument needs `a ≥ 1`.
pub(crate) fn cone_chain_checks(
    graph: &QhGraph,
    arc: &Arc,
    a: f64,
    slack: Slack,
    y_samples: usize,
    z_samples: usize,
    witness: Value,
) -> Result<InstanceChecks> {
    let mut out = InstanceChecks::new(witness);
    let nodes: Vec<usize> = arc.nodes().iter().flatten().copied().collect();
    if nodes.len() != arc.len() {
        return Err(LabError::InvalidParameter("arc vertices must all be grid nodes".into()));
    }
    let cone = double_cone_constant(arc, graph.domain()).constant;
    if cone > a * (1.0 + 1e-12) {
        return Err(LabError::InvalidParameter(format!("arc has cone constant {cone} > a = {a}")));
    }
    let a = a.max(1.0);
    let (d, s, q) = (arc.d(), arc.cum_len(), arc.cum_qh());
    let half = 0.5 * arc.length();
    let first: Vec<usize> = (0..arc.len()).filter(|&i| s[i] <= half).collect();
    for yi in sampling::spread(first.len(), y_samples).into_iter().map(|k| first[k]) {
        let later: Vec<usize> = first.iter().copied().filter(|&i| i >= yi).collect();
        let zs: Vec<usize> = sampling::spread(later.len(), z_samples).into_iter().map(|k| later[k]).collect();
        let targets: Vec<usize> = zs.iter().map(|&i| nodes[i]).collect();
        let dist = graph.distances_to(QH, nodes[yi], &targets);

        for &zi in &zs {
            let k = dist[nodes[zi]];
            let (dy, dz) = (d[yi], d[zi]);
            let lk = q[zi] - q[yi];
            let mid = cone_chain_middle(a, dy, dz);
            let right = 3.0 * a * k + 3.0 * a * (3.0 * a).ln();
            out.le("distance-below-length", k, lk, EXACT.of(lk));
            out.le("length-below-cone-integral", lk, mid, slack.of(mid));
            out.le("cone-integral-below-distance", mid, right, EXACT.of(right));
            out.le("subarc-length", s[zi] - s[yi], a * dz, EXACT.of(a * dz));
            out.le("distance-ratio", dy, 2.0 * a * dz, EXACT.of(2.0 * a * dz));
        }
    }
    Ok(out)
}

/// The cone chain on one arc, with `a` its measured cone constant.
pub fn verify_cone_chain_arc(graph: &QhGraph, arc: &Arc, slack: Slack, grid: usize) -> Result<VerificationOutcome> {
    let a = double_cone_constant(arc, graph.domain()).constant;
    let w = json!({ "start": pt(arc.start()), "end": pt(arc.end()), "a": a });
    let c = cone_chain_checks(graph, arc, a, slack, grid, grid, w)?;
    Ok(tally(Statement::ConeChain, vec![c], json!({ "a": a })))
}

/// The cone chain on arcs joining sampled pairs, cycling through the
/// candidate families so that geodesics and non-geodesic cone arcs both occur.
pub fn verify_cone_chain(graph: &QhGraph, cfg: &SuiteConfig) -> Result<VerificationOutcome> {
    require(cfg.samples, 1, "arcs")?;
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 43);
    let instances = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(x, y))| -> Result<InstanceChecks> {
            let family = ALL_FAMILIES[i % ALL_FAMILIES.len()];
            let arc = family_arc(graph, family, x, y)?;
            let a = double_cone_constant(&arc, graph.domain()).constant;
            let w = json!({
                "x": node_pt(graph, x),
                "y": node_pt(graph, y),
                "family": family,
                "a": a,
            });
            cone_chain_checks(graph, &arc, a, cfg.slack, 12, 24, w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally(Statement::ConeChain, instances, json!({ "arcs": pairs.len(), "grid": [12, 24] })))
}

/// `d(u) ≤ 2 min{d(x), d(y)}` at every vertex and edge midpoint of the arc.
pub fn doubling_hypothesis(graph: &QhGraph, arc: &Arc) -> bool {
    let d = arc.d();
    let cap = 2.0 * d[0].min(d[arc.len() - 1]);
    if d.iter().any(|&v| v > cap) {
        return false;
    }
    let v = arc.vertices();
    (1..arc.len()).all(|i| graph.domain().raw_distance(v[i - 1].lerp(v[i], 0.5)) <= cap)
}

/// Pairs with `y` drawn uniformly from the disk of radius `0.9 d(x)` about `x`.
pub fn near_pairs(graph: &QhGraph, n: usize, seed: u64, stream: u64) -> Vec<(usize, usize)> {
    let g = graph.grid();
    let mut r = sampling::rng(seed, stream);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 100 * n.max(1) {
        tries += 1;
        let x = sampling::random_node(graph, &mut r);
        let rho = 0.9 * g.dist(x) * r.gen::<f64>().sqrt();
        let phi = r.gen_range(0.0..std::f64::consts::TAU);
        let p = g.point(x);
        let p = Point2::new(p.x + rho * phi.cos(), p.y + rho * phi.sin());
        if let Ok((y, _)) = g.snap(p) {
            out.push((x, y));
        }
    }
    out
}

/// `k(x,y) ≤ 6a log(1 + 2a)` on qh geodesics meeting the doubling hypothesis,
/// with `a` the qh-John constant (raised to 1 when smaller).
pub fn verify_necessity(graph: &QhGraph, a: f64, cfg: &SuiteConfig) -> Result<VerificationOutcome> {
    require(cfg.samples, 1, "instances")?;
    if !(a.is_finite() && a > 0.0) {
        return Err(LabError::InvalidParameter(format!("qh-John constant must be finite, got {a}")));
    }
    let a_eff = a.max(1.0);
    let big_a = necessity_constant(a_eff);
    let mut instances = Vec::new();
    let mut candidates = 0;
    for round in 0..20u64 {
        let pairs = near_pairs(graph, cfg.samples, cfg.seed, 50 + round);
        candidates += pairs.len();
        let batch = pairs
            .par_iter()
            .map(|&(x, y)| -> Result<Option<InstanceChecks>> {
                let geo = graph.geodesic_nodes(QH, x, y)?;
                if !doubling_hypothesis(graph, &geo.arc) {
                    return Ok(None);
                }
                let mut c = InstanceChecks::new(json!({
                    "x": node_pt(graph, x),
                    "y": node_pt(graph, y),
                    "k": geo.distance,
                }));
                c.le("distance-bound", geo.distance, big_a, cfg.slack.of(big_a));
                Ok(Some(c))
            })
            .collect::<Result<Vec<_>>>()?;
        instances.extend(batch.into_iter().flatten());
        if instances.len() >= cfg.samples {
            break;
        }
    }
    instances.truncate(cfg.samples);
    let details = json!({ "a": a, "a_used": a_eff, "A": big_a, "candidates": candidates });
    Ok(tally(Statement::Necessity, instances, details))
}

/// The per-segment bounds of the sufficiency argument on one qh geodesic,
/// the two-case recomputation of the cone bound, and the bound itself.
pub(crate) fn sufficiency_checks(arc: &Arc, big_a: f64, slack: Slack, witness: Value) -> Result<InstanceChecks> {
    let mut out = InstanceChecks::new(witness);
    let dec = dyadic_decomposition(arc)?;
    certify_decomposition(arc, &dec, &mut out);
    let ea = big_a.exp();
    let m = cone_bound(big_a);
    let total = dec.length;
    let (d, s) = (arc.d(), arc.cum_len());
    let segs = dec.segments();
    // lengths of the forward segments and the backward ones (indexed by j)
    let seg_len = |g: &DyadicSegment| g.to.s - g.from.s;
    let mut fwd_len = vec![0.0; dec.n];
    let mut bwd_len = vec![0.0; dec.m];
    let mut mid_len = 0.0;
    for g in &segs {
        match g.kind {
            SegmentKind::Forward(i) => fwd_len[i] = seg_len(g),
            SegmentKind::Backward(j) => bwd_len[j] = seg_len(g),
            SegmentKind::Middle => mid_len = seg_len(g),
        }
    }
    for g in &segs {
        let l = seg_len(g);
        let k = arc.qh_at_length(g.to.s) - arc.qh_at_length(g.from.s);
        let base = match g.kind {
            SegmentKind::Forward(_) | SegmentKind::Middle => g.from.d,
            SegmentKind::Backward(_) => g.to.d,
        };
        let tag = format!("{:?}", g.kind);
        out.assume_le(format!("segment-distance[{tag}]"), k, big_a, slack.of(big_a));
        out.le(format!("segment-log-length[{tag}]"), (l / base).ln_1p(), k, EXACT.of(k));
        out.le(format!("segment-length[{tag}]"), l, ea * base, slack.of(ea * base));
        let mut pts: Vec<(f64, f64)> = vec![(g.from.s, g.from.d), (g.to.s, g.to.d)];
        pts.extend((0..arc.len()).filter(|&k| s[k] > g.from.s && s[k] < g.to.s).map(|k| (s[k], d[k])));
        for (sv, dv) in pts {
            out.le(format!("segment-floor[{tag}]"), base, ea * dv, slack.of(ea * dv));
            // two-case recomputation of the cone bound at v
            let (lv, sum_len, sum_d, top, coef) = match g.kind {
                SegmentKind::Forward(i) => {
                    let sd: f64 = dec.forward[..=i].iter().map(|p| p.d).sum();
                    (sv, fwd_len[..=i].iter().sum::<f64>(), sd, dec.forward[i].d, 2.0)
                }
                SegmentKind::Middle => {
                    let sd: f64 = dec.forward[..dec.n].iter().map(|p| p.d).sum();
                    let pn = dec.forward[dec.n].d;
                    (sv, fwd_len.iter().sum::<f64>() + mid_len, sd + pn, pn, 3.0)
                }
                SegmentKind::Backward(j) => {
                    let sd: f64 = dec.backward[..=j].iter().map(|p| p.d).sum();
                    (total - sv, bwd_len[..=j].iter().sum::<f64>(), sd, dec.backward[j].d, 2.0)
                }
            };
            out.le(format!("prefix-length[{tag}]"), lv, sum_len, EXACT.of(sum_len));
            out.le(format!("prefix-sum[{tag}]"), sum_len, ea * sum_d, slack.of(ea * sum_d));
            out.le(format!("geometric-sum[{tag}]"), ea * sum_d, coef * ea * top, EXACT.of(coef * ea * top));
            let r = coef * ea * ea * dv;
            out.le(format!("case-bound[{tag}]"), coef * ea * top, r, slack.of(r));
            let cone = sv.min(total - sv).max(0.0);
            out.le("cone-bound", cone, m * dv, slack.of(m * dv));
        }
    }
    Ok(out)
}

/// Dyadic decomposition and cone bound `3e^{2A}` on sampled qh geodesics,
/// given the distance bound `A`. Geodesics with a segment of k-length
/// above `A` do not meet the hypothesis and are set aside.
pub fn verify_sufficiency(graph: &QhGraph, big_a: f64, cfg: &SuiteConfig) -> Result<VerificationOutcome> {
    require(cfg.samples, 1, "geodesics")?;
    if !(big_a.is_finite() && big_a > 0.0) {
        return Err(LabError::InvalidParameter(format!("distance bound must be positive and finite, got {big_a}")));
    }
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 44);
    let instances = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<InstanceChecks> {
            let geo = graph.geodesic_nodes(QH, x, y)?;
            let w = json!({ "x": node_pt(graph, x), "y": node_pt(graph, y), "k": geo.distance });
            sufficiency_checks(&geo.arc, big_a, cfg.slack, w)
        })
        .collect::<Result<Vec<_>>>()?;
    let details = json!({ "A": big_a, "M": cone_bound(big_a), "geodesics": pairs.len() });
    Ok(tally(Statement::Sufficiency, instances, details))
}

/// A pair meeting the doubling hypothesis, its John candidate arc `γ` and
/// the vertex `x₀` splitting `γ` near its euclidean midpoint.
#[derive(Clone, Debug)]
pub struct LemmaTriangle {
    pub x: usize,
    pub y: usize,
    pub x0: usize,
    pub family: Family,
    pub gamma: Arc,
    pub gamma_cone: f64,
    pub split: usize,
}

impl LemmaTriangle {
    /// `γ[x, x₀]` and `γ[x₀, y]`.
    pub fn halves(&self) -> Result<[Arc; 2]> {
        let s = self.gamma.cum_len()[self.split];
        Ok([self.gamma.subarc(0.0, s)?, self.gamma.subarc(s, self.gamma.length())?])
    }
}

/// Up to `n` triangles on nearby pairs whose qh geodesic meets the doubling
/// hypothesis; `γ` is the family arc with the smallest cone constant.
pub fn lemma_triangles(graph: &QhGraph, n: usize, seed: u64) -> Result<Vec<LemmaTriangle>> {
    let mut out = Vec::new();
    for round in 0..20u64 {
        let pairs = near_pairs(graph, 2 * n, seed, 70 + round);
        let batch = pairs
            .par_iter()
            .map(|&(x, y)| -> Result<Option<LemmaTriangle>> {
                if x == y || !doubling_hypothesis(graph, &graph.geodesic_nodes(QH, x, y)?.arc) {
                    return Ok(None);
                }
                let mut best: Option<(Family, Arc, f64)> = None;
                for f in ALL_FAMILIES {
                    let arc = family_arc(graph, f, x, y)?;
                    let c = double_cone_constant(&arc, graph.domain()).constant;
                    if best.as_ref().is_none_or(|b| c < b.2) {
                        best = Some((f, arc, c));
                    }
                }
                let (family, gamma, gamma_cone) = best.expect("families are nonempty");
                if gamma.len() < 3 {
                    return Ok(None);
                }
                let split = gamma.nearest_vertex(0.5 * gamma.length()).clamp(1, gamma.len() - 2);
                let x0 = gamma.nodes()[split]
                    .ok_or_else(|| LabError::Internal("candidate arc vertex is not a node".into()))?;
                if x0 == x || x0 == y {
                    return Ok(None);
                }
                Ok(Some(LemmaTriangle { x, y, x0, family, gamma, gamma_cone, split }))
            })
            .collect::<Result<Vec<_>>>()?;
        out.extend(batch.into_iter().flatten());
        if out.len() >= n {
            break;
        }
    }
    out.truncate(n);
    Ok(out)
}

struct TriangleGeometry {
    sides: [GeodesicResult; 3],
    tripod: TripodPoints,
    halves: [Arc; 2],
    accepted: [bool; 2],
    hausdorff: [f64; 2],
}

/// Inputs of the hyperbolic-John suite after clamping, and the derived bounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HyperbolicJohnBounds {
    pub a: f64,
    pub delta: f64,
    pub r: f64,
    pub big_a: f64,
    pub m: f64,
}

/// Cone bound `M = 3e^{2A}` with `A = 6a log(1 + 2a e^{R+4δ}) + 2R + 8δ`
/// against sampled qh geodesics, and the steps of the argument on the
/// triangles: tripod points of `[x,y]` within `4δ` of the other two sides,
/// a point `v₀` of the matching half of `γ` within `R` of the tripod point
/// `v`, hence `d(v₀) ≤ e^{R+4δ} d(u)`, and finally `k(x,y) ≤ A`.
///
/// `a` is raised to the largest cone constant among the triangle arcs and
/// to 1. Without `r`, R is the largest Hausdorff distance between a half
/// of `γ` and the triangle side with the same endpoints, over the halves
/// that pass the quasigeodesic check with `λ = 3a`, `μ = 3a log 3a`.
pub fn verify_hyperbolic_john(
    graph: &QhGraph,
    a: f64,
    delta: f64,
    r: Option<f64>,
    triangles: &[LemmaTriangle],
    cfg: &SuiteConfig,
) -> Result<VerificationOutcome> {
    let st = Statement::HyperbolicJohn;
    if !(a.is_finite() && delta.is_finite() && r.is_none_or(f64::is_finite)) {
        let reason = format!("non-finite input a={a}, delta={delta}, R={r:?}");
        return Ok(VerificationOutcome::skipped(st, reason, Value::Null));
    }
    let a_used = triangles.iter().map(|t| t.gamma_cone).fold(a.max(1.0), f64::max);
    let (lambda, mu) = (3.0 * a_used, 3.0 * a_used * (3.0 * a_used).ln());
    let geometry = triangles
        .par_iter()
        .map(|t| -> Result<TriangleGeometry> {
            let sides = triangle(graph, t.x, t.y, t.x0)?;
            let tripod = tripod_points(graph, &sides)?;
            let halves = t.halves()?;
            let mut accepted = [false; 2];
            let mut hausdorff = [0.0; 2];
            for h in 0..2 {
                accepted[h] = quasigeodesic_check(graph, &halves[h], QH, lambda, mu, cfg.pair_checks).pass;
                let side = if h == 0 { &sides[2].arc } else { &sides[1].arc };
                hausdorff[h] = hausdorff_between(graph, &halves[h], side)?;
            }
            Ok(TriangleGeometry { sides, tripod, halves, accepted, hausdorff })
        })
        .collect::<Result<Vec<_>>>()?;
    let r_measured = geometry
        .iter()
        .flat_map(|g| (0..2).filter(|&h| g.accepted[h]).map(move |h| g.hausdorff[h]))
        .fold(0.0, f64::max);
    let r_used = r.unwrap_or(r_measured);
    let big_a = predicted_a(a_used, delta, r_used)?;
    let bounds = HyperbolicJohnBounds { a: a_used, delta, r: r_used, big_a, m: cone_bound(big_a) };
    let s = cfg.slack;
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 45);
    let mut instances = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<InstanceChecks> {
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            let cone = double_cone_constant(&arc, graph.domain()).constant;
            let mut c = InstanceChecks::new(json!({ "x": node_pt(graph, x), "y": node_pt(graph, y), "cone": cone }));
            c.le("geodesic-cone", cone, bounds.m, s.of(bounds.m));
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let four = 4.0 * delta;
    let grow = r_used + four;
    let g = graph.grid();
    let tri_checks = triangles
        .par_iter()
        .zip(&geometry)
        .map(|(t, geo)| -> Result<InstanceChecks> {
            let tp = &geo.tripod;
            let mut c = InstanceChecks::new(json!({
                "x": node_pt(graph, t.x),
                "y": node_pt(graph, t.y),
                "x0": node_pt(graph, t.x0),
                "family": t.family,
                "insize": tp.insize,
            }));
            c.le("tripod-u-v", tp.pair_distances[0], four, s.of(four));
            c.le("tripod-u-w", tp.pair_distances[2], four, s.of(four));
            // the tripod point on the side toward the endpoint farther from u
            let (h, p, kvu) = if tp.products[0] >= tp.products[1] {
                (0, tp.w_point, tp.pair_distances[2])
            } else {
                (1, tp.v_point, tp.pair_distances[0])
            };
            c.assume_le("half-quasigeodesic", if geo.accepted[h] { 0.0 } else { 1.0 }, 0.0, 0.0);
            let half: Vec<usize> = geo.halves[h].nodes().iter().flatten().copied().collect();
            let u = tp.u_point;
            let (dv0, kv0v, kv0u) = if path_edges(&half).contains(&edge_key(p.edge.0, p.edge.1)) {
                (p.d, 0.0, arc_point_distance(graph, &p, &u, false))
            } else {
                let tree = graph.dijkstra(QH, &half, None, f64::INFINITY);
                let (ka, kb) = (p.back + tree.dist[p.edge.0], p.ahead + tree.dist[p.edge.1]);
                let (via, k) = if ka <= kb { (p.edge.0, ka) } else { (p.edge.1, kb) };
                let v0 = tree.path_to(via).ok_or_else(|| LabError::Internal("half unreachable".into()))?[0];
                let dist = graph.distances_to(QH, v0, &[u.edge.0, u.edge.1]);
                let ku = (dist[u.edge.0] + u.back).min(dist[u.edge.1] + u.ahead);
                (g.dist(v0), k, ku)
            };
            c.assume_le("match-within-stability", kv0v, r_used, EXACT.of(r_used));
            c.le("log-ratio-at-match", (dv0 / u.d).ln().abs(), kv0u, EXACT.of(kv0u));
            c.le("match-triangle-inequality", kv0u, kv0v + kvu, EXACT.of(kv0v + kvu));
            c.le("match-distance", kv0v + kvu, grow, s.of(grow));
            let cap = grow.exp() * u.d;
            c.le("depth-comparison", dv0, cap, s.of(cap));
            let kxy = geo.sides[0].distance;
            c.le("distance-bound", kxy, big_a, s.of(big_a));
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    instances.extend(tri_checks);
    let rejected = geometry.iter().map(|g| g.accepted.iter().filter(|&&a| !a).count()).sum::<usize>();
    let details = json!({
        "bounds": bounds,
        "a_supplied": a,
        "r_supplied": r,
        "r_measured": r_measured,
        "lambda": lambda,
        "mu": mu,
        "geodesics": pairs.len(),
        "triangles": triangles.len(),
        "rejected_halves": rejected,
    });
    Ok(tally(st, instances, details))
}

fn clamp_constant(supplied: f64, shared: impl Iterator<Item = f64>) -> f64 {
    shared.fold(supplied.max(1.0), f64::max)
}

fn interior_vertices(len: usize, m: usize) -> Vec<usize> {
    if len < 3 {
        return Vec::new();
    }
    sampling::spread(len - 2, m).into_iter().map(|k| k + 1).collect()
}

struct LlcGhsPoint {
    z: usize,
    dz: f64,
    s: f64,
    total: f64,
    to_x: f64,
    to_y: f64,
    threshold: f64,
}

/// `C ≤ C₀·C_gh·C_bs` at sampled points of qh geodesics: the Gehring-Hayman
/// bounds push both endpoints out of the ball of radius `ρ = C d(z)/C_gh`,
/// LLC₂ gives a curve avoiding the ball of radius `ρ/C₀`, and ball
/// separation caps that radius by `C_bs d(z)`.
///
/// Each constant is the larger of the supplied value, 1, and what the
/// shared samples require; `details` records whether the supplied
/// constants alone would have covered the samples.
pub fn verify_llc_ghs(
    graph: &QhGraph,
    c0: f64,
    c_gh: f64,
    c_bs: f64,
    points: usize,
    cfg: &SuiteConfig,
) -> Result<VerificationOutcome> {
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 1);
    let per_pair = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<Vec<LlcGhsPoint>> {
            if x == y {
                return Ok(Vec::new());
            }
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            let nodes: Vec<usize> = arc.nodes().iter().flatten().copied().collect();
            Ok(interior_vertices(arc.len(), points)
                .into_iter()
                .map(|k| {
                    let z = nodes[k];
                    let (to_x, to_y) = (inner_distance(graph, z, x), inner_distance(graph, z, y));
                    // radii above the nearer endpoint distance never matter
                    let field = InnerField::new(graph, z, to_x.min(to_y));
                    LlcGhsPoint {
                        z,
                        dz: graph.grid().dist(z),
                        s: arc.cum_len()[k],
                        total: arc.length(),
                        to_x,
                        to_y,
                        threshold: bottleneck(graph, &field, x, y),
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let all = || per_pair.iter().flatten();
    let cone = |p: &LlcGhsPoint| p.s.min(p.total - p.s) / p.dz;
    let gh = clamp_constant(c_gh, all().map(|p| (p.s / p.to_x).max((p.total - p.s) / p.to_y)));
    let rho = |p: &LlcGhsPoint| cone(p) * p.dz / gh;
    let llc_at = |p: &LlcGhsPoint| rho(p) / rho(p).min(p.threshold);
    // a point no curve can avoid shows the space is not LLC₂ there
    let llc = clamp_constant(c0, all().map(llc_at).filter(|v| v.is_finite()));
    let bs = clamp_constant(c_bs, all().map(|p| p.threshold.min(p.to_x.min(p.to_y)) / p.dz));
    let product = llc * gh * bs;
    let s = cfg.slack;
    let instances = pairs
        .iter()
        .zip(&per_pair)
        .map(|(&(x, y), pts)| {
            let mut c = InstanceChecks::new(json!({ "x": node_pt(graph, x), "y": node_pt(graph, y) }));
            for p in pts {
                let near = p.to_x.min(p.to_y);
                let r = rho(p);
                c.assume_le("llc-finite", llc_at(p), llc, 0.0);
                c.le("gh-head", p.s, gh * p.to_x, s.of(gh * p.to_x));
                c.le("gh-tail", p.total - p.s, gh * p.to_y, s.of(gh * p.to_y));
                c.le("endpoints-outside-ball", r, near, EXACT.of(near));
                c.le("llc-avoidance", r / llc, p.threshold, EXACT.of(p.threshold));
                c.le("ball-separation", p.threshold.min(near), bs * p.dz, EXACT.of(bs * p.dz));
                c.le("cone-bound", cone(p), product, s.of(product));
            }
            c
        })
        .collect();
    let shared = all().map(cone).fold(0.0, f64::max);
    let worst = all().max_by(|a, b| cone(a).total_cmp(&cone(b))).map(|p| node_pt(graph, p.z));
    let details = json!({
        "supplied": { "c0": c0, "c_gh": c_gh, "c_bs": c_bs, "product": c0 * c_gh * c_bs },
        "used": { "c0": llc, "c_gh": gh, "c_bs": bs, "product": product },
        "qh_john_shared": shared,
        "qh_john_witness": worst,
        "supplied_suffices": shared <= c0 * c_gh * c_bs + s.of(c0 * c_gh * c_bs),
    });
    Ok(tally(Statement::LlcGhs, instances, details))
}

/// Shared-sample settings for suites that replay estimator samples.
pub fn estimator_config(cfg: &SuiteConfig, points: usize) -> EstimatorConfig {
    EstimatorConfig { pairs: cfg.samples, seed: cfg.seed, points_per_geodesic: points, ..EstimatorConfig::default() }
}

/// LLC₂ with `c = 3ab(b+1)` and ball separation with constant `a`, on the
/// LLC₂ and ball-separation samples of the estimators. For LLC₂ instances
/// whose joining qh geodesic enters the ball of radius `br/c`, the steps
/// from the first entry point `y₁` are checked as well: its depth, the
/// resulting depth of the center, and that the ball of radius `br/c` is of
/// Whitney size so LEC applies.
pub fn verify_lec_llc(graph: &QhGraph, a: f64, b: f64, est: &EstimatorConfig, slack: Slack) -> Result<VerificationOutcome> {
    if !(a.is_finite() && b.is_finite()) {
        let reason = format!("non-finite input a={a}, b={b}");
        return Ok(VerificationOutcome::skipped(Statement::LecLlc, reason, Value::Null));
    }
    let g = graph.grid();
    let llc = llc2_samples(graph, est);
    let llc_geo = llc
        .par_iter()
        .map(|t| graph.geodesic_nodes(QH, t.y, t.z).map(|r| r.arc))
        .collect::<Result<Vec<_>>>()?;
    let pairs = sampling::sample_pairs(graph, est.pairs, est.seed, 1);
    let bs_geo = pairs
        .par_iter()
        .map(|&(x, y)| graph.geodesic_nodes(QH, x, y).map(|r| r.arc))
        .collect::<Result<Vec<_>>>()?;
    let cones = llc_geo.iter().chain(&bs_geo).map(|arc| double_cone_constant(arc, graph.domain()).constant);
    let a_used = clamp_constant(a, cones);
    let b_used = b.max(1.0);
    let c_llc = llc_from_lec(a_used, b_used);
    let mut instances = llc
        .par_iter()
        .zip(&llc_geo)
        .map(|(t, arc)| -> Result<InstanceChecks> {
            let mut c = InstanceChecks::new(json!({
                "kind": "llc2",
                "center": node_pt(graph, t.center),
                "r": t.r,
                "y": node_pt(graph, t.y),
                "z": node_pt(graph, t.z),
            }));
            let value = llc_value(graph, t.center, t.r, t.y, t.z)?;
            c.le("llc-constant", value, c_llc, slack.of(c_llc));
            let field = InnerField::new(graph, t.center, t.r);
            let small = b_used * t.r / c_llc;
            let nodes: Vec<usize> = arc.nodes().iter().flatten().copied().collect();
            if let Some(k) = nodes.iter().position(|&v| field.value(v) <= small) {
                let y1 = nodes[k];
                let (fy1, dy1) = (field.value(y1), g.dist(y1));
                let l1 = arc.cum_len()[k].min(arc.length() - arc.cum_len()[k]);
                c.le("crossing-depth", t.r - fy1, l1, slack.of(l1));
                c.le("crossing-cone", l1, a_used * dy1, EXACT.of(a_used * dy1));
                let floor = (t.r - small) / a_used - small;
                c.le("depth-from-crossing", floor, dy1 - fy1, slack.of(dy1));
                let need = 2.0 * b_used * b_used * t.r / c_llc;
                c.le("constant-choice", need, floor, EXACT.of(floor));
                let dc = g.dist(t.center);
                c.le("center-depth", dy1 - fy1, dc, EXACT.of(dc));
                c.le("whitney-radius", small, dc / (2.0 * b_used), slack.of(dc));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let bs_checks = pairs
        .par_iter()
        .zip(&bs_geo)
        .map(|(&(x, y), arc)| -> Result<InstanceChecks> {
            let mut c = InstanceChecks::new(json!({ "kind": "ball-separation", "x": node_pt(graph, x), "y": node_pt(graph, y) }));
            if x == y {
                return Ok(c);
            }
            for k in sampling::spread(arc.len(), est.points_per_geodesic) {
                let split = ball_split(graph, arc, x, y, k)?;
                let l = arc.cum_len()[k].min(arc.length() - arc.cum_len()[k]);
                c.le("endpoint-reach", split.reach, l, EXACT.of(l));
                c.le("cone", l, a_used * split.dz, EXACT.of(a_used * split.dz));
                c.le("ball-separation", split.required, a_used, EXACT.of(a_used));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    instances.extend(bs_checks);
    let details = json!({
        "a_supplied": a,
        "b_supplied": b,
        "a_used": a_used,
        "b_used": b_used,
        "c": c_llc,
        "llc_instances": llc.len(),
        "ball_pairs": pairs.len(),
    });
    Ok(tally(Statement::LecLlc, instances, details))
}

struct JohnGhsPoint {
    s: f64,
    total: f64,
    dz: f64,
    to_x: f64,
    to_y: f64,
    to_gamma: f64,
    z0: usize,
    gamma_part: f64,
}

/// `min{ℓ(α[x,z]), ℓ(α[z,y])} ≤ C_gh(a+1)(1+C_bs) d(z)` at sampled points
/// of qh geodesics `α`, through the nearest point `z₀` of the John
/// candidate arc `γ`. Distances are graph length distances so that the
/// triangle inequality holds exactly; constants are clamped as in
/// [`verify_llc_ghs`].
pub fn verify_john_ghs(
    graph: &QhGraph,
    a: f64,
    c_gh: f64,
    c_bs: f64,
    points: usize,
    cfg: &SuiteConfig,
) -> Result<VerificationOutcome> {
    let g = graph.grid();
    let pairs = sampling::sample_pairs(graph, cfg.samples, cfg.seed, 1);
    let per_pair = pairs
        .par_iter()
        .map(|&(x, y)| -> Result<(f64, Vec<JohnGhsPoint>)> {
            if x == y {
                return Ok((0.0, Vec::new()));
            }
            let arc = graph.geodesic_nodes(QH, x, y)?.arc;
            let mut best: Option<(Arc, f64)> = None;
            for f in ALL_FAMILIES {
                let cand = family_arc(graph, f, x, y)?;
                let c = double_cone_constant(&cand, graph.domain()).constant;
                if best.as_ref().is_none_or(|b| c < b.1) {
                    best = Some((cand, c));
                }
            }
            let (gamma, gamma_cone) = best.expect("families are nonempty");
            let gnodes: Vec<usize> = gamma.nodes().iter().flatten().copied().collect();
            let nodes: Vec<usize> = arc.nodes().iter().flatten().copied().collect();
            let pts = interior_vertices(arc.len(), points)
                .into_iter()
                .map(|k| {
                    let tree = graph.tree(MetricKind::Length, nodes[k]);
                    let mut j0 = 0;
                    for j in 1..gnodes.len() {
                        if tree.dist[gnodes[j]] < tree.dist[gnodes[j0]] {
                            j0 = j;
                        }
                    }
                    let sj = gamma.cum_len()[j0];
                    JohnGhsPoint {
                        s: arc.cum_len()[k],
                        total: arc.length(),
                        dz: g.dist(nodes[k]),
                        to_x: tree.dist[x],
                        to_y: tree.dist[y],
                        to_gamma: tree.dist[gnodes[j0]],
                        z0: gnodes[j0],
                        gamma_part: sj.min(gamma.length() - sj),
                    }
                })
                .collect();
            Ok((gamma_cone, pts))
        })
        .collect::<Result<Vec<_>>>()?;
    let all = || per_pair.iter().flat_map(|p| &p.1);
    let a_used = clamp_constant(a, per_pair.iter().map(|p| p.0));
    let gh = clamp_constant(c_gh, all().map(|p| (p.s / p.to_x).max((p.total - p.s) / p.to_y)));
    let bs = clamp_constant(c_bs, all().map(|p| p.to_gamma / p.dz));
    let coef = john_ghs_coefficient(a_used, gh, bs);
    let s = cfg.slack;
    let instances = pairs
        .iter()
        .zip(&per_pair)
        .map(|(&(x, y), (_, pts))| {
            let mut c = InstanceChecks::new(json!({ "x": node_pt(graph, x), "y": node_pt(graph, y) }));
            for p in pts {
                let dz0 = g.dist(p.z0);
                let near = p.to_x.min(p.to_y);
                let lmin = p.s.min(p.total - p.s);
                c.le("ball-separation-point", p.to_gamma, bs * p.dz, EXACT.of(bs * p.dz));
                c.le("depth-transfer", dz0, p.to_gamma + p.dz, EXACT.of(dz0));
                c.le("candidate-cone", p.gamma_part, a_used * dz0, EXACT.of(a_used * dz0));
                c.le("endpoint-distance", near, p.to_gamma + p.gamma_part, EXACT.of(near));
                c.le("gh", lmin, gh * near, EXACT.of(gh * near));
                c.le("cone-bound", lmin, coef * p.dz, s.of(coef * p.dz));
            }
            c
        })
        .collect();
    let shared = all().map(|p| p.s.min(p.total - p.s) / p.dz).fold(0.0, f64::max);
    let supplied = john_ghs_coefficient(a.max(1.0), c_gh, c_bs);
    let details = json!({
        "supplied": { "a": a, "c_gh": c_gh, "c_bs": c_bs, "coefficient": supplied },
        "used": { "a": a_used, "c_gh": gh, "c_bs": bs, "coefficient": coef },
        "qh_john_shared": shared,
        "supplied_suffices": shared <= supplied + s.of(supplied),
    });
    Ok(tally(Statement::JohnGhs, instances, details))
}

/// Uniform estimate finite exactly when the John, Gehring-Hayman and ball
/// separation estimates all are.
pub fn verify_uniform_coherence(reports: &[ConditionReport]) -> Result<VerificationOutcome> {
    let find = |c: Condition| {
        reports
            .iter()
            .find(|r| r.condition == c)
            .ok_or_else(|| LabError::InvalidParameter(format!("missing {c} report")))
    };
    let (u, j, gh, bs) = (find(Condition::Uniform)?, find(Condition::John)?, find(Condition::Gh)?, find(Condition::Bs)?);
    let lhs = u.estimate.is_finite();
    let rhs = j.estimate.is_finite() && gh.estimate.is_finite() && bs.estimate.is_finite();
    let mut c = InstanceChecks::new(json!({
        "uniform": u.estimate,
        "john": j.estimate,
        "gh": gh.estimate,
        "bs": bs.estimate,
    }));
    c.le("finiteness-agrees", if lhs == rhs { 0.0 } else { 1.0 }, 0.0, 0.0);
    Ok(tally(Statement::UniformCoherence, vec![c], json!({ "uniform_finite": lhs, "parts_finite": rhs })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::gallery;
    use crate::engine::graph_for;
    use approx::assert_abs_diff_eq;

    fn line_arc(ds: &[f64]) -> Arc {
        let n = ds.len();
        let vertices = (0..n).map(|i| Point2::new(i as f64, 0.0)).collect();
        let cum_len = (0..n).map(|i| i as f64).collect();
        let mut cum_qh = vec![0.0];
        for i in 1..n {
            cum_qh.push(cum_qh[i - 1] + 0.5 * (1.0 / ds[i - 1] + 1.0 / ds[i]));
        }
        Arc::from_parts(vertices, ds.to_vec(), cum_len, cum_qh, vec![None; n])
    }

    #[test]
    fn statement_ids_round_trip() {
        for st in Statement::ALL {
            assert_eq!(st.id().parse::<Statement>().unwrap(), st);
            assert_eq!(st.alias().parse::<Statement>().unwrap(), st);
            let s = serde_json::to_string(&st).unwrap();
            assert_eq!(serde_json::from_str::<Statement>(&s).unwrap(), st);
        }
        assert!("bogus".parse::<Statement>().is_err());
    }

    #[test]
    fn frozen_constants() {
        // recomputed by hand: ln 3 = 1.0986123, ln 5 = 1.6094379, e^4 = 54.59815,
        // ln(1 + 2e^4) = ln 110.19630 = 4.7022667
        assert_abs_diff_eq!(necessity_constant(1.0), 6.591674, epsilon = 1e-6);
        assert_abs_diff_eq!(predicted_a(1.0, 0.0, 0.0).unwrap(), 6.591674, epsilon = 1e-6);
        assert_abs_diff_eq!(predicted_a(1.0, 1.0, 0.0).unwrap(), 6.0 * 110.1963_f64.ln() + 8.0, epsilon = 1e-3);
        assert_abs_diff_eq!(predicted_a(1.0, 1.0, 0.0).unwrap(), 36.213580, epsilon = 1e-5);
        assert_abs_diff_eq!(predicted_a(2.0, 0.0, 0.0).unwrap(), 19.313255, epsilon = 1e-6);
        let m = cone_bound(necessity_constant(1.0));
        assert!((m - 1_594_323.0).abs() < 1e-6 * m, "{m}");
        assert_eq!(llc_from_lec(1.0, 2.0), 18.0);
        assert_eq!(llc_from_lec(1.0, 1.0), 6.0);
        assert_eq!(john_ghs_coefficient(1.0, 1.0, 1.0), 4.0);
        assert!(predicted_a(0.5, 0.0, 0.0).is_err());
        assert!(predicted_a(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn tally_classifies_checks() {
        let mut a = InstanceChecks::new(json!("a"));
        a.le("tight", 1.0, 1.0 - 1e-10, 1e-9);
        a.le("roomy", 0.0, 2.0, 0.0);
        let mut b = InstanceChecks::new(json!("b"));
        b.assume_le("hyp", 2.0, 1.0, 0.0);
        b.le("bad", 5.0, 1.0, 0.0);
        let out = tally(Statement::LogRatio, vec![a.clone(), b], Value::Null);
        assert_eq!(out.failure_count, 0);
        assert_eq!(out.hypothesis_failure_count, 1);
        assert_eq!(out.small_margins, 1);
        assert!(matches!(out.verdict, Verdict::HypothesisNotMet { .. }));
        let mut c = InstanceChecks::new(json!("c"));
        c.le("bad", 5.0, 1.0, 0.5);
        let out = tally(Statement::LogRatio, vec![a, c], Value::Null);
        assert_eq!(out.verdict, Verdict::Fail);
        assert_eq!(out.failures[0].instance, 1);
        assert!(out.worst_excess < 0.0 && out.worst_margin == -4.0);
        assert!(out.summary_line().starts_with("statement=eq2.1 instances=2 worst_margin=-4.0000 failures=1"));
    }

    #[test]
    fn dyadic_counts_on_a_tent() {
        let arc = line_arc(&[1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let dec = dyadic_decomposition(&arc).unwrap();
        assert_eq!((dec.n, dec.m), (2, 2));
        assert_eq!(dec.segments().len(), 5);
        assert_eq!(dec.forward[2].s, 3.0);
        assert_eq!(dec.backward[2].s, 5.0);
        let mut c = InstanceChecks::new(Value::Null);
        certify_decomposition(&arc, &dec, &mut c);
        let out = tally(Statement::Sufficiency, vec![c], Value::Null);
        assert_eq!(out.failure_count, 0, "{:?}", out.failures);
    }

    #[test]
    fn dyadic_crossing_splits_an_edge() {
        let arc = line_arc(&[1.0, 1.5, 3.5, 1.0]);
        let dec = dyadic_decomposition(&arc).unwrap();
        assert_eq!(dec.n, 1);
        assert_abs_diff_eq!(dec.forward[1].s, 1.25, epsilon = 1e-15);
        assert_eq!(dec.forward[1].d, 2.0);
        assert_eq!(dec.m, 1);
        assert_abs_diff_eq!(dec.backward[1].s, 2.0 + 1.5 / 2.5, epsilon = 1e-15);
    }

    #[test]
    fn constant_d_gives_one_segment() {
        let arc = line_arc(&[0.5; 6]);
        let dec = dyadic_decomposition(&arc).unwrap();
        assert_eq!((dec.n, dec.m), (0, 0));
        let segs = dec.segments();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].from.s, segs[0].to.s), (0.0, 5.0));
    }

    #[test]
    fn narrow_segments_decompose_to_themselves() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 64.0).unwrap();
        let gr = g.grid();
        let x = gr.snap(Point2::new(-0.97, 0.0)).unwrap().0;
        let y = gr.snap(Point2::new(0.95, 0.1)).unwrap().0;
        let arc = g.geodesic_nodes(QH, x, y).unwrap().arc;
        let dec = dyadic_decomposition(&arc).unwrap();
        assert!(dec.n >= 4 && dec.m >= 3, "{} {}", dec.n, dec.m);
        for seg in dec.segments() {
            let sub = arc.subarc(seg.from.s, seg.to.s).unwrap();
            let again = dyadic_decomposition(&sub).unwrap();
            let top = sub.d().iter().copied().fold(0.0, f64::max);
            if top < 2.0 * sub.d()[0] && top < 2.0 * sub.d()[sub.len() - 1] {
                assert_eq!((again.n, again.m), (0, 0));
                assert_abs_diff_eq!(again.length, seg.to.s - seg.from.s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn log_suites_pass_on_disk() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let cfg = SuiteConfig { samples: 100, ..SuiteConfig::default() };
        let a = verify_log_ratio_bound(&g, &cfg).unwrap();
        assert!(a.passed() && a.instances == 100, "{}", a.summary_line());
        let b = verify_log_length_bound(&g, &cfg).unwrap();
        assert!(b.passed(), "{}", b.summary_line());
        assert!(verify_log_ratio_bound(&g, &SuiteConfig { samples: 99, ..cfg }).is_err());
    }

    fn node(g: &QhGraph, x: f64, y: f64) -> usize {
        g.grid().snap(Point2::new(x, y)).unwrap().0
    }

    #[test]
    fn chord_middle_link_matches_closed_form() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 64.0).unwrap();
        let path: Vec<usize> = (-48..=48).map(|i| node(&g, i as f64 / 64.0, 0.0)).collect();
        let arc = g.arc_from_path(&path).unwrap();
        assert!(double_cone_constant(&arc, g.domain()).constant <= 1.0);
        let mid = arc.len() / 2;
        assert_eq!(arc.vertices()[mid], Point2::new(0.0, 0.0));
        // d(y) = 1/4 at the start, d(x₀) = 1 at the center
        let link = cone_chain_middle(1.0, arc.d()[0], arc.d()[mid]);
        assert_abs_diff_eq!(link, 3.0 * 5f64.ln(), epsilon = 1e-6);
        let w = json!(null);
        let c = cone_chain_checks(&g, &arc, 1.0, Slack::TIGHT, 12, 12, w).unwrap();
        let out = tally(Statement::ConeChain, vec![c], Value::Null);
        assert!(out.passed(), "{:?}", out.failures);
    }

    #[test]
    fn cone_chain_with_y_equal_z_is_tight() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let arc = g.geodesic_nodes(QH, node(&g, -0.5, 0.25), node(&g, 0.5, -0.25)).unwrap().arc;
        let a = double_cone_constant(&arc, g.domain()).constant;
        let c = cone_chain_checks(&g, &arc, a, Slack::TIGHT, 1, 1, Value::Null).unwrap();
        let out = tally(Statement::ConeChain, vec![c], Value::Null);
        assert!(out.passed());
        assert!(out.worst_margin.abs() < 1e-9, "{}", out.worst_margin);
        assert!(cone_chain_checks(&g, &arc, 0.5 * a, Slack::TIGHT, 1, 1, Value::Null).is_err());
    }

    #[test]
    fn predicted_a_grows_in_each_argument() {
        let grid = [0.0, 0.25, 1.0, 3.0];
        for a in [1.0, 1.5, 4.0] {
            for &delta in &grid {
                for &r in &grid {
                    let base = predicted_a(a, delta, r).unwrap();
                    assert!(predicted_a(a + 0.5, delta, r).unwrap() > base);
                    assert!(predicted_a(a, delta + 0.5, r).unwrap() > base);
                    assert!(predicted_a(a, delta, r + 0.5).unwrap() > base);
                }
            }
        }
    }

    #[test]
    fn hyperbolic_john_small_run_on_disk() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let cfg = SuiteConfig { samples: 10, seed: 3, ..SuiteConfig::default() };
        let tris = lemma_triangles(&g, 10, 3).unwrap();
        assert_eq!(tris.len(), 10);
        let out = verify_hyperbolic_john(&g, 1.0, 1.0, None, &tris, &cfg).unwrap();
        assert!(out.passed(), "{}", out.summary_line());
        let skipped = verify_hyperbolic_john(&g, f64::INFINITY, 1.0, None, &tris, &cfg).unwrap();
        assert!(matches!(skipped.verdict, Verdict::Skipped { .. }));
    }

    #[test]
    fn coherence_tracks_finiteness() {
        let g = graph_for(&gallery("disk").unwrap(), 1.0 / 32.0).unwrap();
        let est = EstimatorConfig { pairs: 10, ..EstimatorConfig::default() };
        let mut reports: Vec<ConditionReport> = [Condition::Uniform, Condition::John, Condition::Gh, Condition::Bs]
            .into_iter()
            .map(|c| crate::conditions::estimate(&g, c, &est).unwrap())
            .collect();
        assert!(verify_uniform_coherence(&reports).unwrap().passed());
        reports[0].estimate = crate::conditions::Estimate::Divergent { reason: "test".into() };
        assert_eq!(verify_uniform_coherence(&reports).unwrap().verdict, Verdict::Fail);
        assert!(verify_uniform_coherence(&reports[1..]).is_err());
    }
}
