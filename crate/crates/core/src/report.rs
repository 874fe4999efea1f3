//! Run configuration, orchestration of the commands, and the report files
//! they produce (JSON, CSV, SVG).

use std::collections::hash_map::{Entry, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conditions::{estimate_refined, replay, trend_divergence, Condition, ConditionReport, Estimate, EstimatorConfig, Instance, TrendPoint};
use crate::engine::{extrapolate, graph_for, shortest_path, Convergence, GeodesicResult, MetricKind, QhGraph};
use crate::hyperbolicity::{delta_four_point, DeltaEstimate};
use crate::sampling::Slack;
use crate::theorems::{self, Statement, SuiteConfig, Verdict, VerificationOutcome};
use crate::{gallery, LabError, PlanarDomain, Point2, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Multiplier applied to the four-point δ before it enters the
/// hyperbolic John bound.
pub const DELTA_SAFETY: f64 = 1.5;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

/// Sample sizes per suite and estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub log_bounds: usize,
    pub cone_chain: usize,
    pub necessity: usize,
    pub sufficiency: usize,
    pub triangles: usize,
    pub propositions: usize,
    pub estimators: usize,
    pub quadruples: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        SampleCounts {
            log_bounds: 100,
            cone_chain: 50,
            necessity: 500,
            sufficiency: 200,
            triangles: 50,
            propositions: 50,
            estimators: 50,
            quadruples: 10_000,
        }
    }
}

impl SampleCounts {
    /// The same count everywhere, respecting the minimum of 100 for the
    /// log bounds and the quadruple count.
    pub fn uniform(n: usize) -> Self {
        SampleCounts {
            log_bounds: n.max(100),
            cone_chain: n,
            necessity: n,
            sufficiency: n,
            triangles: n,
            propositions: n,
            estimators: n,
            quadruples: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Gallery name or path to a domain file.
    pub domain: String,
    /// Grid spacings, strictly decreasing. Suites run on the last one.
    pub h: Vec<f64>,
    pub seed: u64,
    pub samples: SampleCounts,
    /// Replaces the measured relative slack when set.
    #[serde(default)]
    pub slack_rel: Option<f64>,
    pub points_per_geodesic: usize,
}

pub fn default_schedule() -> Vec<f64> {
    vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]
}

impl RunConfig {
    pub fn new(domain: impl Into<String>) -> Self {
        RunConfig {
            domain: domain.into(),
            h: default_schedule(),
            seed: 0,
            samples: SampleCounts::default(),
            slack_rel: None,
            points_per_geodesic: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_empty() {
            return Err(LabError::InvalidParameter("empty h schedule".into()));
        }
        if self.h.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(LabError::InvalidParameter(format!("h values must be positive: {:?}", self.h)));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::InvalidParameter(format!("h schedule must be strictly decreasing: {:?}", self.h)));
        }
        if let Some(r) = self.slack_rel {
            if !(r.is_finite() && r >= 0.0) {
                return Err(LabError::InvalidParameter(format!("slack must be a nonnegative number, got {r}")));
            }
        }
        Ok(())
    }

    pub fn finest_h(&self) -> f64 {
        *self.h.last().expect("validated schedule")
    }

    pub fn load_domain(&self) -> Result<PlanarDomain> {
        gallery(&self.domain)
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            pairs: self.samples.estimators,
            seed: self.seed,
            points_per_geodesic: self.points_per_geodesic,
            ..EstimatorConfig::default()
        }
    }
}

/// Parses a spacing list such as `1/16,1/32,0.015625`.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let v = match t.split_once('/') {
                Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
                None => t.parse::<f64>().ok(),
            };
            v.ok_or_else(|| LabError::InvalidParameter(format!("bad h value '{t}'")))
        })
        .collect()
}

/// Parses `x,y`.
pub fn parse_point(s: &str) -> Result<Point2> {
    let bad = || LabError::InvalidParameter(format!("expected x,y but got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let x = a.trim().parse::<f64>().map_err(|_| bad())?;
    let y = b.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Point2::new(x, y))
}

/// A self-contained record of one command: the echoed configuration and
/// domain are enough to reproduce every number in it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub domain: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimates: Vec<ConditionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<Slack>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<VerificationOutcome>,
    pub wall_time_s: f64,
}

impl Report {
    fn new(command: String, config: &RunConfig, domain: &PlanarDomain) -> Self {
        Report {
            tool: "qhlab".into(),
            version: VERSION.into(),
            command,
            config: config.clone(),
            domain: domain.to_file_value(),
            geodesic: None,
            estimates: Vec::new(),
            delta: None,
            slack: None,
            outcomes: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Exit code for the report: failures beat unmet hypotheses.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.outcomes)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(g) = &self.geodesic {
            out.push(format!(
                "geodesic metric={} distance={} extrapolated={}",
                g.metric,
                g.values.last().copied().unwrap_or(f64::NAN),
                g.convergence.as_ref().and_then(|c| c.extrapolated).map_or("none".into(), |v| v.to_string())
            ));
        }
        for r in &self.estimates {
            let est = match &r.estimate {
                Estimate::Finite { value } => value.to_string(),
                Estimate::Divergent { reason } => format!("divergent ({reason})"),
            };
            out.push(format!("condition={} h={} estimate={est}", r.condition, r.h));
        }
        if let Some(d) = &self.delta {
            out.push(format!("delta four_point={} h={} divergent={}", d.estimate.four_point, d.estimate.h, d.divergent.is_some()));
        }
        out.extend(self.outcomes.iter().map(VerificationOutcome::summary_line));
        out
    }
}

pub fn exit_code(outcomes: &[VerificationOutcome]) -> i32 {
    if outcomes.iter().any(|o| o.verdict == Verdict::Fail) {
        EXIT_FAILURE
    } else if outcomes.iter().any(|o| !o.passed()) {
        EXIT_HYPOTHESIS
    } else {
        EXIT_OK
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicRecord {
    pub metric: String,
    pub from: Point2,
    pub to: Point2,
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    pub convergence: Option<Convergence>,
    pub finest: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub estimate: DeltaEstimate,
    pub trend: Vec<TrendPoint>,
    pub divergent: Option<String>,
}

/// What `estimate` can compute: a condition constant or δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateTarget {
    Condition(Condition),
    Delta,
}

impl std::str::FromStr for EstimateTarget {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("delta") {
            Ok(EstimateTarget::Delta)
        } else {
            s.parse().map(EstimateTarget::Condition)
        }
    }
}

impl EstimateTarget {
    pub fn label(self) -> &'static str {
        match self {
            EstimateTarget::Condition(c) => c.label(),
            EstimateTarget::Delta => "delta",
        }
    }
}

fn finish(mut report: Report, start: Instant) -> Report {
    report.wall_time_s = start.elapsed().as_secs_f64();
    report
}

/// Graph distance between two points on every spacing, extrapolated when
/// the schedule halves at least three times. Returns the report and the
/// geodesic on the finest grid.
pub fn run_geodesic(cfg: &RunConfig, from: Point2, to: Point2, metric: MetricKind) -> Result<(Report, GeodesicResult)> {
    cfg.validate()?;
    let start = Instant::now();
    let domain = cfg.load_domain()?;
    for p in [from, to] {
        if !domain.contains(p) {
            return Err(LabError::Membership(p));
        }
    }
    let mut values = Vec::with_capacity(cfg.h.len());
    let mut finest = None;
    for &h in &cfg.h {
        let g = graph_for(&domain, h)?;
        let r = shortest_path(&g, metric, from, to)?;
        values.push(r.distance);
        finest = Some(r);
    }
    let mut finest = finest.expect("validated schedule");
    let convergence = extrapolate(&cfg.h, &values).ok();
    if let Some(c) = &convergence {
        finest.extrapolated = c.extrapolated;
        finest.error_estimate = c.error_estimate;
    }
    let mut report = Report::new(format!("geodesic {}", metric.label()), cfg, &domain);
    report.geodesic = Some(GeodesicRecord {
        metric: metric.label().into(),
        from,
        to,
        h: cfg.h.clone(),
        values,
        convergence,
        finest: finest.to_json(),
    });
    Ok((finish(report, start), finest))
}

fn delta_record(domain: &PlanarDomain, cfg: &RunConfig) -> Result<DeltaRecord> {
    let mut trend = Vec::with_capacity(cfg.h.len());
    let mut last = None;
    for &h in &cfg.h {
        let g = graph_for(domain, h)?;
        let d = delta_four_point(&g, cfg.samples.quadruples, cfg.seed)?;
        trend.push(TrendPoint { h, value: d.four_point });
        last = Some(d);
    }
    let divergent = trend_divergence(&trend);
    Ok(DeltaRecord { estimate: last.expect("validated schedule"), trend, divergent })
}

/// Estimates one condition constant (or δ) over the refinement schedule.
pub fn run_estimate(cfg: &RunConfig, target: EstimateTarget) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let domain = cfg.load_domain()?;
    let mut report = Report::new(format!("estimate {}", target.label()), cfg, &domain);
    match target {
        EstimateTarget::Condition(c) => {
            report.estimates.push(estimate_refined(&domain, &cfg.h, c, &cfg.estimator_config())?);
        }
        EstimateTarget::Delta => report.delta = Some(delta_record(&domain, cfg)?),
    }
    Ok(finish(report, start))
}

/// Prerequisite constants, estimated on demand over the schedule.
struct Prerequisites<'a> {
    domain: &'a PlanarDomain,
    cfg: &'a RunConfig,
    reports: Vec<ConditionReport>,
    delta: Option<DeltaRecord>,
}

impl Prerequisites<'_> {
    fn report(&mut self, c: Condition) -> Result<&ConditionReport> {
        if let Some(i) = self.reports.iter().position(|r| r.condition == c) {
            return Ok(&self.reports[i]);
        }
        let r = estimate_refined(self.domain, &self.cfg.h, c, &self.cfg.estimator_config())?;
        self.reports.push(r);
        Ok(self.reports.last().unwrap())
    }

    /// Finite values of the listed constants, or the reason one diverged.
    fn values(&mut self, conds: &[Condition]) -> Result<std::result::Result<Vec<f64>, String>> {
        let mut out = Vec::with_capacity(conds.len());
        for &c in conds {
            match &self.report(c)?.estimate {
                Estimate::Finite { value } => out.push(*value),
                Estimate::Divergent { reason } => return Ok(Err(format!("{c} constant diverges: {reason}"))),
            }
        }
        Ok(Ok(out))
    }

    fn delta(&mut self) -> Result<&DeltaRecord> {
        if self.delta.is_none() {
            self.delta = Some(delta_record(self.domain, self.cfg)?);
        }
        Ok(self.delta.as_ref().unwrap())
    }
}

/// Runs one statement's suite, or all of them, on the finest grid of the
/// schedule. Prerequisite constants that diverge under refinement turn the
/// statement into a hypothesis-not-met outcome.
pub fn run_verify(cfg: &RunConfig, which: Option<Statement>) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let domain = cfg.load_domain()?;
    let graph = graph_for(&domain, cfg.finest_h())?;
    let slack = match cfg.slack_rel {
        Some(rel) => Slack::with_rel(rel),
        None => Slack::measure(&graph)?,
    };
    let statements: Vec<Statement> = match which {
        Some(s) => vec![s],
        None => Statement::ALL.to_vec(),
    };
    let mut pre = Prerequisites { domain: &domain, cfg, reports: Vec::new(), delta: None };
    let mut outcomes = Vec::with_capacity(statements.len());
    for st in statements {
        outcomes.push(verify_one(&graph, cfg, slack, &mut pre, st)?);
    }
    let label = which.map_or("all".to_string(), |s| s.id().to_string());
    let mut report = Report::new(format!("verify {label}"), cfg, &domain);
    report.slack = Some(slack);
    report.estimates = pre.reports;
    report.delta = pre.delta;
    report.outcomes = outcomes;
    Ok(finish(report, start))
}

fn suite(cfg: &RunConfig, slack: Slack, samples: usize) -> SuiteConfig {
    SuiteConfig { samples, seed: cfg.seed, slack, ..SuiteConfig::default() }
}

fn verify_one(graph: &QhGraph, cfg: &RunConfig, slack: Slack, pre: &mut Prerequisites, st: Statement) -> Result<VerificationOutcome> {
    use Condition::*;
    let n = &cfg.samples;
    let points = cfg.points_per_geodesic;
    let unmet = |reason: String| Ok(VerificationOutcome::hypothesis_not_met(st, reason, Value::Null));
    match st {
        Statement::LogRatio => theorems::verify_log_ratio_bound(graph, &suite(cfg, slack, n.log_bounds.max(100))),
        Statement::LogLength => theorems::verify_log_length_bound(graph, &suite(cfg, slack, n.log_bounds)),
        Statement::ConeChain => theorems::verify_cone_chain(graph, &suite(cfg, slack, n.cone_chain)),
        Statement::Necessity => match pre.values(&[Qhjohn])? {
            Ok(v) => theorems::verify_necessity(graph, v[0], &suite(cfg, slack, n.necessity)),
            Err(r) => unmet(r),
        },
        Statement::Sufficiency => match pre.values(&[Qhjohn])? {
            Ok(v) => {
                let big_a = theorems::necessity_constant(v[0].max(1.0));
                theorems::verify_sufficiency(graph, big_a, &suite(cfg, slack, n.sufficiency))
            }
            Err(r) => unmet(r),
        },
        Statement::HyperbolicJohn => {
            let a = match pre.values(&[John])? {
                Ok(v) => v[0],
                Err(r) => return unmet(r),
            };
            let d = pre.delta()?;
            if let Some(r) = &d.divergent {
                return unmet(format!("delta diverges: {r}"));
            }
            let delta = DELTA_SAFETY * d.estimate.four_point;
            let s = suite(cfg, slack, n.propositions);
            let tris = theorems::lemma_triangles(graph, n.triangles, cfg.seed)?;
            theorems::verify_hyperbolic_john(graph, a, delta, None, &tris, &s)
        }
        Statement::LlcGhs => match pre.values(&[Llc2, Gh, Bs])? {
            Ok(v) => theorems::verify_llc_ghs(graph, v[0], v[1], v[2], points, &suite(cfg, slack, n.propositions)),
            Err(r) => unmet(r),
        },
        Statement::LecLlc => match pre.values(&[Qhjohn, Lec])? {
            Ok(v) => {
                let s = suite(cfg, slack, n.propositions);
                theorems::verify_lec_llc(graph, v[0], v[1], &theorems::estimator_config(&s, points), slack)
            }
            Err(r) => unmet(r),
        },
        Statement::JohnGhs => match pre.values(&[John, Gh, Bs])? {
            Ok(v) => theorems::verify_john_ghs(graph, v[0], v[1], v[2], points, &suite(cfg, slack, n.propositions)),
            Err(r) => unmet(r),
        },
        Statement::UniformCoherence => {
            let mut reports = Vec::new();
            for c in [Uniform, John, Gh, Bs] {
                reports.push(pre.report(c)?.clone());
            }
            theorems::verify_uniform_coherence(&reports)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub id: String,
    #[serde(with = "crate::jsonf")]
    pub recorded: f64,
    #[serde(with = "crate::jsonf")]
    pub recomputed: f64,
    pub matches: bool,
}

/// Re-evaluates the witnesses of a report (all of them, or the one with
/// the given id) on the grid they were recorded at.
pub fn replay_report(report: &Report, id: Option<&str>) -> Result<Vec<ReplayRecord>> {
    let domain = PlanarDomain::from_file_value(&report.domain)?;
    let mut graphs: HashMap<u64, QhGraph> = HashMap::new();
    let mut out = Vec::new();
    for r in &report.estimates {
        for w in r.witnesses.iter().filter(|w| id.is_none_or(|id| w.id == id)) {
            let graph = match graphs.entry(r.h.to_bits()) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(graph_for(&domain, r.h)?),
            };
            let (v, matches) = replay(graph, w)?;
            out.push(ReplayRecord { id: w.id.clone(), recorded: w.value, recomputed: v, matches });
        }
    }
    if out.is_empty() {
        let what = id.map_or("any witness".to_string(), |id| format!("witness '{id}'"));
        return Err(LabError::InvalidParameter(format!("report has no {what}")));
    }
    Ok(out)
}

#[derive(Serialize)]
struct WitnessRow<'a> {
    condition: &'a str,
    id: &'a str,
    kind: &'static str,
    value: f64,
    x_x: f64,
    x_y: f64,
    y_x: f64,
    y_y: f64,
    center_x: Option<f64>,
    center_y: Option<f64>,
    radius: Option<f64>,
    detail: String,
}

/// Witness table with fixed columns: `condition,id,kind,value,x_x,x_y,
/// y_x,y_y,center_x,center_y,radius,detail`. For LLC witnesses `x` and `y`
/// are the two joined points.
pub fn witness_csv(estimates: &[ConditionReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in estimates {
        for wit in &r.witnesses {
            let (kind, x, y, center, detail) = match &wit.instance {
                Instance::Cone { families, x, y } => ("cone", x, y, None, format!("{families:?}")),
                Instance::Uniform { families, x, y } => ("uniform", x, y, None, format!("{families:?}")),
                Instance::GehringHayman { x, y, part } => ("gehring-hayman", x, y, None, format!("{part:?}")),
                Instance::BallSeparation { x, y, vertex } => ("ball-separation", x, y, None, format!("vertex {vertex}")),
                Instance::Llc { center, r, y, z } => ("llc", y, z, Some((center, *r)), String::new()),
            };
            w.serialize(WitnessRow {
                condition: r.condition.label(),
                id: &wit.id,
                kind,
                value: wit.value,
                x_x: x.x,
                x_y: x.y,
                y_x: y.x,
                y_y: y.y,
                center_x: center.map(|c| c.0.x),
                center_y: center.map(|c| c.0.y),
                radius: center.map(|c| c.1),
                detail,
            })
            .map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

#[derive(Serialize)]
struct FailureRow<'a> {
    statement: &'a str,
    kind: &'static str,
    instance: usize,
    check: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    witness: String,
}

/// Failure table with fixed columns: `statement,kind,instance,check,lhs,
/// rhs,slack,witness`, where `kind` is `failure` or `hypothesis` and the
/// witness is inline JSON.
pub fn failure_csv(outcomes: &[VerificationOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        let rows = o.failures.iter().map(|f| ("failure", f)).chain(o.hypothesis_failures.iter().map(|f| ("hypothesis", f)));
        for (kind, f) in rows {
            w.serialize(FailureRow {
                statement: o.statement.id(),
                kind,
                instance: f.instance,
                check: &f.check,
                lhs: f.lhs,
                rhs: f.rhs,
                slack: f.slack,
                witness: f.witness.to_string(),
            })
            .map_err(csv_err)?;
        }
    }
    // keep the header even without rows
    if no_rows(outcomes) {
        w.write_record(["statement", "kind", "instance", "check", "lhs", "rhs", "slack", "witness"]).map_err(csv_err)?;
    }
    finish_csv(w)
}

fn no_rows(outcomes: &[VerificationOutcome]) -> bool {
    outcomes.iter().all(|o| o.failures.is_empty() && o.hypothesis_failures.is_empty())
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Internal(format!("csv: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| LabError::Internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| LabError::Internal(e.to_string()))
}

/// Static SVG of the domain boundary with polylines and marked points on
/// top, y axis pointing up.
pub fn render_svg(domain: &PlanarDomain, lines: &[Vec<Point2>], marks: &[Point2]) -> String {
    let (lo, hi) = domain.bounding_box();
    let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y);
    let (x0, y0) = (lo.x - pad, lo.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let scale = 800.0 / w.max(h);
    let map = |p: &Point2| ((p.x - x0) * scale, (y0 + h - p.y) * scale);
    let path = |pts: &[Point2]| {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = map(p);
            let _ = write!(s, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        s
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        w * scale,
        h * scale,
        w * scale,
        h * scale
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for ring in domain.boundary_polylines(w.max(h) / 800.0) {
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, path(&ring));
    }
    for line in lines {
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="crimson" stroke-width="2"/>"#, path(line));
    }
    for p in marks {
        let (x, y) = map(p);
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="royalblue"/>"#);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Points worth marking for a report: geodesic endpoints and witness
/// points.
fn report_marks(report: &Report) -> Vec<Point2> {
    let mut marks = Vec::new();
    if let Some(g) = &report.geodesic {
        marks.extend([g.from, g.to]);
    }
    for r in &report.estimates {
        for w in &r.witnesses {
            match &w.instance {
                Instance::Cone { x, y, .. }
                | Instance::Uniform { x, y, .. }
                | Instance::GehringHayman { x, y, .. }
                | Instance::BallSeparation { x, y, .. } => marks.extend([*x, *y]),
                Instance::Llc { center, y, z, .. } => marks.extend([*center, *y, *z]),
            }
        }
    }
    marks
}

/// Writes `<stem>.json`, a CSV when the report has witnesses or outcomes,
/// and with `svg` a drawing. Returns the written paths.
pub fn write_outputs(report: &Report, dir: &Path, stem: &str, svg: bool, lines: &[Vec<Point2>]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    put(format!("{stem}.json"), report.to_json()?)?;
    if !report.outcomes.is_empty() {
        put(format!("{stem}-failures.csv"), failure_csv(&report.outcomes)?)?;
    }
    if report.estimates.iter().any(|r| !r.witnesses.is_empty()) {
        put(format!("{stem}-witnesses.csv"), witness_csv(&report.estimates)?)?;
    }
    if svg {
        let domain = PlanarDomain::from_file_value(&report.domain)?;
        put(format!("{stem}.svg"), render_svg(&domain, lines, &report_marks(report)))?;
    }
    Ok(written)
}
