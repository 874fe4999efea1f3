//! Acceptance suite. Runs every criterion in sequence, prints one
//! PASS/FAIL line each, and exits nonzero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use qhlab::conditions::{estimate, estimate_refined, Condition, ConditionReport, EstimatorConfig};
use qhlab::domain::GALLERY;
use qhlab::engine::converge;
use qhlab::hyperbolicity::delta_four_point;
use qhlab::report::{self, EstimateTarget, Report, RunConfig, SampleCounts};
use qhlab::sampling::Slack;
use qhlab::theorems::{self, SuiteConfig, Verdict, VerificationOutcome};
use qhlab::{gallery, graph_for, MetricKind, Point2, QhGraph, Result};

const SEED: u64 = 1;
const H: f64 = 1.0 / 64.0;
const FINE_H: f64 = 1.0 / 128.0;
const SCHEDULE: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Result<Outcome> + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// Grid, slack and measured constants of one corpus domain at `H`.
struct Measured {
    name: &'static str,
    graph: QhGraph,
    slack: Slack,
    constants: Vec<ConditionReport>,
}

impl Measured {
    fn new(name: &'static str) -> Result<Self> {
        let graph = graph_for(&gallery(name)?, H)?;
        let slack = Slack::measure(&graph)?;
        let est = EstimatorConfig { pairs: 50, seed: SEED, ..EstimatorConfig::default() };
        let constants = [Condition::Qhjohn, Condition::John, Condition::Llc2, Condition::Lec, Condition::Gh, Condition::Bs]
            .into_iter()
            .map(|c| estimate(&graph, c, &est))
            .collect::<Result<_>>()?;
        Ok(Measured { name, graph, slack, constants })
    }

    fn value(&self, c: Condition) -> f64 {
        let r = self.constants.iter().find(|r| r.condition == c).expect("measured");
        r.estimate.value().unwrap_or(f64::INFINITY)
    }

    fn suite(&self, samples: usize) -> SuiteConfig {
        SuiteConfig { samples, seed: SEED, slack: self.slack, ..SuiteConfig::default() }
    }
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

fn status(o: &VerificationOutcome) -> String {
    format!("{} {}", o.statement, o.summary_line().rsplit("status=").next().unwrap_or(""))
}

fn forced_distances() -> Result<Outcome> {
    let start = Instant::now();
    let disk = gallery("disk")?;
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for (x, exact) in [(0.9, 10f64.ln()), (0.5, 2f64.ln())] {
        let c = converge(&disk, MetricKind::Quasihyperbolic, p(0.0, 0.0), p(x, 0.0), &hs)?;
        let v = c.extrapolated.unwrap_or(f64::NAN);
        let rel = (v - exact).abs() / exact;
        pass &= rel < 0.01;
        parts.push(format!("k(0,({x},0))={v:.5} vs {exact:.5} rel {rel:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    check(pass, format!("{}; {secs:.1}s", parts.join(", ")))
}

fn inequality_suites() -> Result<Outcome> {
    let mut pass = true;
    let mut worst: f64 = f64::INFINITY;
    let mut bad = Vec::new();
    for &name in GALLERY {
        let g = graph_for(&gallery(name)?, FINE_H)?;
        let cfg = SuiteConfig { samples: 100, seed: SEED, ..SuiteConfig::default() };
        for o in [theorems::verify_log_ratio_bound(&g, &cfg)?, theorems::verify_log_length_bound(&g, &cfg)?] {
            let ok = o.passed() && o.instances >= 100 && o.worst_margin >= -1e-9;
            worst = worst.min(o.worst_margin);
            if !ok {
                bad.push(format!("{name} {}", status(&o)));
            }
            pass &= ok;
        }
    }
    check(pass, format!("7 domains x 100 pairs/curves at h=1/128, worst margin {worst:+.3e} {}", bad.join("; ")))
}

fn cone_chain(corpus: &[Measured]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in corpus {
        let o = theorems::verify_cone_chain(&m.graph, &m.suite(50))?;
        pass &= o.passed() && o.instances >= 50;
        parts.push(format!("{} {}x{:+.2e}", m.name, o.instances, o.worst_margin));
    }
    check(pass, parts.join(", "))
}

fn necessity(corpus: &[Measured]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in corpus.iter().filter(|m| ["disk", "square", "slit-disk"].contains(&m.name)) {
        let a = m.value(Condition::Qhjohn);
        let o = theorems::verify_necessity(&m.graph, a, &m.suite(500))?;
        pass &= o.passed() && o.instances >= 500;
        parts.push(format!("{} a={a:.3} {} inst margin {:+.3}", m.name, o.instances, o.worst_margin));
    }
    check(pass, parts.join(", "))
}

fn sufficiency(corpus: &[Measured]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in corpus {
        let big_a = theorems::necessity_constant(m.value(Condition::Qhjohn).max(1.0));
        let o = theorems::verify_sufficiency(&m.graph, big_a, &m.suite(200))?;
        pass &= o.passed() && o.instances >= 200;
        parts.push(format!("{} {} {}", m.name, o.instances, if o.passed() { "ok" } else { "FAILED" }));
    }
    check(pass, parts.join(", "))
}

fn hyperbolic_john(corpus: &[Measured]) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in corpus.iter().filter(|m| ["disk", "slit-disk"].contains(&m.name)) {
        let delta = 1.5 * delta_four_point(&m.graph, 10_000, SEED)?.four_point;
        let tris = theorems::lemma_triangles(&m.graph, 50, SEED)?;
        let o = theorems::verify_hyperbolic_john(&m.graph, m.value(Condition::John), delta, None, &tris, &m.suite(50))?;
        let n = o.details["triangles"].as_u64().unwrap_or(0);
        pass &= o.passed() && n >= 50;
        let r = o.details["r_measured"].as_f64().unwrap_or(f64::NAN);
        parts.push(format!("{} delta={delta:.3} R={r:.3} triangles={n} {}", m.name, status(&o)));
    }
    check(pass, parts.join(", "))
}

fn propositions(corpus: &[Measured]) -> Result<Outcome> {
    let mut pass = true;
    let mut unmet = Vec::new();
    let mut count = 0;
    for m in corpus {
        let v = |c| m.value(c);
        let cfg = m.suite(50);
        let outcomes = [
            theorems::verify_llc_ghs(&m.graph, v(Condition::Llc2), v(Condition::Gh), v(Condition::Bs), 8, &cfg)?,
            theorems::verify_lec_llc(&m.graph, v(Condition::Qhjohn), v(Condition::Lec), &theorems::estimator_config(&cfg, 8), m.slack)?,
            theorems::verify_john_ghs(&m.graph, v(Condition::John), v(Condition::Gh), v(Condition::Bs), 8, &cfg)?,
        ];
        for o in outcomes {
            count += 1;
            match &o.verdict {
                Verdict::Pass => {}
                // the shared samples show an input constant is not finite
                Verdict::HypothesisNotMet { .. } => unmet.push(format!("{} {}", m.name, o.statement)),
                _ => {
                    pass = false;
                    unmet.push(format!("{} {}", m.name, status(&o)));
                }
            }
        }
    }
    let mut coherent = Vec::new();
    for &name in GALLERY {
        let d = gallery(name)?;
        let est = EstimatorConfig { pairs: 50, seed: SEED, ..EstimatorConfig::default() };
        let reports = [Condition::Uniform, Condition::John, Condition::Gh, Condition::Bs]
            .into_iter()
            .map(|c| estimate_refined(&d, &SCHEDULE, c, &est))
            .collect::<Result<Vec<_>>>()?;
        let o = theorems::verify_uniform_coherence(&reports)?;
        pass &= o.passed();
        coherent.push(format!("{name}:{}", if reports[0].estimate.is_finite() { "uniform" } else { "not-uniform" }));
    }
    check(
        pass,
        format!(
            "{count} proposition runs, unmet hypotheses [{}]; coherence {}",
            unmet.join(", "),
            coherent.join(" ")
        ),
    )
}

fn negative_control() -> Result<Outcome> {
    let est = EstimatorConfig { pairs: 50, seed: SEED, ..EstimatorConfig::default() };
    let trend = |name: &str| -> Result<Vec<f64>> {
        let r = estimate_refined(&gallery(name)?, &SCHEDULE, Condition::John, &est)?;
        Ok(r.trend.iter().map(|t| t.value).collect())
    };
    let (cusp, disk) = (trend("cusp")?, trend("disk")?);
    let growth = cusp[3] / cusp[0];
    let (lo, hi) = disk.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / lo;
    check(
        growth >= 2.0 && spread <= 0.10,
        format!("cusp john {cusp:.3?} grows {growth:.2}x; disk john {disk:.3?} spread {:.1}%", 100.0 * spread),
    )
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::new("slit-disk");
    cfg.h = vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    cfg.seed = 7;
    cfg.samples = SampleCounts::uniform(30);
    let mut total = 0;
    let mut pass = true;
    for c in [Condition::John, Condition::Gh, Condition::Bs, Condition::Llc2, Condition::Uniform] {
        let rep = report::run_estimate(&cfg, EstimateTarget::Condition(c))?;
        let files = report::write_outputs(&rep, dir.path(), c.label(), false, &[])?;
        let loaded = Report::load(&files[0])?;
        for r in report::replay_report(&loaded, None)? {
            total += 1;
            pass &= r.matches;
        }
    }
    let disk = graph_for(&gallery("disk")?, H)?;
    let deltas = (1..=5).map(|s| delta_four_point(&disk, 10_000, s).map(|d| d.four_point)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = deltas.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / hi;
    pass &= total > 0 && spread < 0.10;
    check(pass, format!("{total} witnesses replayed bit-identically; disk delta over 5 seeds {deltas:.4?} spread {:.1}%", 100.0 * spread))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus: Vec<Measured> = match GALLERY.iter().map(|&n| Measured::new(n)).collect() {
        Ok(c) => c,
        Err(e) => {
            println!("acceptance: could not measure the corpus: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("forced quasihyperbolic distances", Box::new(forced_distances)),
        ("log-ratio and log-length inequalities", Box::new(inequality_suites)),
        ("cone chain with proof steps", Box::new(|| cone_chain(&corpus))),
        ("qh-John necessity bound", Box::new(|| necessity(&corpus))),
        ("dyadic sufficiency machinery", Box::new(|| sufficiency(&corpus))),
        ("hyperbolic John pipeline", Box::new(|| hyperbolic_john(&corpus))),
        ("constant relations and coherence", Box::new(|| propositions(&corpus))),
        ("negative control", Box::new(negative_control)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {}: {} ({:.1}s) {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed in {:.0}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
