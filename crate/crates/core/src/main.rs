use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qhlab::report::{self, EstimateTarget, Report, RunConfig, SampleCounts, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use qhlab::theorems::Statement;
use qhlab::{LabError, MetricKind};

#[derive(Parser)]
#[command(name = "qhlab", version, about = "Quasihyperbolic geodesics, condition estimators and inequality suites on planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Gallery domain name (e.g. disk, cusp(3)) or path to a domain JSON file
    #[arg(long, default_value = "disk")]
    domain: String,
    /// Strictly decreasing grid spacings, e.g. 1/16,1/32,1/64
    #[arg(long)]
    h: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// One sample count for every suite and estimator (log bounds keep at least 100)
    #[arg(long)]
    samples: Option<usize>,
    /// Relative slack replacing the measured discretization error
    #[arg(long)]
    slack: Option<f64>,
    /// Directory for JSON/CSV/SVG output; without it the JSON report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw an SVG (needs --out)
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Geodesic between two points, refined over the h schedule
    Geodesic {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// qh or length
        #[arg(long, default_value = "qh")]
        metric: String,
    },
    /// Estimate a condition constant: john, qhjohn, llc2, lec, gh, bs, uniform or delta
    Estimate {
        #[command(flatten)]
        common: Common,
        condition: String,
    },
    /// Run a statement's suite (id or alias), or `all`
    Verify {
        #[command(flatten)]
        common: Common,
        statement: String,
    },
    /// Re-evaluate the witnesses of a report and compare bit for bit
    Replay {
        report: PathBuf,
        /// Only this witness id
        witness: Option<String>,
    },
}

fn config(c: &Common) -> Result<RunConfig, LabError> {
    let mut cfg = RunConfig::new(c.domain.clone());
    if let Some(h) = &c.h {
        cfg.h = report::parse_schedule(h)?;
    }
    cfg.seed = c.seed;
    if let Some(n) = c.samples {
        cfg.samples = SampleCounts::uniform(n);
    }
    cfg.slack_rel = c.slack;
    cfg.validate()?;
    Ok(cfg)
}

/// Input problems map to the usage exit code, everything else to 1.
fn error_code(e: &LabError) -> i32 {
    match e {
        LabError::Membership(_)
        | LabError::Resolution { .. }
        | LabError::InvalidParameter(_)
        | LabError::UnknownDomain(_)
        | LabError::Json(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn emit(report: &Report, common: &Common, stem: &str, lines: &[Vec<qhlab::Point2>]) -> Result<(), LabError> {
    match &common.out {
        Some(dir) => {
            for line in report.summary_lines() {
                println!("{line}");
            }
            for p in report::write_outputs(report, dir, stem, common.svg, lines)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            if common.svg {
                eprintln!("--svg needs --out; skipping the drawing");
            }
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            println!("{}", report.to_json()?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Geodesic { common, from, to, metric } => {
            let cfg = config(&common)?;
            let metric: MetricKind = metric.parse()?;
            let (from, to) = (report::parse_point(&from)?, report::parse_point(&to)?);
            let (rep, geo) = report::run_geodesic(&cfg, from, to, metric)?;
            emit(&rep, &common, "geodesic", &[geo.arc.vertices().to_vec()])?;
            Ok(EXIT_OK)
        }
        Command::Estimate { common, condition } => {
            let cfg = config(&common)?;
            let target: EstimateTarget = condition.parse()?;
            let rep = report::run_estimate(&cfg, target)?;
            emit(&rep, &common, &format!("estimate-{}", target.label()), &[])?;
            Ok(EXIT_OK)
        }
        Command::Verify { common, statement } => {
            let cfg = config(&common)?;
            let which = match statement.as_str() {
                "all" => None,
                s => Some(s.parse::<Statement>()?),
            };
            let rep = report::run_verify(&cfg, which)?;
            let stem = format!("verify-{}", which.map_or("all", |s| s.id()));
            emit(&rep, &common, &stem, &[])?;
            Ok(rep.exit_code())
        }
        Command::Replay { report: path, witness } => {
            let rep = Report::load(&path)?;
            let records = report::replay_report(&rep, witness.as_deref())?;
            let mut code = EXIT_OK;
            for r in &records {
                let status = if r.matches { "match" } else { "MISMATCH" };
                println!("witness={} recorded={} recomputed={} {status}", r.id, r.recorded, r.recomputed);
                if !r.matches {
                    code = EXIT_FAILURE;
                }
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("QHLAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: QHLAB_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}
