//! Command-line orchestration of the half-space suites.
//!
//! Exit codes: 0 on success with all expected verdicts met, 1 on a verdict
//! or bound failure, 2 on bad input, 3 on quadrature non-convergence.
//! Reports are fully rendered before anything is written, so an error exit
//! never leaves a partial report behind.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use halfspace::corpus;
use halfspace::geometry::{HalfSpacePoint, Regularization};
use halfspace::huber;
use halfspace::kernels;
use halfspace::measures::{Measure, Side};
use halfspace::potentials::{
    estimate_h_dim, lower_bound_check, represent, sample_cloud, QuadratureSpec,
    RepresentationTriple, ScalarField,
};
use halfspace::report::{write_report, Format, Report};
use halfspace::rings::{self, RingCondition};
use halfspace::weakform::{self, TestFunction};
use halfspace::{Error, Result};

#[derive(Parser)]
#[command(
    name = "halfspace",
    about = "Numerical potential theory on the half-space: kernels, \
             representation formulas, ring conditions, weak-form residuals"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Ambient dimension N (2..=8)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Relative quadrature tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for every randomized ingredient
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, default_value = "json")]
    format: String,
    /// Measure description file (repeatable; side read from the file)
    #[arg(long)]
    measure: Vec<PathBuf>,
    /// Suppress the summary line on stderr
    #[arg(long, default_value_t = false)]
    quiet: bool,
}

impl Common {
    fn quad(&self) -> Result<QuadratureSpec> {
        if !(self.tol > 0.0) {
            return Err(Error::Precondition(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(QuadratureSpec {
            rel_tol: self.tol,
            seed: self.seed,
            ..QuadratureSpec::default()
        })
    }

    fn format(&self) -> Result<Format> {
        Format::from_str(&self.format)
    }

    /// Load every `--measure` file and split the set by side.
    fn measures(&self) -> Result<(Option<Measure>, Option<Measure>)> {
        let mut nu = None;
        let mut mu = None;
        for path in &self.measure {
            let text = std::fs::read_to_string(path)?;
            let m = halfspace::measures::load_measure(&text)?;
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: m.dim(),
                });
            }
            let slot = match m.side() {
                Side::Boundary => &mut nu,
                Side::Interior => &mut mu,
            };
            if slot.is_some() {
                return Err(Error::Precondition(format!(
                    "more than one {:?}-side measure given",
                    m.side()
                )));
            }
            *slot = Some(m);
        }
        Ok((nu, mu))
    }

    fn emit(&self, text: &str, what: &str) -> Result<()> {
        write_report(self.out.as_deref(), text)?;
        if !self.quiet {
            if let Some(p) = &self.out {
                eprintln!("{what} written to {}", p.display());
            }
        }
        Ok(())
    }
}

/// Field source shared by the scan-style subcommands.
#[derive(Args)]
struct FieldSource {
    /// Corpus entry name
    #[arg(long, conflicts_with = "expr")]
    corpus: Option<String>,
    /// Field expression over x1..xN, |x|, exp, log, powers
    #[arg(long)]
    expr: Option<String>,
}

impl FieldSource {
    fn field(&self, dim: usize) -> Result<ScalarField> {
        match (&self.corpus, &self.expr) {
            (Some(name), None) => corpus::entry(name)?.field(dim),
            (None, Some(src)) => ScalarField::from_expression(src, dim),
            _ => Err(Error::Precondition(
                "exactly one of --corpus or --expr is required".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one kernel at one point pair
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Interior point x, comma-separated
        #[arg(long)]
        x: String,
        /// Second interior point y (green/grad/fundamental)
        #[arg(long)]
        y: Option<String>,
        /// Boundary point y' (poisson), N-1 coordinates
        #[arg(long)]
        yprime: Option<String>,
        /// Regularization parameter
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Which kernel: green | poisson | grad | fundamental
        #[arg(long)]
        which: String,
    },
    /// Assemble u = h x_N + Poisson(nu) + Green(mu) and summarize it
    Represent {
        #[command(flatten)]
        common: Common,
        /// Linear coefficient h
        #[arg(long, default_value_t = 0.0)]
        h: f64,
    },
    /// Dyadic ring-condition scan of a field
    RingScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: FieldSource,
        /// Ring condition: r | r-plus | r-plus-zero | ball-limit | green-ring
        #[arg(long)]
        condition: String,
        /// Slope h (or level for the classical condition)
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        /// Scan center, comma-separated; default (0,...,0,1)
        #[arg(long)]
        center: Option<String>,
        /// Base radius R0; default max(4, 2.5 x_N)
        #[arg(long)]
        r0: Option<f64>,
        /// Number of dyadic levels (>= 4)
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Absolute verdict tolerance; default 1e-4 times the field scale
        #[arg(long)]
        verdict_tol: Option<f64>,
    },
    /// Weak-form residual of a field against the test battery
    WeakResidual {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: FieldSource,
        /// Check the superharmonic inequality instead of equality
        #[arg(long, default_value_t = false)]
        inequality: bool,
        /// Pass/fail residual threshold
        #[arg(long, default_value_t = 1e-3)]
        residual_tol: f64,
    },
    /// Boundary-trace ladder of a field against one boundary bump
    TraceScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: FieldSource,
        /// Strictly decreasing ladder of heights, comma-separated
        #[arg(long)]
        ladder: Option<String>,
    },
    /// Lift to R^{N+2}, verify unlift, and probe spherical means
    HuberCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: FieldSource,
        /// Mean-value excess threshold
        #[arg(long, default_value_t = 1e-6)]
        excess_tol: f64,
    },
    /// Randomized audit of the kernel identities and explicit bounds
    EstimatesAudit {
        #[command(flatten)]
        common: Common,
        /// Number of random (x, y, eps) triples
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run corpus expectations and compare against predicted verdicts
    CorpusRun {
        #[command(flatten)]
        common: Common,
        /// Run one entry only
        #[arg(long)]
        entry: Option<String>,
    },
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Precondition(format!("bad coordinate '{t}': {e}")))
        })
        .collect()
}

fn parse_point(s: &str, dim: usize) -> Result<HalfSpacePoint> {
    let c = parse_vec(s)?;
    if c.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: c.len(),
        });
    }
    HalfSpacePoint::new(c)
}

/// A flat key/value summary; CSV rows are `key,value`.
#[derive(Serialize)]
struct Summary {
    #[serde(flatten)]
    fields: serde_json::Map<String, serde_json::Value>,
}

impl Summary {
    fn of<T: Serialize>(value: &T) -> Result<Self> {
        match serde_json::to_value(value)? {
            serde_json::Value::Object(fields) => Ok(Summary { fields }),
            other => Err(Error::Precondition(format!(
                "summary must be an object, got {other}"
            ))),
        }
    }
}

impl Report for Summary {
    fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.fields {
            let flat = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k},{flat}\n"));
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.fields)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Serialize)]
struct RepresentReport {
    dim: usize,
    h: f64,
    degenerate: bool,
    estimated_h: f64,
    lower_bound_c0: f64,
    lower_bound_holds: bool,
}

#[derive(Serialize)]
struct HuberRow {
    radius: f64,
    spherical_mean: f64,
    center_value: f64,
    excess: f64,
}

#[derive(Serialize)]
struct HuberReport {
    dim: usize,
    unlift_max_err: f64,
    rows: Vec<HuberRow>,
    max_excess: f64,
}

impl Report for HuberReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("radius,spherical-mean,center-value,excess\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.radius, r.spherical_mean, r.center_value, r.excess
            ));
        }
        out
    }

    fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn cmd_kernel(
    common: &Common,
    x: &str,
    y: Option<&str>,
    yprime: Option<&str>,
    eps: f64,
    which: &str,
) -> Result<i32> {
    let dim = common.dim;
    let x = parse_point(x, dim)?;
    let eps = Regularization::new(eps)?;
    let need_y = || -> Result<HalfSpacePoint> {
        y.ok_or_else(|| Error::Precondition("this kernel needs --y".into()))
            .and_then(|s| parse_point(s, dim))
    };
    let text = match which {
        "green" => format!("{}\n", kernels::green(&x, &need_y()?, eps)?),
        "fundamental" => format!("{}\n", kernels::fundamental(&x, &need_y()?, eps)?),
        "grad" => {
            let g = kernels::grad_green(&x, &need_y()?, eps)?;
            let cells: Vec<String> = g.iter().map(|v| format!("{v}")).collect();
            format!("{}\n", cells.join(","))
        }
        "poisson" => {
            let ys = yprime
                .ok_or_else(|| Error::Precondition("poisson needs --yprime".into()))?;
            let yp = parse_vec(ys)?;
            if yp.len() != dim - 1 {
                return Err(Error::DimensionMismatch {
                    expected: dim - 1,
                    got: yp.len(),
                });
            }
            format!("{}\n", kernels::poisson(&x, &yp, eps)?)
        }
        other => {
            return Err(Error::Precondition(format!(
                "unknown kernel '{other}' (green | poisson | grad | fundamental)"
            )))
        }
    };
    common.emit(&text, "kernel value")?;
    Ok(0)
}

fn cmd_represent(common: &Common, h: f64) -> Result<i32> {
    let q = common.quad()?;
    let (nu, mu) = common.measures()?;
    let t = RepresentationTriple::new(common.dim, h, nu, mu)?;
    let u = represent(&t, &q);
    let degenerate = t.is_trivial();
    let est = estimate_h_dim(&u, common.dim, 4, &q)?;
    let grid = sample_cloud(common.dim, 4, 25, common.seed);
    let lb = lower_bound_check(&u, &t, &grid)?;
    let report = RepresentReport {
        dim: common.dim,
        h,
        degenerate,
        estimated_h: est,
        lower_bound_c0: lb.c0,
        lower_bound_holds: lb.holds,
    };
    let text = Summary::of(&report)?.render(common.format()?)?;
    common.emit(&text, "representation summary")?;
    if !common.quiet && degenerate {
        eprintln!("degenerate data: u is exactly h x_N");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ring_scan(
    common: &Common,
    source: &FieldSource,
    condition: &str,
    h: f64,
    center: Option<&str>,
    r0: Option<f64>,
    levels: usize,
    verdict_tol: Option<f64>,
) -> Result<i32> {
    let q = common.quad()?;
    let u = source.field(common.dim)?;
    let cond = RingCondition::from_str(condition)?;
    let x = match center {
        Some(s) => parse_point(s, common.dim)?,
        None => corpus::standard_center(common.dim)?,
    };
    let r0 = r0.unwrap_or_else(|| rings::default_r0(&x));
    let report = rings::scan_with_tol(&u, h, &x, cond, r0, levels, &q, verdict_tol)?;
    let text = report.render(common.format()?)?;
    common.emit(&text, "ring scan")?;
    if !common.quiet {
        eprintln!(
            "{} scan: {:?} (min {:.3e})",
            report.condition, report.verdict, report.min_value
        );
    }
    Ok(0)
}

fn cmd_weak_residual(
    common: &Common,
    source: &FieldSource,
    inequality: bool,
    residual_tol: f64,
) -> Result<i32> {
    let q = common.quad()?;
    let u = source.field(common.dim)?;
    let (nu, mu) = common.measures()?;
    let tests = weakform::battery(common.dim)?;
    let report = weakform::weak_residual(&u, mu.as_ref(), nu.as_ref(), &tests, inequality, &q)?;
    let passed = report.passes(residual_tol);
    let text = report.render(common.format()?)?;
    common.emit(&text, "weak-form residual")?;
    if !common.quiet {
        eprintln!(
            "weak residual: max {:.3e}, min slack {:.3e} -> {}",
            report.max_residual,
            report.min_slack,
            if passed { "pass" } else { "FAIL" }
        );
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_trace_scan(common: &Common, source: &FieldSource, ladder: Option<&str>) -> Result<i32> {
    let q = common.quad()?;
    let u = source.field(common.dim)?;
    let ladder = match ladder {
        Some(s) => parse_vec(s)?,
        None => weakform::default_ladder(),
    };
    let psi = TestFunction::product(common.dim, vec![0.0; common.dim - 1], 1.0, 1.0)?;
    let report = weakform::lim_trace(&u, &psi, &ladder, None, &q)?;
    let text = report.render(common.format()?)?;
    common.emit(&text, "trace ladder")?;
    if !common.quiet {
        match (report.divergent, report.limit) {
            (true, _) => eprintln!("trace: divergent"),
            (false, Some(l)) => eprintln!("trace: limit {l:.6e}"),
            (false, None) => eprintln!("trace: inconclusive"),
        }
    }
    Ok(0)
}

fn cmd_huber_check(common: &Common, source: &FieldSource, excess_tol: f64) -> Result<i32> {
    let q = common.quad()?;
    let u = source.field(common.dim)?;
    let v = huber::lift(&u, common.dim);
    let back = huber::unlift(&v)?;

    // unlift must invert lift exactly on a point cloud
    let mut unlift_max_err = 0.0f64;
    for p in sample_cloud(common.dim, 3, 20, common.seed) {
        let a = u.eval(&p);
        let b = back.eval(&p);
        if a.is_finite() && b.is_finite() {
            let err = (a - b).abs() / a.abs().max(1.0);
            unlift_max_err = unlift_max_err.max(err);
        }
    }

    // superharmonic mean-value probe around the lifted standard center
    let center = huber::LiftedPoint::from_base(&corpus::standard_center(common.dim)?);
    let cval = v.eval(&center);
    let mut rows = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    for &r in &[0.25, 0.5, 0.75] {
        let mean = huber::spherical_mean(&v, &center, r, &q)?;
        let excess = mean - cval;
        max_excess = max_excess.max(excess);
        rows.push(HuberRow {
            radius: r,
            spherical_mean: mean,
            center_value: cval,
            excess,
        });
    }
    let report = HuberReport {
        dim: common.dim,
        unlift_max_err,
        rows,
        max_excess,
    };
    let passed = unlift_max_err <= 1e-12 && max_excess <= excess_tol;
    let text = report.render(common.format()?)?;
    common.emit(&text, "lift check")?;
    if !common.quiet {
        eprintln!(
            "lift check: unlift err {:.3e}, max mean excess {:.3e} -> {}",
            report.unlift_max_err,
            report.max_excess,
            if passed { "pass" } else { "FAIL" }
        );
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_estimates_audit(common: &Common, samples: usize) -> Result<i32> {
    let report = kernels::audit(common.dim, samples, common.seed)?;
    let clean = report.clean();
    let text = Summary::of(&report)?.render(common.format()?)?;
    common.emit(&text, "estimates audit")?;
    if !common.quiet {
        eprintln!(
            "estimates audit: {} violations over {} samples -> {}",
            report.violations(),
            samples,
            if clean { "pass" } else { "FAIL" }
        );
    }
    Ok(if clean { 0 } else { 1 })
}

fn cmd_corpus_run(common: &Common, entry: Option<&str>) -> Result<i32> {
    let q = common.quad()?;
    let results = match entry {
        Some(name) => {
            let e = corpus::entry(name)?;
            let mut all = Vec::new();
            for &dim in &e.dims {
                all.extend(corpus::run_entry(&e, dim, &q)?);
            }
            all
        }
        None => corpus::run_all(&q)?,
    };
    let failed = results.iter().filter(|r| !r.passed).count();
    let text = results.as_slice().render(common.format()?)?;
    common.emit(&text, "corpus run")?;
    if !common.quiet {
        eprintln!(
            "corpus: {}/{} checks passed",
            results.len() - failed,
            results.len()
        );
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Kernel {
            common,
            x,
            y,
            yprime,
            eps,
            which,
        } => cmd_kernel(common, x, y.as_deref(), yprime.as_deref(), *eps, which),
        Cmd::Represent { common, h } => cmd_represent(common, *h),
        Cmd::RingScan {
            common,
            source,
            condition,
            h,
            center,
            r0,
            levels,
            verdict_tol,
        } => cmd_ring_scan(
            common,
            source,
            condition,
            *h,
            center.as_deref(),
            *r0,
            *levels,
            *verdict_tol,
        ),
        Cmd::WeakResidual {
            common,
            source,
            inequality,
            residual_tol,
        } => cmd_weak_residual(common, source, *inequality, *residual_tol),
        Cmd::TraceScan {
            common,
            source,
            ladder,
        } => cmd_trace_scan(common, source, ladder.as_deref()),
        Cmd::HuberCheck {
            common,
            source,
            excess_tol,
        } => cmd_huber_check(common, source, *excess_tol),
        Cmd::EstimatesAudit { common, samples } => cmd_estimates_audit(common, *samples),
        Cmd::CorpusRun { common, entry } => cmd_corpus_run(common, entry.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Quadrature(_) => 3,
                _ => 2,
            }
        }
    };
    std::process::exit(code);
}
