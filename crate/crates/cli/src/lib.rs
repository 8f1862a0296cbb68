//! The `ks` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computation fails, 2 for usage errors
//! and 3 when a `verify` suite reports a failing row.

pub mod config;
pub mod expr;
pub mod output;
pub mod verify;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ks_core::fourier::fourier_tame;
use ks_core::gauge::hk_integrate;
use ks_core::infinite::integrate_tame;
use ks_core::kp::{k2_inner, kp_norm};
use ks_core::{
    Exponent, FrequencyPoint, HkOptions, Interval, KpConfig, KpIntegrand, NdOptions, TailFamily,
    TailMeasureConfig, TameFunction,
};

use config::{Format, RunConfig, Tail};
use expr::{parse_expression, Expr, ParseError};
use output::{write_table, Row};
use verify::Suite;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{error}\n  {text}\n  {caret}", caret = format!("{}^", " ".repeat(.error.position)))]
    Parse { error: ParseError, text: String },
    #[error("{0}")]
    Compute(#[from] ks_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ks",
    version,
    about = "Gauge integrals, box measures and Kuelbs-Steadman norms"
)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write 0 in the wall_ms column so output is byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gauge integral over an interval, or tame integral over a box.
    Integrate(IntegrateArgs),
    /// Truncated K^p norm over a window.
    Norm(NormArgs),
    /// Truncated K^2 inner product of two integrands.
    Inner(InnerArgs),
    /// Fourier transform of a tame function at one frequency.
    Fourier(FourierArgs),
    /// Run seeded invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    /// Integrand in x1..x9; `-` reads it from stdin.
    #[arg(long)]
    expr: String,
    /// One-dimensional interval `a,b`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "boxes")]
    interval: Option<String>,
    /// Axis `a,b` of the core's box; repeat once per coordinate.
    #[arg(long = "box", allow_hyphen_values = true)]
    boxes: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    singular: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    breakpoints: Vec<f64>,
    #[arg(long, value_enum)]
    tail: Option<Tail>,
    /// Skip the tail-measure factor in tame integrals.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Window axis `a,b`; repeat once per coordinate. Defaults to `0,1`.
    #[arg(long, allow_hyphen_values = true)]
    window: Vec<String>,
    /// Truncation K.
    #[arg(short = 'K', long = "truncation")]
    truncation: Option<usize>,
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Bound on the integral of |f| over the window, used for the tail.
    #[arg(long)]
    abs_bound: Option<f64>,
    /// The integrand is only conditionally integrable (requires --abs-bound).
    #[arg(long)]
    conditional: bool,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    singular: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    breakpoints: Vec<f64>,
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Exponent in [1, inf].
    #[arg(short = 'p', long = "exponent")]
    p: Exponent,
    #[arg(long)]
    expr: String,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Debug, Args)]
struct InnerArgs {
    #[arg(long)]
    expr: String,
    /// Second integrand.
    #[arg(long = "with")]
    other: String,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Debug, Args)]
struct FourierArgs {
    #[arg(long)]
    expr: String,
    /// Axis `a,b` of the core's box; repeat once per coordinate.
    #[arg(long = "box", allow_hyphen_values = true, required = true)]
    boxes: Vec<String>,
    /// Frequency coordinates `y1,y2,...`; later coordinates are zero.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    at: Vec<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run a single suite; all suites run by default.
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_interval(s: &str) -> Result<Interval, CliError> {
    let bad = || CliError::Usage(format!("expected an interval `a,b`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Interval::new(a, b).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_box(axes: &[String]) -> Result<Vec<Interval>, CliError> {
    axes.iter().map(|s| parse_interval(s)).collect()
}

fn read_expr(text: &str, stdin: &mut dyn Read) -> Result<Expr, CliError> {
    let text = if text == "-" {
        let mut buf = String::new();
        stdin.read_to_string(&mut buf)?;
        buf.trim().to_string()
    } else {
        text.to_string()
    };
    parse_expression(&text).map_err(|error| CliError::Parse { error, text })
}

fn check_dimension(e: &Expr, dim: usize) -> Result<(), CliError> {
    if e.dimension() > dim {
        return Err(CliError::Usage(format!(
            "expression uses x{} but only {dim} coordinate(s) are declared",
            e.dimension()
        )));
    }
    Ok(())
}

fn or_config<T: Clone>(flag: Vec<T>, file: &Option<Vec<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.clone().unwrap_or_default()
    } else {
        flag
    }
}

struct Ctx {
    cfg: RunConfig,
    timing: bool,
}

impl Ctx {
    fn stamp(&self, mut rows: Vec<Row>, start: Instant) -> Vec<Row> {
        let ms = if self.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        for r in &mut rows {
            r.wall_ms = ms;
        }
        rows
    }

    fn window(&self, flags: &[String]) -> Result<Vec<Interval>, CliError> {
        let mut w = if !flags.is_empty() {
            parse_box(flags)?
        } else if let Some(w) = &self.cfg.window {
            w.iter()
                .map(|[a, b]| Interval::new(*a, *b).map_err(|e| CliError::Usage(e.to_string())))
                .collect::<Result<_, _>>()?
        } else {
            vec![Interval::unit()]
        };
        if let Some(d) = self.cfg.dimension {
            if w.len() == 1 && d > 1 {
                w = vec![w[0]; d];
            } else if w.len() != d {
                return Err(CliError::Usage(format!(
                    "window has {} axes but dimension is {d}",
                    w.len()
                )));
            }
        }
        Ok(w)
    }

    fn kp_config(&self, fam: &FamilyArgs) -> Result<KpConfig, CliError> {
        let weights = self
            .cfg
            .weights
            .clone()
            .map(|w| w.sequence())
            .transpose()?
            .unwrap_or_default();
        let mut k = KpConfig::new(self.window(&fam.window)?)?.with_weights(weights);
        if let Some(t) = fam.truncation.or(self.cfg.truncation) {
            k = k.with_truncation(t);
        }
        if let Some(q) = fam.quad_tol.or(self.cfg.quad_tol) {
            k = k.with_quad_tol(q);
        }
        Ok(k)
    }

    fn integrand(&self, e: Expr, fam: &FamilyArgs) -> KpIntegrand {
        let e = Arc::new(e);
        let mut f = KpIntegrand::new(move |x| e.eval(x))
            .with_singular_points(or_config(fam.singular.clone(), &self.cfg.singular_points))
            .with_breakpoints(or_config(fam.breakpoints.clone(), &self.cfg.breakpoints));
        if let Some(b) = fam.abs_bound.or(self.cfg.abs_bound) {
            f = f.with_abs_bound(b);
        }
        if fam.conditional {
            f = f.conditionally_integrable();
        }
        f
    }
}

enum Plan {
    Integrate(IntegrateArgs, Expr),
    Norm(NormArgs, Expr),
    Inner(InnerArgs, Expr, Expr),
    Fourier(FourierArgs, Expr),
    Verify(VerifyArgs),
}

struct Outcome {
    rows: Vec<Row>,
    verify_failures: usize,
}

impl Outcome {
    fn status(&self) -> i32 {
        if self.verify_failures > 0 {
            3
        } else {
            0
        }
    }
}

fn execute(plan: Plan, ctx: &Ctx) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let rows = match plan {
        Plan::Integrate(a, e) => {
            let tol = a.tol.or(ctx.cfg.tol).unwrap_or(HkOptions::default().tol);
            if let Some(s) = &a.interval {
                check_dimension(&e, 1)?;
                let opts = HkOptions::with_tol(tol)
                    .singular(or_config(a.singular.clone(), &ctx.cfg.singular_points))
                    .breakpoints(or_config(a.breakpoints.clone(), &ctx.cfg.breakpoints));
                let r = hk_integrate(|x| e.eval(&[x]), parse_interval(s)?, &opts)?;
                vec![Row::new("integral", r.value)
                    .error(r.error_estimate)
                    .evals(r.evaluations)]
            } else if !a.boxes.is_empty() {
                let domain = parse_box(&a.boxes)?;
                check_dimension(&e, domain.len())?;
                let family: TailFamily = a.tail.or(ctx.cfg.tail).unwrap_or(Tail::Canonical).into();
                let e = Arc::new(e);
                let f = TameFunction::new(move |x| e.eval(x), domain, family)?;
                let tcfg = TailMeasureConfig {
                    family,
                    normalize: !a.no_normalize && ctx.cfg.normalize.unwrap_or(true),
                    quad: NdOptions::with_tol(tol),
                };
                let r = integrate_tame(&f, &tcfg)?;
                vec![Row::new("tame_integral", r.value)
                    .error(r.error_estimate)
                    .evals(r.evaluations)]
            } else {
                return Err(CliError::Usage(
                    "integrate needs --interval or --box".into(),
                ));
            }
        }
        Plan::Norm(a, e) => {
            let k = ctx.kp_config(&a.family)?;
            check_dimension(&e, k.family.dim())?;
            let r = kp_norm(&ctx.integrand(e, &a.family), a.p, &k)?;
            vec![Row::new("kp_norm", r.value)
                .error(r.error_bound)
                .tail(r.tail_bound)
                .evals(r.evaluations)]
        }
        Plan::Inner(a, e, g) => {
            let k = ctx.kp_config(&a.family)?;
            check_dimension(&e, k.family.dim())?;
            check_dimension(&g, k.family.dim())?;
            let r = k2_inner(
                &ctx.integrand(e, &a.family),
                &ctx.integrand(g, &a.family),
                &k,
            )?;
            vec![Row::new("k2_inner", r.value)
                .error(r.error_bound)
                .tail(r.tail_bound)
                .evals(r.evaluations)]
        }
        Plan::Fourier(a, e) => {
            let domain = parse_box(&a.boxes)?;
            check_dimension(&e, domain.len())?;
            let e = Arc::new(e);
            let f = TameFunction::new(move |x| e.eval(x), domain, TailFamily::CanonicalJ)?;
            let opts =
                NdOptions::with_tol(a.tol.or(ctx.cfg.tol).unwrap_or(NdOptions::default().tol));
            let v = fourier_tame(&f, &FrequencyPoint::new(a.at.clone()), &opts)?;
            let n = v.evaluations;
            vec![
                Row::new("fourier_re", v.value.re)
                    .error(v.error_bound)
                    .evals(n),
                Row::new("fourier_im", v.value.im)
                    .error(v.error_bound)
                    .evals(n),
                Row::new("sinc_tail", v.tail_factor),
            ]
        }
        Plan::Verify(a) => {
            let suites: Vec<Suite> = a.suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut rows = Vec::new();
            let mut failed = 0;
            for s in suites {
                let r = verify::run_suite(s, a.seed, ctx.timing)?;
                failed += r.failed;
                rows.extend(r.rows);
            }
            return Ok(Outcome {
                rows,
                verify_failures: failed,
            });
        }
    };
    Ok(Outcome {
        rows: ctx.stamp(rows, start),
        verify_failures: 0,
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("KS_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!("KS_THREADS must be a positive integer, got `{v}`"))
        })?;
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

fn run_inner(
    argv: &[String],
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(stdout, "{e}")?;
                return Ok(0);
            }
            return Err(CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ));
        }
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let format = cli.format.or(cfg.format).unwrap_or_default();
    let plan = match cli.command {
        Command::Integrate(a) => {
            let e = read_expr(&a.expr, stdin)?;
            Plan::Integrate(a, e)
        }
        Command::Norm(a) => {
            let e = read_expr(&a.expr, stdin)?;
            Plan::Norm(a, e)
        }
        Command::Inner(a) => {
            if a.expr == "-" && a.other == "-" {
                return Err(CliError::Usage(
                    "only one expression can come from stdin".into(),
                ));
            }
            let e = read_expr(&a.expr, stdin)?;
            let g = read_expr(&a.other, stdin)?;
            Plan::Inner(a, e, g)
        }
        Command::Fourier(a) => {
            let e = read_expr(&a.expr, stdin)?;
            Plan::Fourier(a, e)
        }
        Command::Verify(a) => Plan::Verify(a),
    };
    let ctx = Ctx {
        cfg,
        timing: !cli.no_timing,
    };
    let pool = thread_pool()?;
    let out = pool.install(|| execute(plan, &ctx))?;
    write_table(stdout, &out.rows, format)?;
    Ok(out.status())
}

/// Runs `ks` with `argv` (including the program name) and returns the exit
/// status. Diagnostics go to `stderr`.
pub fn run(
    argv: &[String],
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    match run_inner(argv, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "ks: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_statuses() {
        let ok = Outcome {
            rows: Vec::new(),
            verify_failures: 0,
        };
        let bad = Outcome {
            rows: Vec::new(),
            verify_failures: 2,
        };
        assert_eq!(ok.status(), 0);
        assert_eq!(bad.status(), 3);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Compute(ks_core::Error::NotCauchy {
                terms: 3,
                pattern: String::new(),
                partials: Vec::new()
            })
            .exit_code(),
            1
        );
    }
}
