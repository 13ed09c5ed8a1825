//! Command-line front end of the DGDLS solver.

pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dgdls::diagnostics::{run, run_convergence_study};
use dgdls::error::{Error, Result};
use dgdls::nodes::{
    equidistant_nodes, gauss_legendre_nodes, gauss_lobatto_nodes, scattered_nodes, NodeKind,
};
use dgdls::quadrature::{build_ls_quadrature, kappa, newton_cotes_weights};
use dgdls::report::{csv_line, fmt_f64};

use config::{RawConfig, RunConfig, SEED_ENV};
use output::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dgdls", version, about = "DG discrete-least-squares solver and experiment harness")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a least-squares quadrature rule as `xi,weight` CSV.
    Quadrature(QuadratureArgs),
    /// Stability value kappa against the number of points.
    KappaFigure(KappaArgs),
    /// Run one configuration and write its `t,mass,energy` trace.
    Solve(RunArgs),
    /// Run a convergence table.
    Study(RunArgs),
    /// Write the element operator matrices P, S, b-, b+.
    DumpOperator(RunArgs),
}

#[derive(Debug, Args)]
struct QuadratureArgs {
    #[arg(long, default_value = "equidistant")]
    nodes: String,
    /// Polynomial degree N of the node set (N + 1 points).
    #[arg(long)]
    n: usize,
    /// Exactness degree; defaults to N.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KappaArgs {
    /// `newton-cotes` on [0, 1], or `ls` for least-squares rules of fixed
    /// exactness `--degree` on equidistant points of [0, 1].
    #[arg(long, default_value = "newton-cotes")]
    rule: String,
    #[arg(long, default_value_t = 2)]
    min_n: usize,
    #[arg(long, default_value_t = 21)]
    max_n: usize,
    #[arg(long, default_value_t = 4)]
    degree: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// `key=value` file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long = "I")]
    i: Option<String>,
    /// Number `N` (N + 1 points), or a multiple of K such as `2K`.
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// Least-squares rule policy: strict, exact or nonnegative.
    #[arg(long)]
    policy: Option<String>,
    /// Classical DGSEM on K + 1 Gauss-Lobatto nodes.
    #[arg(long)]
    dgsem: bool,
    #[arg(long)]
    entropy_correction: bool,
    /// Evaluate the propagation speed once at t = 0.
    #[arg(long)]
    freeze_lambda: bool,
    #[arg(long)]
    observer_stride: Option<String>,
    /// Study degrees, e.g. `1,2,3,4`.
    #[arg(long)]
    degrees: Option<String>,
    /// Study element counts, e.g. `5,10,20,40`.
    #[arg(long)]
    elements: Option<String>,
    /// Study columns, e.g. `dgsem,K,2K,4K`.
    #[arg(long)]
    columns: Option<String>,
    /// Trace CSV path for `solve`; stdout if absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, threads: Option<usize>) -> Result<RunConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let values = [
            ("problem", &self.problem),
            ("K", &self.k),
            ("I", &self.i),
            ("N", &self.n),
            ("nodes", &self.nodes),
            ("seed", &self.seed),
            ("flux", &self.flux),
            ("cfl", &self.cfl),
            ("t_end", &self.t_end),
            ("policy", &self.policy),
            ("observer_stride", &self.observer_stride),
            ("degrees", &self.degrees),
            ("elements", &self.elements),
            ("columns", &self.columns),
        ];
        for (key, value) in values {
            if let Some(v) = value {
                raw.set_flag(key, v.as_str())?;
            }
        }
        let switches = [
            ("dgsem", self.dgsem),
            ("entropy_correction", self.entropy_correction),
            ("freeze_lambda", self.freeze_lambda),
        ];
        for (key, on) in switches {
            if on {
                raw.set_flag(key, "true")?;
            }
        }
        let paths = [("trace", &self.trace), ("output", &self.output)];
        for (key, path) in paths {
            if let Some(p) = path {
                raw.set_flag(key, p.to_string_lossy())?;
            }
        }
        if let Some(t) = threads {
            raw.set_flag("threads", t.to_string())?;
        }
        raw.resolve(std::env::var(SEED_ENV).ok().as_deref())
    }
}

/// Where a command's text goes: a file written atomically, or stdout.
fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn node_set(kind: NodeKind, n_points: usize, seed: u64) -> Result<dgdls::nodes::NodeSet> {
    match kind {
        NodeKind::Equidistant => equidistant_nodes(n_points),
        NodeKind::Scattered => scattered_nodes(n_points, seed),
        NodeKind::GaussLobatto => gauss_lobatto_nodes(n_points),
        NodeKind::GaussLegendre => gauss_legendre_nodes(n_points),
    }
}

fn quadrature(args: &QuadratureArgs, out: &mut dyn Write) -> Result<()> {
    let kind: NodeKind = args.nodes.parse()?;
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| Error::Configuration(format!("bad {SEED_ENV} value '{v}': {e}")))?,
            Err(_) => 1,
        },
    };
    let nodes = node_set(kind, args.n + 1, seed)?;
    let rule = build_ls_quadrature(&nodes, args.degree.unwrap_or(args.n))?;
    emit(args.output.as_deref(), &rule.to_csv(), out)?;
    writeln!(out, "{}", rule.summary())?;
    Ok(())
}

fn kappa_figure(args: &KappaArgs, out: &mut dyn Write) -> Result<()> {
    if args.min_n < 2 || args.max_n < args.min_n {
        return Err(Error::Configuration(format!(
            "need 2 <= min-n <= max-n, got {}..{}",
            args.min_n, args.max_n
        )));
    }
    let mut text = String::from("n_points,kappa\n");
    for n_points in args.min_n..=args.max_n {
        let k = match args.rule.as_str() {
            "newton-cotes" | "nc" => kappa(&newton_cotes_weights(n_points, 1.0)?),
            // Rules on [-1, 1] scaled to [0, 1].
            "ls" if n_points > args.degree => {
                0.5 * build_ls_quadrature(&equidistant_nodes(n_points)?, args.degree)?.kappa()
            }
            "ls" => continue,
            other => {
                return Err(Error::Configuration(format!(
                    "unknown rule '{other}'; expected newton-cotes or ls"
                )))
            }
        };
        text.push_str(&csv_line([n_points.to_string(), fmt_f64(k)]));
        text.push('\n');
    }
    emit(args.output.as_deref(), &text, out)
}

fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let record = run(&cfg.setup(), &cfg.run_options())?;
    emit(cfg.trace.as_deref(), &record.trace_csv(), out)?;
    let errors: Vec<String> = record.errors.iter().map(|e| fmt_f64(*e)).collect();
    writeln!(
        out,
        "# final t={} steps={} l2_error={} mass_drift={} max_energy_increase={}",
        fmt_f64(*record.times.last().unwrap_or(&0.0)),
        record.steps,
        errors.join(";"),
        fmt_f64(record.relative_mass_drift()),
        fmt_f64(record.max_energy_increase()),
    )?;
    Ok(())
}

fn study(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let table = run_convergence_study(&cfg.study_spec())?;
    emit(cfg.output.as_deref(), &table.to_csv(&cfg.to_pairs()), out)
}

fn dump_operator(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let op = cfg.setup().operator()?;
    emit(cfg.output.as_deref(), &op.to_csv(), out)
}

/// Caps the global worker pool. The pool can be sized once per process;
/// later calls keep the first size.
fn limit_threads(threads: Option<usize>) -> Result<()> {
    match threads {
        Some(0) => Err(Error::Configuration("threads must be >= 1".into())),
        Some(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
        None => Ok(()),
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let configured = |args: &RunArgs| -> Result<RunConfig> {
        let cfg = args.resolve(cli.threads)?;
        limit_threads(cfg.threads)?;
        Ok(cfg)
    };
    match &cli.command {
        Command::Quadrature(args) => {
            limit_threads(cli.threads)?;
            quadrature(args, out)
        }
        Command::KappaFigure(args) => {
            limit_threads(cli.threads)?;
            kappa_figure(args, out)
        }
        Command::Solve(args) => solve(&configured(args)?, out),
        Command::Study(args) => study(&configured(args)?, out),
        Command::DumpOperator(args) => dump_operator(&configured(args)?, out),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_divergence() {
        EXIT_DIVERGENCE
    } else {
        EXIT_CONFIG
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_divergence() {
                let _ = writeln!(err, "the run produced non-finite values; try a larger N or a smaller --cfl");
            }
            exit_code(&e)
        }
    }
}
