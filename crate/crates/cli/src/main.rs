//! `ampbench`: closed-form fidelities, simulations, norms, Monte-Carlo
//! estimates, parameter sweeps and verification suites from the command line.

mod output;
mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use ampbench::a_operator::{
    build_a, cross_norm_numeric_seeded, operator_norm_adaptive, operator_norm_numeric,
    partial_transpose, AOperatorSpec, DEFAULT_RESTARTS,
};
use ampbench::channels::{filter_fidelity_exact, simulated_average_fidelity, ChannelSpec};
use ampbench::closed_forms::{
    cft, f_prob, f_squeeze_opt, f_squeeze_r, filter_x, norm_a_closed, optimal_sigma_x,
};
use ampbench::fock::FockDim;
use ampbench::montecarlo::{mc_cft, mc_squeezer};
use ampbench::verify::{run_suite, Suite, VerifyOptions, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{emit, Format, Record, Shape};
use sweep::{run_sweep, Quantity, SweepConfig};

/// Exit status for a failed verification check.
const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for usage, domain and I/O errors.
const EXIT_ERROR: u8 = 2;
const THREADS_ENV: &str = "AMPBENCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ampbench", version, about = "Fidelity limits for coherent-state amplifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form fidelities at one (g, lambda) point.
    ClosedForm {
        #[arg(long)]
        g: f64,
        #[arg(long)]
        lambda: f64,
        /// Also report the fidelity of the squeezer with this parameter.
        #[arg(long)]
        r: Option<f64>,
        /// Thermal parameter for the closed-form operator norm, or filter ratio with --N.
        #[arg(long)]
        x: Option<f64>,
        /// Filter cutoff; reports the finite-N heralded fidelity.
        #[arg(long = "N")]
        n_cut: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Prior-averaged fidelity of a channel simulated in truncated Fock space.
    Simulate {
        #[arg(long, value_enum, default_value_t = SimChannel::Squeezer)]
        channel: SimChannel,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        lambda: f64,
        /// Squeezing parameter; defaults to the optimum.
        #[arg(long)]
        r: Option<f64>,
        /// Filter ratio; defaults to the optimal choice for (g, lambda).
        #[arg(long)]
        x: Option<f64>,
        #[arg(long = "N", default_value_t = 20)]
        n_cut: usize,
        #[arg(long, default_value_t = 60)]
        dim: usize,
        #[arg(long)]
        anc_dim: Option<usize>,
        /// Radial Gauss-Laguerre order of the prior average.
        #[arg(long, default_value_t = 32)]
        order: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Operator norm (and optionally injective cross norm) of the performance operator.
    Norms {
        #[arg(long)]
        g: f64,
        #[arg(long)]
        lambda: f64,
        /// Thermal parameter; defaults to the optimal one.
        #[arg(long)]
        x: Option<f64>,
        /// Fixed truncation per mode; adaptive when omitted.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Also run the alternating-ascent cross norm (a lower bound).
        #[arg(long)]
        cross: bool,
        /// Apply the cross norm to the input-mode partial transpose.
        #[arg(long)]
        partial_transpose: bool,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte-Carlo estimate of a prior-averaged fidelity.
    Mc {
        #[arg(long, value_enum, default_value_t = McQuantity::Cft)]
        quantity: McQuantity,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        lambda: f64,
        /// Squeezing parameter for the squeezer estimate; defaults to 0.
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate quantities on a (g, lambda) grid; one row per point and quantity.
    Sweep {
        /// Comma-separated gains.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        g: Vec<f64>,
        /// Comma-separated prior widths.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        lambda: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = Quantity::ALL)]
        quantities: Vec<Quantity>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification suite; exit status 1 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Override the tolerance of every deterministic check.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimChannel {
    Squeezer,
    Filter,
    MeasurePrepare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McQuantity {
    Cft,
    Squeezer,
}

#[derive(Debug)]
enum CliError {
    Domain(ampbench::Error),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<ampbench::Error> for CliError {
    fn from(e: ampbench::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("ampbench: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("ampbench: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Returns `Ok(false)` when a verification check failed.
fn run(command: Command) -> CliResult<bool> {
    match command {
        Command::ClosedForm {
            g,
            lambda,
            r,
            x,
            n_cut,
            output,
        } => {
            let rec = closed_form(g, lambda, r, x, n_cut)?;
            write(&[rec], &output, Format::Json, Shape::Single)?;
        }
        Command::Simulate {
            channel,
            g,
            lambda,
            r,
            x,
            n_cut,
            dim,
            anc_dim,
            order,
            output,
        } => {
            let rec = simulate(channel, g, lambda, r, x, n_cut, dim, anc_dim, order)?;
            write(&[rec], &output, Format::Json, Shape::Single)?;
        }
        Command::Norms {
            g,
            lambda,
            x,
            dim,
            tol,
            cross,
            partial_transpose,
            restarts,
            seed,
            output,
        } => {
            let rec = norms(g, lambda, x, dim, tol, cross, partial_transpose, restarts, seed)?;
            write(&[rec], &output, Format::Json, Shape::Single)?;
        }
        Command::Mc {
            quantity,
            g,
            lambda,
            r,
            samples,
            seed,
            output,
        } => {
            let (estimate, target) = match quantity {
                McQuantity::Cft => (mc_cft(g, lambda, samples, seed)?, cft(g, lambda)?),
                McQuantity::Squeezer => (
                    mc_squeezer(g, lambda, r, samples, seed)?,
                    f_squeeze_r(g, lambda, r)?,
                ),
            };
            let name = match quantity {
                McQuantity::Cft => "cft",
                McQuantity::Squeezer => "squeezer",
            };
            let rec = Record::new()
                .text("quantity", name)
                .num("g", g)
                .num("lambda", lambda)
                .num("r", r)
                .num("mean", estimate.mean)
                .num("stderr", estimate.stderr)
                .num("closed_form", target)
                .num("z_score", estimate.z_score(target))
                .int("samples", estimate.n_samples as u64)
                .int("seed", estimate.seed);
            write(&[rec], &output, Format::Json, Shape::Single)?;
        }
        Command::Sweep {
            g,
            lambda,
            quantities,
            output,
        } => {
            let config = SweepConfig::new(g, lambda, quantities).map_err(CliError::Usage)?;
            let rows = run_sweep(&config)?;
            write(&rows, &output, Format::Csv, Shape::Array)?;
        }
        Command::Verify {
            suite,
            tol,
            seed,
            output,
        } => {
            let reports = run_suite(suite, &VerifyOptions { tol, seed });
            let all_pass = reports.iter().all(|r| r.pass);
            let rows: Vec<Record> = reports
                .iter()
                .map(|r| {
                    Record::new()
                        .text("suite", r.suite.clone())
                        .text("check", r.check.clone())
                        .num("target", r.target)
                        .num("computed", r.computed)
                        .num("tolerance", r.tolerance)
                        .text("kind", format!("{:?}", r.kind).to_lowercase())
                        .flag("pass", r.pass)
                        .num("runtime_s", r.runtime_s)
                        .text("detail", r.detail.clone())
                        .int("seed", seed)
                })
                .collect();
            write(&rows, &output, Format::Csv, Shape::Array)?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            eprintln!("{} of {} checks passed", reports.len() - failed, reports.len());
            return Ok(all_pass);
        }
    }
    Ok(true)
}

fn write(records: &[Record], output: &OutputArgs, default: Format, shape: Shape) -> CliResult<()> {
    emit(records, output.format.unwrap_or(default), shape, output.out.as_deref())?;
    Ok(())
}

fn closed_form(g: f64, lambda: f64, r: Option<f64>, x: Option<f64>, n_cut: Option<usize>) -> CliResult<Record> {
    let det = f_squeeze_opt(g, lambda)?;
    let sigma = optimal_sigma_x(g, lambda)?;
    let mut rec = Record::new()
        .num("g", g)
        .num("lambda", lambda)
        .num("f_det", det.fidelity)
        .num("r_opt", det.r_opt)
        .num("f_prob", f_prob(g, lambda)?)
        .num("cft", cft(g, lambda)?)
        .num("norm_gap", f_prob(g, lambda)? - cft(g, lambda)?)
        .num("x_opt", sigma.x)
        .flag("x_opt_clamped", sigma.clamped);
    if let Some(r) = r {
        rec = rec.num("r", r).num("f_squeeze_r", f_squeeze_r(g, lambda, r)?);
    }
    match (x, n_cut) {
        (_, Some(n)) => {
            let x = match x {
                Some(x) => x,
                None => filter_x(g, lambda)?,
            };
            let f = filter_fidelity_exact(g, lambda, x, n)?;
            rec = rec
                .num("x", x)
                .int("N", n as u64)
                .num("filter_fidelity", f.conditional_fidelity)
                .num("filter_success_probability", f.success_probability);
        }
        (Some(x), None) => {
            rec = rec.num("x", x).num("norm_a", norm_a_closed(g, lambda, x)?);
        }
        (None, None) => {}
    }
    Ok(rec)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    channel: SimChannel,
    g: f64,
    lambda: f64,
    r: Option<f64>,
    x: Option<f64>,
    n_cut: usize,
    dim: usize,
    anc_dim: Option<usize>,
    order: usize,
) -> CliResult<Record> {
    let fock = FockDim::new(dim)?;
    let (spec, target, name, param) = match channel {
        SimChannel::Squeezer => {
            let r = match r {
                Some(r) => r,
                None => f_squeeze_opt(g, lambda)?.r_opt,
            };
            (ChannelSpec::Squeezer { r }, f_squeeze_r(g, lambda, r)?, "squeezer", ("r", r))
        }
        SimChannel::Filter => {
            let x = match x {
                Some(x) => x,
                None => filter_x(g, lambda)?,
            };
            let exact = filter_fidelity_exact(g, lambda, x, n_cut)?;
            (
                ChannelSpec::Filter { x, n_cut },
                exact.conditional_fidelity,
                "filter",
                ("x", x),
            )
        }
        SimChannel::MeasurePrepare => {
            let c = g / (1.0 + lambda);
            (
                ChannelSpec::MeasurePrepareHeterodyne { c },
                cft(g, lambda)?,
                "measure-prepare",
                ("c", c),
            )
        }
    };
    let simulated = simulated_average_fidelity(&spec, g, lambda, fock, order, anc_dim)?;
    let mut rec = Record::new()
        .text("channel", name)
        .num("g", g)
        .num("lambda", lambda)
        .num(param.0, param.1);
    if channel == SimChannel::Filter {
        rec = rec.int("N", n_cut as u64);
    }
    Ok(rec
        .num("simulated", simulated)
        .num("closed_form", target)
        .num("abs_error", (simulated - target).abs())
        .int("dim", dim as u64)
        .int("anc_dim", anc_dim.unwrap_or(dim) as u64)
        .int("order", order as u64))
}

#[allow(clippy::too_many_arguments)]
fn norms(
    g: f64,
    lambda: f64,
    x: Option<f64>,
    dim: Option<usize>,
    tol: f64,
    cross: bool,
    transpose: bool,
    restarts: usize,
    seed: u64,
) -> CliResult<Record> {
    let x = match x {
        Some(x) => x,
        None => optimal_sigma_x(g, lambda)?.x,
    };
    let (value, used_dim, warning) = match dim {
        Some(d) => {
            let spec = AOperatorSpec::new(g, lambda, x, d, d)?;
            (operator_norm_numeric(&spec, tol)?, d, false)
        }
        None => {
            let n = operator_norm_adaptive(g, lambda, x, tol)?;
            (n.value, n.dim, n.truncation_warning)
        }
    };
    let closed = norm_a_closed(g, lambda, x).ok();
    let mut rec = Record::new()
        .num("g", g)
        .num("lambda", lambda)
        .num("x", x)
        .num("operator_norm", value)
        .opt_num("norm_closed", closed)
        .int("dim", used_dim as u64)
        .flag("truncation_warning", warning);
    if cross {
        let spec = AOperatorSpec::new(g, lambda, x, used_dim, used_dim)?;
        let a = build_a(&spec);
        let a = if transpose { partial_transpose(&a) } else { a };
        let c = cross_norm_numeric_seeded(&a, restarts, 1e-10, seed)?;
        rec = rec
            .num("cross_norm_lower_bound", c.value)
            .flag("partial_transpose", transpose)
            .int("restarts", c.restarts_used as u64)
            .int("seed", seed);
    }
    Ok(rec)
}
