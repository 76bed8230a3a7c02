use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use extremal_walks::closedform::{
    bridge_positive_probability, one_dimensional_extremal_probability, stay_positive_probability, wendel_f64,
};
use extremal_walks::estimate::DEFAULT_CONFIDENCE;
use extremal_walks::experiments::output::{write_rows, Format, ResultRow};
use extremal_walks::experiments::threshold::{ThresholdBracket, DEFAULT_MAX_PROBES};
use extremal_walks::experiments::validate::{validate, ValidateConfig};
use extremal_walks::experiments::{
    estimate_discrete_probability, estimate_extremal_probability, find_alpha_half, find_n_half,
    intermediate_point_probability, offset_start_probability, RunOptions,
};
use extremal_walks::sphere::{estimate_covering_mean, CoveringConfig};
use extremal_walks::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_ARGUMENTS: u8 = 2;
const EXIT_BUDGET_EXHAUSTED: u8 = 3;

/// Monte Carlo experiments on the extremality of the origin for random walks.
#[derive(Parser)]
#[command(name = "extremal-walks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Two-sided confidence level of the intervals.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    /// Report wall_seconds as 0 so output is byte-reproducible.
    #[arg(long)]
    omit_timing: bool,
}

impl Common {
    fn opts(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            confidence: self.confidence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Probability that the origin is extremal for Brownian motion at Poisson times.
    EstimateP {
        #[arg(long)]
        n: usize,
        /// One or more intensities, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Bracket the intensity at which the extremal probability crosses 1/2.
    FindAlpha {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_PROBES)]
        max_probes: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Extremal probability for the simple random walk on Z^n.
    EstimateDiscrete {
        #[arg(long)]
        n: usize,
        /// One or more step counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Bracket the step count at which the lattice extremal probability crosses 1/2.
    FindN {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_PROBES)]
        max_probes: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Probability that S_j is extremal in conv{S_1, ..., S_N}.
    Intermediate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        j: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Probability that the origin is interior for Brownian motion started at distance L.
    OffsetStart {
        #[arg(long)]
        n: usize,
        /// Starting distance L.
        #[arg(long)]
        offset: f64,
        /// One or more horizons M, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        horizon: Vec<f64>,
        /// Poisson observation rate per unit time.
        #[arg(long, default_value_t = 10.0)]
        rate: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Mean hemisphere covering time of spherical Brownian motion.
    Covering {
        /// One or more dimensions (at least 3), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Censoring horizon (default 100 ln n).
        #[arg(long)]
        s_max: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact Wendel probabilities for n <= n_max, N <= steps.
    WendelTable {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One-dimensional closed forms at the given intensities.
    ClosedForms {
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        alpha: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run property and acceptance checks; exits 1 on failure.
    Validate {
        /// stochastic, hull, certificates, closedform, sphere, experiments, acceptance or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

struct Timer {
    start: Instant,
    omit: bool,
}

impl Timer {
    fn new(common: &Common) -> Self {
        Timer {
            start: Instant::now(),
            omit: common.omit_timing,
        }
    }

    /// Seconds since the last lap.
    fn lap(&mut self) -> f64 {
        let s = self.start.elapsed().as_secs_f64();
        self.start = Instant::now();
        if self.omit {
            0.0
        } else {
            s
        }
    }
}

fn output(common: &Common) -> Result<Box<dyn Write>, Error> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(rows: &[ResultRow], common: &Common) -> Result<(), Error> {
    let mut out = output(common)?;
    write_rows(rows, common.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn exact_row(experiment: &str, n: usize, param: &str, value: f64, p: f64) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        n,
        param_name: param.to_string(),
        param_value: value,
        trials: 0,
        successes: None,
        ambiguous: 0,
        estimate: p,
        ci_low: p,
        ci_high: p,
        seed: 0,
        wall_seconds: 0.0,
    }
}

fn bracket_rows(experiment: &str, n: usize, b: &ThresholdBracket, common: &Common, seconds: f64) -> Vec<ResultRow> {
    let seconds = seconds / b.probes.len().max(1) as f64;
    b.probes
        .iter()
        .map(|p| ResultRow::from_estimate(experiment, n, &b.parameter, p.value, &p.estimate, common.seed, seconds))
        .collect()
}

fn report_bracket(b: &ThresholdBracket) -> u8 {
    match (&b.low, &b.high) {
        (Some(l), Some(h)) => eprintln!(
            "{} bracket: [{}, {}] (ratio {:.3})",
            b.parameter,
            l.value,
            h.value,
            h.value / l.value
        ),
        _ => eprintln!("{} bracket incomplete", b.parameter),
    }
    if let Some(d) = &b.diagnostic {
        eprintln!("note: {d}");
    }
    if b.complete {
        0
    } else {
        EXIT_BUDGET_EXHAUSTED
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::EstimateP { n, alpha, common } => {
            let mut timer = Timer::new(&common);
            let mut rows = Vec::new();
            for a in alpha {
                let e = estimate_extremal_probability(n, a, common.trials, common.seed, &common.opts())?;
                rows.push(ResultRow::from_estimate(
                    "estimate-p",
                    n,
                    "alpha",
                    a,
                    &e,
                    common.seed,
                    timer.lap(),
                ));
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::FindAlpha { n, max_probes, common } => {
            let mut timer = Timer::new(&common);
            let b = find_alpha_half(n, common.trials, common.seed, max_probes, &common.opts())?;
            emit(&bracket_rows("find-alpha", n, &b, &common, timer.lap()), &common)?;
            Ok(report_bracket(&b))
        }
        Command::EstimateDiscrete { n, steps, common } => {
            let mut timer = Timer::new(&common);
            let mut rows = Vec::new();
            for s in steps {
                let e = estimate_discrete_probability(n, s, common.trials, common.seed, &common.opts())?;
                rows.push(ResultRow::from_estimate(
                    "estimate-discrete",
                    n,
                    "N",
                    s as f64,
                    &e,
                    common.seed,
                    timer.lap(),
                ));
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::FindN { n, max_probes, common } => {
            let mut timer = Timer::new(&common);
            let b = find_n_half(n, common.trials, common.seed, max_probes, &common.opts())?;
            emit(&bracket_rows("find-n", n, &b, &common, timer.lap()), &common)?;
            Ok(report_bracket(&b))
        }
        Command::Intermediate { n, steps, j, common } => {
            let mut timer = Timer::new(&common);
            let e = intermediate_point_probability(n, steps, j, common.trials, common.seed, &common.opts())?;
            let mut row = ResultRow::from_estimate("intermediate", n, "j", j as f64, &e, common.seed, timer.lap());
            row.experiment = format!("intermediate-N{steps}");
            emit(&[row], &common)?;
            Ok(0)
        }
        Command::OffsetStart {
            n,
            offset,
            horizon,
            rate,
            common,
        } => {
            let mut timer = Timer::new(&common);
            let mut rows = Vec::new();
            for m in horizon {
                let e = offset_start_probability(n, offset, m, rate, common.trials, common.seed, &common.opts())?;
                rows.push(ResultRow::from_estimate(
                    "offset-start",
                    n,
                    "M",
                    m,
                    &e,
                    common.seed,
                    timer.lap(),
                ));
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::Covering { n, s_max, common } => {
            let mut timer = Timer::new(&common);
            let mut rows = Vec::new();
            let config = CoveringConfig {
                s_max,
                ..CoveringConfig::default()
            };
            for dim in n {
                let e = estimate_covering_mean(
                    dim,
                    common.trials,
                    common.seed,
                    &config,
                    common.workers,
                    common.confidence,
                )?;
                eprintln!(
                    "n={dim}: {} censored at s_max = {:.3}, mean bracket width {:.4}, {} ambiguous checks",
                    e.censored, e.s_max, e.mean_bracket_width, e.ambiguous_checks
                );
                let mut row =
                    ResultRow::from_estimate("covering", dim, "s_max", e.s_max, &e.mean, common.seed, timer.lap());
                row.ambiguous = e.ambiguous_checks;
                rows.push(row);
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::WendelTable { n, steps, common } => {
            let mut rows = Vec::new();
            for dim in 1..=n {
                for big_n in 1..=steps {
                    rows.push(exact_row("wendel", dim, "N", big_n as f64, wendel_f64(dim, big_n)?));
                }
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::ClosedForms { alpha, common } => {
            let mut rows = Vec::new();
            for a in alpha {
                rows.push(exact_row("stay-positive", 1, "alpha", a, stay_positive_probability(a)?));
                rows.push(exact_row(
                    "extremal-1d",
                    1,
                    "alpha",
                    a,
                    one_dimensional_extremal_probability(a)?,
                ));
                rows.push(exact_row(
                    "bridge-positive",
                    1,
                    "alpha",
                    a,
                    bridge_positive_probability(a)?,
                ));
            }
            emit(&rows, &common)?;
            Ok(0)
        }
        Command::Validate { suite, common } => {
            let report = validate(&suite, &ValidateConfig::new(common.seed, common.opts()))?;
            let mut out = output(&common)?;
            match common.format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    for o in &report.outcomes {
                        writeln!(out, "{}", o.line())?;
                    }
                    let failed = report.failures().len();
                    writeln!(out, "{} checks, {failed} failed", report.outcomes.len())?;
                }
            }
            out.flush()?;
            Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::InvalidGrid(_) => ExitCode::from(EXIT_BAD_ARGUMENTS),
                _ => ExitCode::from(EXIT_CHECK_FAILED),
            }
        }
    }
}
