use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perfect_partitions::counting::{count_brute, count_dp};
use perfect_partitions::harness::{
    emit, monotonicity_probe, run_sweep, wilson_interval, OutputFormat, SweepConfig, SweepMode,
};
use perfect_partitions::lines::{
    enumerate_even_tuples, enumerate_star_tuples, line_aggregates, star_aggregates, write_line_csv,
    write_star_csv,
};
use perfect_partitions::moments::{
    eta, eta_bracket, expected_asymptotic, expected_bruteforce, expected_exact, f_nu,
    rational_to_f64, second_moment_bruteforce, thresholds, MomentReport, ETA_TOL,
};
use perfect_partitions::torus::{
    expected_via_quadrature, expected_via_quadrature_with_grid, second_moment_via_quadrature,
    second_moment_via_quadrature_with_grid,
};
use perfect_partitions::{Error, Instance};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "pplab",
    version,
    about = "Perfect multiway partitions of random integers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shape {
    #[arg(long)]
    nu: usize,
    #[arg(long)]
    n: usize,
    /// Values are uniform on 1..=M.
    #[arg(long = "m")]
    m: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exists,
    Count,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Count perfect ordered partitions of one instance.
    Count {
        #[arg(long)]
        nu: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
        #[arg(long, value_enum, default_value = "dp")]
        method: Method,
    },
    /// First moment of the count; with no flag, exact and asymptotic.
    Expect {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        asymptotic: bool,
        #[arg(long)]
        quadrature: bool,
    },
    /// Second moment of the count; brute force unless --quadrature.
    Moment2 {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        quadrature: bool,
    },
    /// Root eta(nu) of e^((nu-1) eta) / (nu e eta) = 1.
    Eta {
        #[arg(long)]
        nu: usize,
        #[arg(long, default_value_t = ETA_TOL)]
        tol: f64,
    },
    /// Regime thresholds in kappa = n / ln M.
    Thresholds {
        #[arg(long)]
        nu: usize,
    },
    /// Lattice-line aggregates; --out writes the tuple table.
    Lines {
        #[arg(long)]
        nu: usize,
        #[arg(long)]
        star: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trapezoidal torus quadrature of the first (or second) moment.
    Integral {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        second: bool,
        #[arg(long)]
        grid: Option<u64>,
    },
    /// Monte Carlo sweep over (n, kappa) cells.
    Sweep {
        #[arg(long)]
        nu: usize,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long = "kappa", value_delimiter = ',', required = true)]
        kappa_list: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exists")]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Report statistics over all trials instead of divisible ones.
        #[arg(long)]
        no_condition: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::InvalidInput(_) => 2,
        Error::BudgetExceeded { .. } | Error::MemoryBudgetExceeded { .. } => 3,
        Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => 4,
        Error::InternalMismatch(_) => 1,
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|source| Error::Json {
        path: "<stdout>".into(),
        source,
    })?;
    writeln!(out).map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Count { nu, values, method } => {
            let inst = Instance::from_values(values)?;
            let report = match method {
                Method::Brute => count_brute(&inst, nu)?,
                Method::Dp => count_dp(&inst, nu)?,
            };
            print_json(&report)
        }
        Command::Expect {
            shape: Shape { nu, n, m },
            exact,
            brute,
            asymptotic,
            quadrature,
        } => {
            let default = !(exact || brute || asymptotic || quadrature);
            let mut report = MomentReport::new(n, m, nu);
            if exact || default {
                report.E_exact = Some(expected_exact(n, m, nu)?);
            }
            if asymptotic || default {
                let a = expected_asymptotic(n, m, nu)?;
                report.log_E_asymptotic = Some(a.ln_value);
                report.asymptotic_outside_theorem_range = Some(a.outside_theorem_range);
            }
            if brute {
                let e = expected_bruteforce(n, m, nu)?;
                report.E_brute_value = Some(rational_to_f64(&e));
                report.E_brute = Some(e.to_string());
            }
            if quadrature {
                report.E_quadrature = Some(expected_via_quadrature(n, m, nu)?.value);
            }
            report.fill_ratio();
            print_json(&report)
        }
        Command::Moment2 {
            shape: Shape { nu, n, m },
            brute,
            quadrature,
        } => {
            let mut report = MomentReport::new(n, m, nu);
            if brute || !quadrature {
                let e2 = second_moment_bruteforce(n, m, nu)?;
                report.E2_brute_value = Some(rational_to_f64(&e2));
                report.E2_brute = Some(e2.to_string());
            }
            if quadrature {
                report.E2_quadrature = Some(second_moment_via_quadrature(n, m, nu)?.value);
            }
            print_json(&report)
        }
        Command::Eta { nu, tol } => {
            let root = eta(nu, tol)?;
            let (lo, hi) = eta_bracket(nu);
            print_json(&json!({
                "nu": nu,
                "eta": root,
                "f_nu": f_nu(root, nu),
                "bracket": [lo, hi],
                "kappa_mean_lo": 2.0 / root,
            }))
        }
        Command::Thresholds { nu } => print_json(&thresholds(nu)?),
        Command::Lines { nu, star, out } => {
            if star {
                let agg = star_aggregates(nu)?;
                if let Some(path) = &out {
                    let tuples = enumerate_star_tuples(nu)?;
                    write_star_csv(create(path)?, nu, &tuples).map_err(|source| Error::Csv {
                        path: path.clone(),
                        source,
                    })?;
                }
                print_json(&agg)
            } else {
                let agg = line_aggregates(nu)?;
                if let Some(path) = &out {
                    let tuples = enumerate_even_tuples(nu)?;
                    write_line_csv(create(path)?, nu, &tuples).map_err(|source| Error::Csv {
                        path: path.clone(),
                        source,
                    })?;
                }
                print_json(&agg)
            }
        }
        Command::Integral {
            shape: Shape { nu, n, m },
            second,
            grid,
        } => {
            let result = match (second, grid) {
                (false, None) => expected_via_quadrature(n, m, nu)?,
                (false, Some(p)) => expected_via_quadrature_with_grid(n, m, nu, p)?,
                (true, None) => second_moment_via_quadrature(n, m, nu)?,
                (true, Some(p)) => second_moment_via_quadrature_with_grid(n, m, nu, p)?,
            };
            print_json(&result)
        }
        Command::Sweep {
            nu,
            n_list,
            kappa_list,
            trials,
            seed,
            mode,
            out,
            format,
            no_condition,
        } => {
            let mut cfg = SweepConfig::new(nu, n_list, kappa_list);
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.mode = match mode {
                Mode::Exists => SweepMode::Exists,
                Mode::Count => SweepMode::Count,
            };
            cfg.condition_on_divisibility = !no_condition;
            let records = run_sweep(&cfg)?;
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            emit(&records, format, &out)?;

            let conditioned = cfg.condition_on_divisibility;
            for r in &records {
                let ci = r
                    .exists_count
                    .and_then(|k| wilson_interval(k, r.denominator(conditioned), 1.96));
                match (r.exists_fraction(conditioned), ci) {
                    (Some(p), Some((lo, hi))) => eprintln!(
                        "n={} kappa={} M={} exists={:.4} 95% CI [{:.4}, {:.4}] {}",
                        r.n, r.kappa, r.M, p, lo, hi, r.regime_label
                    ),
                    _ => eprintln!(
                        "n={} kappa={} M={} no estimate ({})",
                        r.n, r.kappa, r.M, r.budget_flag
                    ),
                }
            }
            for f in monotonicity_probe(&records, conditioned) {
                eprintln!(
                    "warning: exists fraction drops at n={} from kappa={} ({:.4}) to kappa={} ({:.4})",
                    f.n, f.kappa_lo, f.fraction_lo, f.kappa_hi, f.fraction_hi
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
