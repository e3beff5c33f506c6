use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trimlaw::dynamics::IntervalMap;
use trimlaw::harness::{emit_results, rows_csv, run_experiment, summarize, ExperimentSpec, HarnessError};
use trimlaw::sequences::{condition_diagnostics, plan_csv};
use trimlaw::spectral::{build_ulam, perturbed_leading_eigenvalue, spectral_report, BinFunction, BuildMethod};

#[derive(Parser)]
#[command(name = "trimlaw", version, about = "Trimmed strong laws for heavy-tailed Birkhoff sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment, check invariants and write rows, summary and spec.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and print the rows CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the trimming plan of an experiment as CSV.
    TrimPlan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ulam matrix of a map and its spectral report.
    Ulam {
        #[arg(long, default_value = "doubling")]
        map: String,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Row-major matrix CSV.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Report JSON; stdout if absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Leading eigenvalue of the perturbed operator along a t grid.
    LambdaCurve {
        /// `coin` or a JSON array of bin values.
        #[arg(long, default_value = "coin")]
        phi: String,
        #[arg(long, default_value = "doubling")]
        map: String,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 21)]
        t_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Analytic,
    Mc,
}

enum Failure {
    Config(String),
    Invariant(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e.exit_code() {
            3 => Failure::Config(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violation: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Config(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(ExperimentSpec::from_json(&text)?)
}

fn threads(n: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config_err)?;
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn parse_map(name: &str) -> Result<IntervalMap, Failure> {
    let value = if name.trim_start().starts_with('{') {
        serde_json::from_str(name).map_err(config_err)?
    } else {
        serde_json::Value::String(name.to_string())
    };
    serde_json::from_value(value).map_err(config_err)
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Verify { config, threads: t, out } => {
            let spec = load(&config)?;
            threads(t)?;
            let result = run_experiment(&spec)?;
            let summary = summarize(&result, spec.late_window);
            let files = emit_results(&result, &summary, out.as_deref())?;
            println!("{}: {} rows in {}", spec.name, result.rows.len(), files.dir.display());
            for c in &summary.checkpoints {
                println!(
                    "  n = {:>10}  median ratio_trim = {:.6}  median ratio_trunc = {:.6}  B-exceed = {:.3}",
                    c.n, c.ratio_trim.median, c.ratio_trunc.median, c.exceed_frequency
                );
            }
            println!("  trend of |ratio_trim - {}|: {:?}", summary.ratio_target, summary.trim_trend);
            if summary.flagged_rows > 0 {
                println!("  {} rows flagged", summary.flagged_rows);
            }
            if let Some(first) = result.violations.first() {
                return Err(Failure::Invariant(format!("{} rows, first: {first}", result.violations.len())));
            }
            Ok(())
        }
        Command::Simulate { config, threads: t, out } => {
            let spec = load(&config)?;
            threads(t)?;
            let result = run_experiment(&spec)?;
            write_or_print(out.as_deref(), &rows_csv(&result))?;
            if let Some(first) = result.violations.first() {
                return Err(Failure::Invariant(first.clone()));
            }
            Ok(())
        }
        Command::TrimPlan { config, out } => {
            let spec = load(&config)?;
            let plan = spec.plan()?;
            let law = spec.law()?;
            let report = condition_diagnostics(&plan, law.as_tail_model(), &plan.psi);
            write_or_print(out.as_deref(), &plan_csv(&plan, &report))
        }
        Command::Ulam { map, bins, method, samples, seed, matrix, report } => {
            let map = parse_map(&map)?;
            let method = match method {
                Method::Analytic => BuildMethod::AnalyticBranches,
                Method::Mc => BuildMethod::MonteCarlo { samples, seed },
            };
            let op = build_ulam(&map, bins, method).map_err(config_err)?;
            if let Some(p) = matrix {
                write_or_print(Some(&p), &op.to_csv())?;
            }
            let rep = spectral_report(&op).map_err(|e| Failure::Invariant(e.to_string()))?;
            let json = serde_json::to_string_pretty(&rep).expect("report serializes") + "\n";
            write_or_print(report.as_deref(), &json)
        }
        Command::LambdaCurve { phi, map, bins, t_min, t_max, t_steps, out } => {
            let map = parse_map(&map)?;
            let phi = if phi == "coin" {
                BinFunction::coin(bins).map_err(config_err)?
            } else {
                BinFunction::new(serde_json::from_str(&phi).map_err(config_err)?).map_err(config_err)?
            };
            if t_steps < 2 || t_max.partial_cmp(&t_min) != Some(std::cmp::Ordering::Greater) {
                return Err(Failure::Config("need t-steps >= 2 and t-max > t-min".into()));
            }
            let grid: Vec<f64> =
                (0..t_steps).map(|i| t_min + (t_max - t_min) * i as f64 / (t_steps - 1) as f64).collect();
            let op = build_ulam(&map, phi.bins(), BuildMethod::AnalyticBranches).map_err(config_err)?;
            let curve = perturbed_leading_eigenvalue(&op, &phi, &grid).map_err(config_err)?;
            let mut csv = String::from("t,lambda_t\n");
            for p in curve {
                csv.push_str(&format!("{},{}\n", p.t, p.lambda));
            }
            write_or_print(out.as_deref(), &csv)
        }
    }
}
