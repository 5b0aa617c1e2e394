use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tdho_cli::config::{defaults, RunConfig, KEYS};
use tdho_cli::registry::{list_experiments, output_help, Experiment};
use tdho_cli::run::{run, run_matrix, RunSummary};
use tdho_cli::CliError;

#[derive(Parser)]
#[command(name = "tdho", version, about = "Wave-operator experiments for a time-decaying harmonic oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Cauchy,
    Noncauchy,
}

#[derive(Subcommand)]
enum Command {
    /// List the experiments with their anchors, sorted by name.
    List,
    /// Print every configuration key with its default for one experiment.
    Keys {
        #[arg(long, default_value = "cauchy_scan")]
        experiment: String,
    },
    /// Run one experiment, or several in parallel when --config is repeated.
    #[command(after_help = format!("CSV outputs (every file starts with a schema_version column):\n{}", output_help()))]
    Run {
        /// Configuration file of `block.key = value` lines.
        #[arg(long)]
        config: Vec<PathBuf>,
        /// Override a key, e.g. --set potential.rho=1.5
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; overrides output.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for several configurations.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Projected runtime cap for scans.
        #[arg(long)]
        budget_seconds: Option<f64>,
        /// Exit with status 2 unless the scan verdict matches.
        #[arg(long, value_enum)]
        assert_verdict: Option<Expect>,
    },
}

fn load(path: Option<&PathBuf>, overrides: &[String], budget: Option<f64>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut all = overrides.to_vec();
    if let Some(b) = budget {
        all.push(format!("schedule.budget_seconds={b}"));
    }
    RunConfig::parse(&text, &all)
}

fn check(summary: &RunSummary, expect: Option<Expect>) -> Result<bool, CliError> {
    let Some(expect) = expect else { return Ok(true) };
    if !matches!(summary.experiment.as_str(), "cauchy_scan" | "dollard_scan") {
        return Err(CliError::Config("--assert-verdict applies to cauchy_scan and dollard_scan only".into()));
    }
    let want = match expect {
        Expect::Cauchy => "cauchy",
        Expect::Noncauchy => "noncauchy",
    };
    Ok(summary.verdict == want)
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::List => {
            print!("{}", list_experiments());
            Ok(ExitCode::SUCCESS)
        }
        Command::Keys { experiment } => {
            let d = defaults(experiment.parse::<Experiment>()?);
            for (k, doc) in KEYS {
                println!("{k} = {}    # {doc}", d[*k]);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, overrides, out, jobs, budget_seconds, assert_verdict } => {
            if config.len() <= 1 {
                let cfg = load(config.first(), &overrides, budget_seconds)?;
                let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_directory));
                let summary = run(&cfg, &dir)?;
                println!("{}", summary.line());
                return Ok(if check(&summary, assert_verdict)? { ExitCode::SUCCESS } else { ExitCode::from(2) });
            }
            let mut runs = Vec::new();
            for path in &config {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                if runs.iter().any(|(n, _): &(String, RunConfig)| *n == name) {
                    return Err(CliError::Config(format!("two configurations share the name `{name}`")));
                }
                runs.push((name, load(Some(path), &overrides, budget_seconds)?));
            }
            let dir = out.unwrap_or_else(|| PathBuf::from(&runs[0].1.output_directory));
            let mut code = ExitCode::SUCCESS;
            let mut failed = false;
            for (name, r) in run_matrix(&runs, &dir, jobs)? {
                match r {
                    Ok(s) => {
                        println!("{name}: {}", s.line());
                        if !check(&s, assert_verdict)? {
                            code = ExitCode::from(2);
                        }
                    }
                    Err(e) => {
                        eprintln!("{name}: error: {e}");
                        failed = true;
                    }
                }
            }
            Ok(if failed { ExitCode::from(1) } else { code })
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
