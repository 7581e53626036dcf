use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sirdro_cli::commands::{self, Method, Variant};
use sirdro_cli::experiments::{self, Options};
use sirdro_cli::CliError;

#[derive(Parser)]
#[command(name = "sirdro", version, about = "Simple integer recourse under Wasserstein and moment ambiguity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected recourse under the reference distribution at a first-stage point.
    Eval {
        file: PathBuf,
        /// Comma-separated first-stage point.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum, default_value = "exact")]
        variant: Variant,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the first-stage problem under the file's ambiguity set.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Write the solution CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the iteration log CSV here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a named sweep; CSV goes to stdout or --out, the verdict to stderr.
    Experiment {
        name: String,
        /// q⁻ for fig-convexity.
        #[arg(long, default_value_t = 0.0)]
        qminus: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a problem file.
    Check {
        file: PathBuf,
        /// Print the problem in canonical form.
        #[arg(long)]
        dump_canonical: bool,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SIR_DRO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SIR_DRO_THREADS=`{raw}` must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Eval { file, x, variant, out } => {
            let problem = commands::load(&file)?;
            let x = commands::parse_vector(&x)?;
            let rows = commands::eval(&problem, &x, variant)?;
            commands::emit(&commands::to_csv(&rows)?, out.as_deref())
        }
        Command::Solve { file, method, tol, out, log } => {
            let problem = commands::load(&file)?;
            let res = commands::solve(&problem, method, tol)?;
            if let Some(path) = log {
                commands::write_file(&path, &commands::to_csv(&res.log)?)?;
            }
            commands::emit(&commands::to_csv(&res.solution)?, out.as_deref())
        }
        Command::Experiment { name, qminus, out } => {
            let outcome = experiments::run(&name, Options { qminus })?;
            commands::emit(&commands::to_csv(&outcome.rows)?, out.as_deref())?;
            eprintln!("{} {name}: {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.summary);
            if outcome.passed {
                Ok(())
            } else {
                Err(CliError::ExperimentFailed(name))
            }
        }
        Command::Check { file, dump_canonical } => {
            let problem = commands::load(&file)?;
            problem.cost_vector()?;
            problem.first_stage()?;
            if !problem.marginals.is_empty() {
                problem.reference()?;
            }
            match problem.ambiguity {
                sirdro_cli::problem::Ambiguity::Ball { .. } => drop(problem.ball()?),
                sirdro_cli::problem::Ambiguity::Moment(_) => drop(problem.moment_set()?),
            }
            if dump_canonical {
                commands::emit(&problem.canonical(), None)
            } else {
                println!("ok");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
