use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expansive::checks::Condition;
use expansive::gallery::{cmd_gallery, example1_spec, example2_spec, wang_linear_spec};
use expansive::run::{cmd_check, cmd_falsify, cmd_solve, Overrides, RunReport};
use expansive::spec::{ProblemSpec, Theorem};
use expansive::Error;

#[derive(Parser)]
#[command(name = "expansive", version, about = "Fixed points of expansive mappings on ordered metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every hypothesis check for the selected theorem.
    Check(ProblemArgs),
    /// Run the fixed-point iteration for the selected theorem.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Refuse to solve unless every hypothesis check passes.
        #[arg(long)]
        strict: bool,
    },
    /// Run a built-in example and compare it with its expected outcomes.
    Gallery {
        #[arg(value_parser = ["example1", "example2", "wang_linear", "theta_profile"])]
        name: String,
        /// Print the example's problem spec instead of running it.
        #[arg(long)]
        print_spec: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search for a counterexample with escalating density.
    Falsify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Condition to attack; defaults to the one the theorem imposes.
        #[arg(long, value_enum)]
        condition: Option<ConditionArg>,
        /// Maximum depth (shrinking fractions) or sample count (intervals).
        #[arg(long, default_value_t = 4096)]
        budget: u64,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    theorem: Option<TheoremArg>,
    #[arg(long)]
    eta: Option<f64>,
    /// Start point, e.g. `0`, `1/5`, `0.2` or a finite-space label.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Directory for report.json and trace files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    Ordered,
    Min,
    Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Phi,
    Wang,
    Min,
    Jungck,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Ordered => Theorem::Ordered,
            TheoremArg::Min => Theorem::Min,
            TheoremArg::Common => Theorem::Common,
        }
    }
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Phi => Condition::PhiExpansive,
            ConditionArg::Wang => Condition::Wang,
            ConditionArg::Min => Condition::MinCondition,
            ConditionArg::Jungck => Condition::Jungck,
        }
    }
}

impl ProblemArgs {
    fn load(&self) -> Result<ProblemSpec, Error> {
        let mut spec = ProblemSpec::from_file(&self.spec)?;
        Overrides {
            theorem: self.theorem.map(Into::into),
            eta: self.eta,
            x0: self.x0.clone(),
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
        }
        .apply(&mut spec);
        Ok(spec)
    }
}

fn emit(report: &RunReport, output: &OutputArgs) -> Result<(), Error> {
    if output.json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    if let Some(dir) = &output.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), report.to_json())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (report, output) = match &cli.command {
        Command::Check(p) => (cmd_check(&p.load()?)?, &p.output),
        Command::Solve { problem, strict } => {
            let out = problem.output.out.as_deref();
            (cmd_solve(&problem.load()?, *strict, out)?, &problem.output)
        }
        Command::Falsify {
            problem,
            condition,
            budget,
        } => (cmd_falsify(&problem.load()?, condition.map(Into::into), *budget)?, &problem.output),
        Command::Gallery {
            name,
            print_spec,
            output,
        } => {
            if *print_spec {
                let spec = match name.as_str() {
                    "example1" => example1_spec(2.0),
                    "example2" => example2_spec(2.0),
                    "wang_linear" => wang_linear_spec(2.0),
                    other => {
                        return Err(Error::InvalidConfig(format!("gallery item {other} has no problem spec")))
                    }
                };
                println!("{}", spec.to_json());
                return Ok(0);
            }
            (cmd_gallery(name)?, output)
        }
    };
    emit(&report, output)?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
