use std::path::PathBuf;
use std::process::ExitCode;

use circot_cli::bench::default_seed;
use circot_cli::commands::parse_range;
use circot_cli::{
    cmd_check, cmd_curve, cmd_distance, cmd_plan, load_histogram, run_bench, BenchConfig, CliError, RunReport,
    SolveFlags,
};
use clap::{Args, Parser, Subcommand};

/// Optimal transport between discrete measures on the circle.
#[derive(Debug, Parser)]
#[command(name = "circot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal transport cost and the MK distance.
    Distance(Instance),
    /// Minimal cost plus the optimal plan, sorted by source position.
    Plan(Instance),
    /// Samples C(theta) and its one-sided derivatives.
    Curve {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// "lo:hi"; defaults to the search bracket.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
    },
    /// Compares the solver against both brute-force oracles (exit 3 on mismatch).
    Check(Instance),
    /// Times the solver on random instances under |x - y|.
    Bench {
        /// Total atom counts n0 + n1.
        #[arg(long, value_delimiter = ',', default_values_t = [100, 1000, 10000])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-10])]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Defaults to $CIRC_OT_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave out timings so that output depends only on the seed.
        #[arg(long)]
        omit_timing: bool,
    },
}

#[derive(Debug, Args)]
struct Instance {
    file0: PathBuf,
    file1: PathBuf,
    /// Exponent of the cost |x - y|^lambda.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
    epsilon: f64,
    /// Common mass denominator M; overrides the one in the files.
    #[arg(long)]
    denominator: Option<u64>,
    /// Use the narrower bracket valid for power costs.
    #[arg(long)]
    tight_bracket: bool,
    /// Print each bisection step to stderr.
    #[arg(long)]
    verbose: bool,
    /// Leave wall_time_ms out of the report.
    #[arg(long)]
    omit_timing: bool,
}

impl Instance {
    fn flags(&self) -> SolveFlags {
        SolveFlags {
            lambda: self.lambda,
            epsilon: self.epsilon,
            tight_bracket: self.tight_bracket,
            verbose: self.verbose,
            omit_timing: self.omit_timing,
        }
    }

    fn load(&self) -> Result<(circot_core::CircularHistogram, circot_core::CircularHistogram), CliError> {
        Ok((
            load_histogram(&self.file0, self.denominator)?,
            load_histogram(&self.file1, self.denominator)?,
        ))
    }
}

fn run(cli: Cli) -> Result<RunReport, CliError> {
    match cli.command {
        Command::Distance(i) => {
            let (h0, h1) = i.load()?;
            cmd_distance(&h0, &h1, &i.flags())
        }
        Command::Plan(i) => {
            let (h0, h1) = i.load()?;
            cmd_plan(&h0, &h1, &i.flags())
        }
        Command::Curve {
            instance,
            samples,
            range,
        } => {
            let range = range.as_deref().map(parse_range).transpose()?;
            let (h0, h1) = instance.load()?;
            cmd_curve(&h0, &h1, &instance.flags(), samples, range)
        }
        Command::Check(i) => {
            let (h0, h1) = i.load()?;
            cmd_check(&h0, &h1, &i.flags())
        }
        Command::Bench {
            sizes,
            epsilons,
            repeats,
            seed,
            omit_timing,
        } => {
            run_bench(&BenchConfig {
                sizes,
                epsilons,
                repeats,
                seed: seed.unwrap_or_else(default_seed),
                omit_timing,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let report = CliError::Argument(e.kind().to_string()).to_report();
            eprint!("{e}");
            println!("{}", serde_json::to_string_pretty(&report).expect("error serialises"));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(CliError::Disagreement(report)) => {
            println!("{}", report.to_json());
            ExitCode::from(3)
        }
        Err(e) => {
            println!("{}", serde_json::to_string_pretty(&e.to_report()).expect("error serialises"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
