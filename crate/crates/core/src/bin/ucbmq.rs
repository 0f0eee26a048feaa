use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ucbmq::checks::run_suite;
use ucbmq::harness::{run_experiment, write_records, write_records_to, ExperimentConfig, RawConfig};
use ucbmq::mdp::backward_induction;
use ucbmq::{Error, Result};

#[derive(Parser)]
#[command(name = "ucbmq", version, about = "Tabular episodic RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write per-episode regret as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `agent` key of the config.
        #[arg(long)]
        agent: Option<String>,
        /// Overrides the `out` key; without either, CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the optimal value of the initial state of the configured environment.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the randomized lemma checks and print a pass/fail table.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &Path, overrides: &[(&str, Option<&str>)]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw = RawConfig::parse(&text)?;
    for (key, value) in overrides {
        if let Some(value) = value {
            raw.set(key, value);
        }
    }
    raw.into_config()
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, agent, out } => {
            let out = out.as_ref().and_then(|p| p.to_str());
            let config = load(&config, &[("agent", agent.as_deref()), ("out", out)])?;
            let records = run_experiment(&config)?;
            let (agent, env) = (config.agent.as_str(), config.env.name());
            match &config.out {
                Some(path) => write_records(&records, agent, env, path)?,
                None => write_records_to(io::stdout().lock(), &records, agent, env)
                    .map_err(|e| Error::io("<stdout>", e))?,
            }
            Ok(true)
        }
        Command::Solve { config } => {
            let config = load(&config, &[])?;
            let mdp = config.env.build(config.seed)?;
            println!("{}", backward_induction(&mdp).v[[0, mdp.initial_state()]]);
            Ok(true)
        }
        Command::Check { seed } => {
            let outcomes = run_suite(seed)?;
            let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
            let mut stdout = io::stdout().lock();
            for o in &outcomes {
                let status = if o.passed { "PASS" } else { "FAIL" };
                writeln!(stdout, "{status}  {:width$}  {}", o.name, o.detail)
                    .map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
