//! Experiment runner: `infconv run <config.toml>` executes one experiment
//! and writes its CSV plus a JSON sidecar; `validate` checks a config
//! without running; `list-experiments` names the available experiments.
//!
//! Thread count can be capped with the standard `RAYON_NUM_THREADS`
//! environment variable; outputs are byte-identical regardless.

use clap::{Parser, Subcommand};

use infconv_cli::config::{load_config, EXPERIMENTS};
use infconv_cli::experiments::{self, run_experiment, write_outputs};

#[derive(Parser)]
#[command(name = "infconv", about = "Sampled inf-convolution experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run { config_path: String },
    /// Validate a config file without running it; reports all errors.
    Validate { config_path: String },
    /// List the available experiment names.
    ListExperiments,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config_path } => cmd_run(&config_path),
        Command::Validate { config_path } => cmd_validate(&config_path),
        Command::ListExperiments => {
            for e in EXPERIMENTS {
                println!("{e}");
            }
            0
        }
    };
    std::process::exit(code);
}

fn cmd_run(path: &str) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let errs = cfg.validate();
    if !errs.is_empty() {
        for e in &errs {
            eprintln!("config error: {e}");
        }
        return 2;
    }
    match run_experiment(&cfg) {
        Ok(out) => {
            if let Err(e) = write_outputs(&cfg, &out) {
                eprintln!("{e}");
                return 1;
            }
            println!(
                "{}: wrote {} rows to {} (seed {}, config hash {})",
                cfg.experiment,
                out.rows,
                cfg.output_path,
                cfg.seed,
                experiments::config_hash(&cfg)
            );
            0
        }
        Err(e) => {
            eprintln!("experiment failed: {e}");
            1
        }
    }
}

fn cmd_validate(path: &str) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let errs = cfg.validate();
    if errs.is_empty() {
        println!("ok: {} (seed {})", cfg.experiment, cfg.seed);
        0
    } else {
        for e in &errs {
            eprintln!("config error: {e}");
        }
        2
    }
}
