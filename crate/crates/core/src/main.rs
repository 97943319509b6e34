use std::path::PathBuf;
use std::process::ExitCode;

use airan::experiment::{self, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "airan", version, about = "Peak-reducing massive-MIMO precoding and DBN spectrum access")]
struct Cli {
    /// TOML experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides master_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides output_dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy efficiency of ZF vs neurodynamic precoding over the antenna grid
    EeSweep,
    /// Generate the labeled spectrum dataset
    DatasetGen,
    /// Pretrain and fine-tune the DBN detector
    SasTrain,
    /// Per-SNR detection accuracy on the held-out split
    SasEval,
    /// Sense each carrier and emit a spectrum-access decision
    SasDecide {
        /// One capture per policy carrier; overrides sas.captures
        captures: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> airan::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    match cli.command {
        Command::EeSweep => {
            let out = experiment::cmd_ee_sweep(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: skipped N_t={} M_r={}: {}", w.n_t, w.m_r, w.reason);
            }
            eprintln!("wrote {}", out.csv.display());
        }
        Command::DatasetGen => {
            let dir = experiment::cmd_dataset_gen(&cfg)?;
            eprintln!("wrote dataset to {}", dir.display());
        }
        Command::SasTrain => {
            let out = experiment::cmd_sas_train(&cfg)?;
            eprintln!("wrote {} and {}", out.model.display(), out.log.display());
        }
        Command::SasEval => {
            let out = experiment::cmd_sas_eval(&cfg)?;
            eprintln!("wrote {}", out.csv.display());
        }
        Command::SasDecide { captures } => {
            if !captures.is_empty() {
                cfg.sas.captures = captures;
            }
            let out = experiment::cmd_sas_decide(&cfg)?;
            println!("{}", out.decision.record());
            eprintln!("{}", out.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("airan-error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
