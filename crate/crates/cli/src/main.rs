//! `qklab`: runs the quantum-kernel SVM noise studies from a config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qklab_core::experiments::{
    bounds_output, corruption_output, export_kernel, noise_compare_output, preset, preset_names,
    selection_output, ExperimentConfig, RunOutput,
};
use qklab_core::Error;

#[derive(Parser)]
#[command(name = "qklab", version, about = "Quantum-kernel SVM experiments under depolarising noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label-corruption study: accuracy and margin distribution per fraction.
    Corruption(Common),
    /// Global against local noise at matched survival probability.
    NoiseCompare(Common),
    /// Empirical noisy margin against the theoretical bounds.
    Bounds(Common),
    /// Choose C0 by cross-validation and report the feasible C' range.
    Select(Common),
    /// Write the kernel matrix of the prepared dataset as CSV.
    KernelExport {
        #[command(flatten)]
        common: Common,
        /// Noise probability for `noise.model`.
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        /// Output file; defaults to `<output>/kernel.csv`.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped preset.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key, e.g. `--set svm.c0=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; beats both the config and $QKLAB_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => {
                return Err(Error::Config("pass --config <file> or --preset <name>".into()))
            }
        };
        cfg.apply_env();
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::MalformedRow { .. }
        | Error::EmptyDataset(_)
        | Error::UnsupportedSize(_)
        | Error::Validation(_) => 2,
        Error::Convergence { .. } | Error::NotConverged { .. } => 3,
        Error::Invariant(_) => 4,
        _ => 1,
    }
}

fn report(out: &RunOutput, dir: &std::path::Path) -> Result<(), Error> {
    for path in out.write(dir)? {
        println!("wrote {}", path.display());
    }
    println!("config_hash {}", out.record.config_hash);
    println!("{}", out.summary_pretty());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Corruption(c) => {
            let cfg = c.resolve()?;
            report(&corruption_output(&cfg)?, &cfg.output)
        }
        Command::NoiseCompare(c) => {
            let cfg = c.resolve()?;
            report(&noise_compare_output(&cfg)?, &cfg.output)
        }
        Command::Bounds(c) => {
            let cfg = c.resolve()?;
            report(&bounds_output(&cfg)?, &cfg.output)
        }
        Command::Select(c) => {
            let cfg = c.resolve()?;
            report(&selection_output(&cfg)?, &cfg.output)
        }
        Command::KernelExport { common, p, file } => {
            let cfg = common.resolve()?;
            let path = file.unwrap_or_else(|| cfg.output.join("kernel.csv"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            export_kernel(&cfg, p)?.save_csv(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
