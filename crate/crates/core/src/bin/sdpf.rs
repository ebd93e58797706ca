use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sdpf::experiments::{run_experiment, ConfigOverrides, Experiment, ExperimentConfig, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Converge,
    Scale,
    Ioamp,
    Memory,
    Skrun,
    Ablate,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Converge => Experiment::Converge,
            Command::Scale => Experiment::Scale,
            Command::Ioamp => Experiment::Ioamp,
            Command::Memory => Experiment::Memory,
            Command::Skrun => Experiment::Skrun,
            Command::Ablate => Experiment::Ablate,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

/// Seeded experiments over the self-describing flow simulator.
///
/// Exits 0 iff every check in the report passes.
#[derive(Debug, Parser)]
#[command(name = "sdpf", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file of config fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated node counts.
    #[arg(long = "P-sweep", value_delimiter = ',')]
    p_sweep: Option<Vec<usize>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p_loss: Option<f64>,
    #[arg(long)]
    p_dup: Option<f64>,
    #[arg(long)]
    p_f: Option<f64>,
    /// Per-node window, in increments.
    #[arg(long)]
    window: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = ConfigOverrides {
        seed: cli.seed,
        seeds: cli.seeds,
        p_sweep: cli.p_sweep,
        alpha: cli.alpha,
        p_loss: cli.p_loss,
        p_dup: cli.p_dup,
        p_f: cli.p_f,
        window: cli.window,
        out: cli.out,
        format: cli.format.map(|f| match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }),
        ..Default::default()
    };
    let cfg = match ExperimentConfig::resolve(cli.command.into(), cli.config.as_deref(), &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sdpf: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("sdpf {}: {e}", cfg.experiment);
            return ExitCode::from(2);
        }
    };
    let text = report.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("sdpf: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
