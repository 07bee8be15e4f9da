use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mpmcrb_cli::config::{preset, Experiment, ExperimentConfig, PRESETS};
use mpmcrb_cli::selftest::{run_selftest, SelftestOptions};
use mpmcrb_cli::{load_config, run_to_dir, CliError};

#[derive(Parser)]
#[command(
    name = "mcrb",
    version,
    about = "MCRB/CRB experiments for MIMO radar DOA under multipath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config or run manifest (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte-Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<u32>,
    /// Monte-Carlo base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds for a single scene (requires --config).
    Bounds,
    /// RMSE of the misspecified ML estimator vs SNR, with RCRB and RMCRB.
    Fig2,
    /// Bounds vs direct/indirect DOA separation, plus beampatterns.
    Fig3,
    /// Bounds vs SMR for constructive and destructive multipath.
    Fig4,
    /// RMCRB/RCRB map over phase difference and DOA separation.
    Fig5,
    /// Ground-reflection scenario over range (fig8 preset by default).
    Scenario {
        /// Preset name when no --config is given.
        #[arg(long, default_value = "fig8")]
        preset: String,
    },
    /// Monte-Carlo sweep (requires --config).
    Montecarlo,
    /// Transmit and receive beampatterns (requires --config).
    Beampattern,
    /// Analytic self-checks.
    Selftest {
        /// Perturb the second steering derivative to exercise the checks.
        #[arg(long)]
        inject_fault: bool,
    },
    /// List shipped presets.
    Presets,
}

fn expected_kind(cmd: &Command, exp: &Experiment) -> bool {
    matches!(
        (cmd, exp),
        (Command::Bounds, Experiment::Bounds(_))
            | (
                Command::Fig2 | Command::Montecarlo,
                Experiment::Montecarlo(_)
            )
            | (Command::Fig3 | Command::Fig4, Experiment::Sweep(_))
            | (Command::Fig5, Experiment::PhaseMap(_))
            | (Command::Scenario { .. }, Experiment::Scenario(_))
            | (Command::Beampattern, Experiment::Beampattern(_))
    )
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.command) {
        (Some(path), _) => load_config(path)?,
        (None, Command::Fig2) => preset("fig2")?,
        (None, Command::Fig3) => preset("fig3")?,
        (None, Command::Fig4) => preset("fig4")?,
        (None, Command::Fig5) => preset("fig5")?,
        (None, Command::Scenario { preset: p }) => preset(p)?,
        (None, _) => {
            return Err(CliError::field(
                "--config",
                "this subcommand needs a config file",
            ))
        }
    };
    if !expected_kind(&cli.command, &cfg.experiment) {
        return Err(CliError::field(
            "experiment.kind",
            "does not match the subcommand",
        ));
    }
    cfg.override_trials_seed(cli.trials, cli.seed)?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            Ok(true)
        }
        Command::Selftest { inject_fault } => {
            let checks = run_selftest(SelftestOptions {
                perturb_second_derivative: *inject_fault,
            })?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        _ => {
            let cfg = resolve(cli)?;
            let report = run_to_dir(&cfg, &cli.out, cli.svg)?;
            for r in &report.manifest.outputs {
                println!("{}", cli.out.join(&r.file).display());
            }
            println!("{}", report.manifest_path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
