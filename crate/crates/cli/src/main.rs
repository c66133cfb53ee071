//! `slowlight`: runs scenario files or shipped presets and writes CSV tables,
//! optional SVG plots and a summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slowlight_core::scenario::{load_preset, PRESETS};
use slowlight_core::{load_scenario, run, Error, Result, RunOptions, Scenario, Stages};

#[derive(Parser)]
#[command(name = "slowlight", version, about = "EIT slow-light and Sagnac simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe transmission spectrum and lock-in signal.
    EitSpectrum(Common),
    /// Refractive index, group index, Kramers-Kronig check and homodyne trace.
    Dispersion(Common),
    /// Pulse delay and reshaping through the cell.
    Slowlight(Common),
    /// Phase-conjugate reflectivity spectrum from four-wave mixing.
    PcSpectrum(Common),
    /// Sagnac phase enhancement and phase-conjugate bias.
    Gyro(Common),
    /// Fit density, ground-state dephasing and pump Rabi frequency to the targets.
    Calibrate(Common),
    /// Every stage the scenario has a section for.
    Run(Common),
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name (see `slowlight presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for calibration restarts; overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write SVG plots next to the CSV tables.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    svg: Switch,
    /// Overrides the number of detuning grid points.
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load_scenario(path),
            (None, Some(name)) => load_preset(name),
            (None, None) => Err(Error::validation("config", "either --config or --preset is required")),
        }
    }
}

fn stages(command: &Command) -> Stages {
    let none = Stages::NONE;
    match command {
        Command::EitSpectrum(_) => Stages { spectrum: true, lockin: true, ..none },
        Command::Dispersion(_) => Stages { dispersion: true, ..none },
        Command::Slowlight(_) => Stages { spectrum: true, pulse: true, ..none },
        Command::PcSpectrum(_) => Stages { fwm: true, ..none },
        Command::Gyro(_) => Stages { gyro: true, ..none },
        Command::Calibrate(_) | Command::Presets => none,
        Command::Run(_) => Stages::ALL,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let stages = stages(&cli.command);
    let (common, generic) = match &cli.command {
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            return Ok(());
        }
        Command::Run(c) => (c, true),
        Command::EitSpectrum(c)
        | Command::Dispersion(c)
        | Command::Slowlight(c)
        | Command::PcSpectrum(c)
        | Command::Gyro(c)
        | Command::Calibrate(c) => (c, false),
    };
    let scenario = common.scenario()?;
    if matches!(cli.command, Command::Calibrate(_)) && scenario.calibration.is_none() {
        return Err(Error::validation("medium.calibrate", "must be `on` for the calibrate command"));
    }
    let options = RunOptions {
        stages,
        svg: matches!(common.svg, Switch::On),
        seed: common.seed,
        grid_points: common.grid_points,
        require_sections: !generic,
    };
    let report = run(&scenario, &common.out, &options)?;
    print!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
