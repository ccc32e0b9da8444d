use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfc_cli::config::load_config;
use qfc_cli::{converge, oracle, presets, runner, AppError};

#[derive(Parser)]
#[command(name = "qfc", about = "Frequency-conversion simulator: scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, sweep or study config and write its artifact
    /// directory.
    Run { config: PathBuf },
    /// Step-size/grid convergence study for a pulsed config.
    Converge {
        config: PathBuf,
        /// Number of step halvings.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Compare the pulsed propagator with flat pumps against the analytic
    /// CW Green functions.
    Oracle { config: PathBuf },
    /// List or emit the shipped study presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Emit {
        name: String,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn init_workers() {
    if let Ok(v) = std::env::var("QFC_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run { config } => {
            let loaded = load_config(&config)?;
            let dir = runner::run(&loaded)?;
            println!("run complete: {}", dir.display());
            Ok(())
        }
        Command::Converge { config, levels } => {
            let loaded = load_config(&config)?;
            let (dir, report) = converge::convergence_study(&loaded, levels)?;
            for (j, (steps, h, e)) in report.errors.iter().enumerate() {
                let order = report
                    .orders
                    .get(j)
                    .map(|o| format!(", order {o:.2}"))
                    .unwrap_or_default();
                println!("steps {steps}, h {h:.3e} m, error {e:.3e}{order}");
            }
            if let Some(g) = report.grid_check {
                println!("grid doubling deviation: {g:.3e}");
            }
            if let Some(o) = report.single_iteration_order {
                println!("single-iteration fitted order: {o:.2}");
            }
            println!(
                "{}: min fitted order {:.2} (report in {})",
                if report.pass { "PASS" } else { "FAIL" },
                report.min_order,
                dir.display()
            );
            if report.pass {
                Ok(())
            } else {
                Err(AppError::Numerical(format!(
                    "fitted order {:.2} below 1.8{}",
                    report.min_order,
                    if report.monotone { "" } else { " (non-monotone)" }
                )))
            }
        }
        Command::Oracle { config } => {
            let loaded = load_config(&config)?;
            let (dir, report) = oracle::cw_vs_pulsed_oracle(&loaded)?;
            for (block, dev) in &report.deviations {
                println!("block {block:?}: max relative deviation {dev:.3e}");
            }
            println!(
                "{}: threshold {:.1e} (report in {})",
                if report.pass { "PASS" } else { "FAIL" },
                report.threshold,
                dir.display()
            );
            if report.pass {
                Ok(())
            } else {
                Err(AppError::Numerical("oracle threshold breached".into()))
            }
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in presets::PRESET_NAMES {
                    println!("{name}");
                }
                Ok(())
            }
            PresetAction::Emit { name, dir } => {
                let path = presets::emit(&name, &dir)?;
                println!("wrote {}", path.display());
                Ok(())
            }
        },
    }
}
