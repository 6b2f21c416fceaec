use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chmhd_cli::{run, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chmhd", version, about = "Cahn-Hilliard-MHD finite element solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study over several meshes.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated resolutions, e.g. 4,8,16.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Unforced run checking that the discrete energy never increases.
    Energy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Time stepping with diagnostics and optional VTK snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn load(path: &Path, output_dir: Option<PathBuf>, edit: impl FnOnce(&mut RunConfig)) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    edit(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Converge { config, levels, output_dir } => {
            let cfg = load(&config, output_dir, |c| {
                if let Some(l) = levels {
                    c.levels = l;
                }
            })?;
            let out = run::converge(&cfg)?;
            print!("{}", out.summary());
            println!("wrote {}", cfg.output_dir.join("errors.csv").display());
            Ok(0)
        }
        Command::Energy { config, dt, steps, seed, output_dir } => {
            let cfg = load(&config, output_dir, |c| {
                c.dt = dt.or(c.dt);
                c.steps = steps.or(c.steps);
                c.seed = seed.unwrap_or(c.seed);
            })?;
            let out = run::energy(&cfg)?;
            let verdict = if out.pass { "PASS" } else { "FAIL" };
            println!(
                "{verdict}: {} steps, E0 = {:.6e}, largest step change {:.3e}",
                out.rows.len() - 1,
                out.rows[0].energy,
                out.max_increase
            );
            Ok(if out.pass { 0 } else { 3 })
        }
        Command::Simulate { config, output_dir } => {
            let cfg = load(&config, output_dir, |_| {})?;
            let out = run::simulate(&cfg)?;
            let last = out.rows.last().expect("initial row");
            println!("t = {:.6}, E = {:.12e}, {} snapshots", last.t, last.energy, out.snapshots);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors are configuration errors; exit code 2 is reserved.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
