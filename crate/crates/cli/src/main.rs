use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noether_cli::{self as cli, CliError, Scenario, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};

#[derive(Parser)]
#[command(name = "noether", version, about = "Verify and simulate charged-particle fields with a Noether point symmetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Worker threads for grids and trajectory batches.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals of the symmetry, Faraday and potential identities on the scenario grid.
    Verify(Common),
    /// Integrate every initial condition and report invariant drift.
    Simulate(Common),
    /// Canonical coordinates and generator components at one point.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        t: f64,
    },
}

fn load(c: &Common) -> Result<Scenario, CliError> {
    Scenario::load(&c.scenario).map_err(|e| CliError::Input(format!("{}: {e}", c.scenario.display())))
}

fn prepare_out(c: &Common) -> Result<(), CliError> {
    std::fs::create_dir_all(&c.out)?;
    Ok(())
}

fn run(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Verify(c) => {
            let s = load(&c)?;
            let report = cli::with_threads(c.threads, || cli::verify(&s))??;
            prepare_out(&c)?;
            let path = c.out.join(&s.file.outputs.report);
            cli::write_json(&path, &report)?;
            for r in &report.reports {
                println!(
                    "{:<4} {:<22} {:<18} max_abs {:.3e}  tol*scale {:.3e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.identity,
                    format!("{:?}", r.mode),
                    r.max_abs,
                    r.tol * r.scale
                );
            }
            for e in &report.errors {
                println!("ERR  {e}");
            }
            println!("report written to {}", path.display());
            Ok(report.pass)
        }
        Command::Simulate(c) => {
            let s = load(&c)?;
            let (summary, trajectories) = cli::with_threads(c.threads, || cli::simulate(&s))??;
            prepare_out(&c)?;
            for (t, tr) in summary.trajectories.iter().zip(&trajectories) {
                if let (Some(file), Some(tr)) = (&t.file, tr) {
                    cli::write_trajectory(&c.out.join(file), tr)?;
                }
                match (t.max_relative_drift, &t.error) {
                    (Some(d), _) => println!(
                        "{} trajectory {}: max relative drift {:.3e} (limit {:.1e})",
                        if t.pass { "PASS" } else { "FAIL" },
                        t.index,
                        d,
                        summary.drift_tol
                    ),
                    (None, Some(e)) => println!("FAIL trajectory {}: {e}", t.index),
                    (None, None) => unreachable!("a trajectory either has a drift or an error"),
                }
            }
            let path = c.out.join(format!("{}_summary.json", s.file.outputs.trajectory_prefix));
            cli::write_json(&path, &summary)?;
            Ok(summary.pass)
        }
        Command::Transform { common, x, y, t } => {
            let s = load(&common)?;
            let out = cli::transform(&s, x, y, t)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("plain numbers serialize"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    ExitCode::from(code as u8)
}
