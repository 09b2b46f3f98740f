use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbud_cli::commands::{cmd_blm, cmd_field, cmd_map, cmd_phase_scan, cmd_verify};
use fbud_cli::config::parse_angle_list;
use fbud_cli::{AmplitudeSource, CliError, RunConfig, Session};
use fbud_core::amplitudes::DEFAULT_LMAX;
use fbud_core::averaging::with_worker_threads;

#[derive(Parser, Debug)]
#[command(name = "fbud", version, about = "Phase-controlled FBUD photoemission asymmetry: quadrature oracle and closed form")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed of the random amplitude set
    #[arg(long, global = true, conflicts_with = "amplitudes")]
    seed: Option<u64>,

    /// Largest partial wave of the random amplitude set
    #[arg(long, global = true, conflicts_with = "amplitudes")]
    lmax: Option<i32>,

    /// Amplitude JSON file instead of a random set
    #[arg(long, global = true, value_name = "PATH")]
    amplitudes: Option<PathBuf>,

    /// Relative phase(s): radians or multiples of pi, comma separated.
    /// phase-scan uses the whole list; other commands take one value.
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    phi: Option<String>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Print the effective configuration as JSON and exit
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Run the invariant suite and write verify.json
    Verify,
    /// Scan the relative phase, fit A and delta, write phase_scan.csv and phase_fit.json
    PhaseScan,
    /// Write the B_LM table at the configured phase to blm.csv
    Blm,
    /// Write the angular distribution and FBUD part on a grid to map.csv
    Map,
    /// Write the field trajectory over one period to field.csv
    Field,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &cli.amplitudes {
        config.amplitudes = AmplitudeSource::File(path.clone());
    }
    if cli.seed.is_some() || cli.lmax.is_some() {
        let (seed, lmax) = match config.amplitudes {
            AmplitudeSource::Random { seed, lmax } => (seed, lmax),
            AmplitudeSource::File(_) => (1, DEFAULT_LMAX),
        };
        config.amplitudes = AmplitudeSource::Random {
            seed: cli.seed.unwrap_or(seed),
            lmax: cli.lmax.unwrap_or(lmax),
        };
    }
    if let Some(list) = &cli.phi {
        let phis = parse_angle_list(list).map_err(CliError::Config)?;
        match cli.command {
            Some(Command::PhaseScan) | None => config.phi_scan = phis,
            Some(_) if phis.len() == 1 => config.field.relative_phase = phis[0],
            Some(_) => return Err(CliError::Config("--phi takes a single value for this command".into())),
        }
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    Ok(config)
}

fn run(command: Command, session: &Session) -> Result<(), CliError> {
    match command {
        Command::Verify => {
            let report = cmd_verify(session)?;
            for c in &report.checks {
                println!(
                    "{} {:<34} {:.3e} (tol {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.tolerance
                );
            }
            if !report.passed {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                return Err(CliError::CheckFailed(format!("{failed} check(s) failed")));
            }
            println!("all {} checks passed", report.checks.len());
        }
        Command::PhaseScan => {
            let s = cmd_phase_scan(session)?;
            let delta = |d: Option<f64>| d.map_or("undefined".to_string(), |d| format!("{d:.9}"));
            println!("fit:      A = {:.9e}, delta = {}, residual = {:.2e}", s.fit.amplitude, delta(s.fit.internal_phase), s.fit.residual);
            println!("analytic: A = {:.9e}, delta = {}", s.analytic_amplitude, delta(s.analytic_internal_phase));
            println!("wrote {}", s.csv.display());
            if !s.fit.consistent {
                return Err(CliError::CheckFailed(
                    "samples do not follow -2A sin(2phi - delta) within tolerance".into(),
                ));
            }
        }
        Command::Blm => println!("wrote {}", cmd_blm(session)?.display()),
        Command::Map => println!("wrote {}", cmd_map(session)?.display()),
        Command::Field => println!("wrote {}", cmd_field(session)?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = effective_config(&cli).and_then(|config| {
        if cli.print_config {
            println!("{}", config.to_json());
            return Ok(());
        }
        let Some(command) = cli.command else {
            return Err(CliError::Config("no command given; see --help".into()));
        };
        let threads = config.threads;
        let session = Session::prepare(config)?;
        with_worker_threads(threads, || run(command, &session))?
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbud: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
