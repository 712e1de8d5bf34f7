use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use axiswirl::error::{Error, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};
use axiswirl::exponents::parse_exponent;
use axiswirl::scenario::{exponent_report, mms_report, output_root_from_env, run_scenario, sweep};

/// Axisymmetric Navier-Stokes with swirl, plus an estimate monitor.
///
/// Output goes under $AXISWIRL_OUTPUT_ROOT (default ./axiswirl-out).
/// Exit codes: 0 success, 2 configuration, 3 I/O, 4 failed assertion.
#[derive(Debug, Parser)]
#[command(name = "axiswirl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { scenario: PathBuf },
    /// Check an exponent triple and print the derived exponents.
    CheckExponents {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(allow_hyphen_values = true)]
        gamma: String,
    },
    /// Convergence study against a manufactured solution.
    Mms {
        /// rigid_rotation, decaying_swirl, taylor_vortex_swirl or lopsided_control
        kind: String,
        /// Radial resolutions, each double the previous.
        levels: Vec<usize>,
    },
    /// Run every *.json scenario in a directory.
    Sweep { dir: PathBuf },
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn run(cli: Cli) -> i32 {
    let root = output_root_from_env();
    match cli.command {
        Command::Run { scenario } => match run_scenario(&scenario, &root) {
            Ok(o) => {
                let status = if o.exit_code == EXIT_OK { "PASS" } else { "FAIL" };
                match &o.failure {
                    Some(f) => println!(
                        "{status} (truncated at t = {}: {}) -> {}",
                        f.time,
                        f.message,
                        o.directory.display()
                    ),
                    None => println!("{status} -> {}", o.directory.display()),
                }
                o.exit_code
            }
            Err(e) => fail(&e),
        },
        Command::CheckExponents { a, b, gamma } => {
            let parsed = (|| Ok::<_, Error>((parse_exponent(&a)?, parse_exponent(&b)?, parse_exponent(&gamma)?)))();
            match parsed {
                Ok((a, b, g)) => {
                    let (text, json, _) = exponent_report(a, b, g);
                    print!("{text}");
                    println!("--- json");
                    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
                    EXIT_OK
                }
                Err(e) => fail(&e),
            }
        }
        Command::Mms { kind, levels } => match mms_report(&kind, &levels, &root) {
            Ok(o) => {
                print!("{}", o.report.to_csv());
                let status = if o.passed { "PASS" } else { "FAIL" };
                println!("{status} -> {}", o.directory.display());
                if o.passed { EXIT_OK } else { EXIT_ASSERTION }
            }
            Err(e) => fail(&e),
        },
        Command::Sweep { dir } => match sweep(&dir, &root) {
            Ok(entries) => {
                let mut worst = EXIT_OK;
                for e in &entries {
                    let code = e.exit_code();
                    match &e.result {
                        Ok(o) => println!("{code} {} -> {}", e.scenario.display(), o.directory.display()),
                        Err(err) => println!("{code} {}: {err}", e.scenario.display()),
                    }
                    worst = worst.max(code);
                }
                worst
            }
            Err(e) => fail(&e),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    ExitCode::from(run(cli) as u8)
}
