use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use toricak::cli::{Cli, Command};
use toricak::config::Settings;
use toricak::{commands, exit, CliError};

fn run(cli: &Cli) -> Result<i32, CliError> {
    let settings = Settings::resolve(&cli.global_flags())?;
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Catalog => commands::catalog_cmd()?,
        Command::Check(a) => commands::check(&settings, a)?,
        Command::Futaki(a) => commands::futaki(&settings, a)?,
        Command::SolitonVf => commands::soliton_vf(&settings)?,
        Command::Deform(a) => commands::deform(&settings, a)?,
        Command::Solve(a) => commands::solve(&settings, a)?,
        Command::Report(a) => commands::report(a)?,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &settings.out {
        report.write_to(dir)?;
    }
    println!("{}", report.to_json());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; here 2 means a failed tolerance.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT_ERROR as u8 } else { exit::OK as u8 });
        }
    };
    let code = match run(&cli) {
        Ok(code) => code,
        Err(CliError::Core(toricak_core::Error::NoConvergence(r))) => {
            eprintln!("error: soliton vector field solver did not converge (residual {:e})", r.max_residual());
            exit::TOLERANCE_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::INPUT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
