use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use randnla_cli::commands::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let reports = run(&cli.command);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for r in &reports {
        let _ = writeln!(out, "{}", r.to_json_line());
        eprintln!("{}", r.summary());
    }
    ExitCode::from(exit_code(&reports) as u8)
}
