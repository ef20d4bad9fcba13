use std::io::Write;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use clusterkr_cli::{init_logging, run_batch, server, Cli, Command};

fn main() -> ExitCode {
    init_logging();
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    if let Ok(Cli { command: Command::Serve(s), .. }) = Cli::try_parse_from(&args) {
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        };
        return match rt.block_on(server::serve(&s.host, s.port, Duration::from_secs(s.idle_timeout))) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot serve on {}:{}: {e}", s.host, s.port);
                ExitCode::from(1)
            }
        };
    }
    let (code, out, err) = run_batch(args);
    if !out.is_empty() {
        let _ = writeln!(std::io::stdout(), "{out}");
    }
    if !err.is_empty() {
        let _ = writeln!(std::io::stderr(), "{}", err.trim_end());
    }
    ExitCode::from(code as u8)
}
