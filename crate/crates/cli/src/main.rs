use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    // Unlocked handles: sweep progress is written from worker threads.
    let code = ktree_cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
