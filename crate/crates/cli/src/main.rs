use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let status = mrdesc_cli::run(std::env::args_os(), io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr());
    ExitCode::from(status as u8)
}
