use std::process::ExitCode;

fn main() -> ExitCode {
    let status = expander_cli::run(std::env::args_os().collect(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(status as u8)
}
