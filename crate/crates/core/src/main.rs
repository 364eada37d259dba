use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let color = redvote::cli::color_enabled();
    let code = redvote::cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock(), color);
    ExitCode::from(code as u8)
}
