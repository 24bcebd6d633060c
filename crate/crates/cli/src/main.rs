use std::io::{self, IsTerminal};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    let mut input = stdin.lock();
    let code = factordb_cli::run(
        std::env::args_os(),
        &mut input,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
        prompt,
    );
    ExitCode::from(code as u8)
}
