//! Command-line pipeline and HTTP annotation service.

pub mod api;
pub mod commands;
pub mod datadir;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{Cli, Io};
pub use error::{CliError, ErrorKind};

/// Parses `argv` and runs the command. Returns the process exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ =
                if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    match commands::execute(cli, &mut io) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            let _ = writeln!(io.err, "{e}");
            e.exit_code()
        }
    }
}
