use std::io::Write;

use firmlogit::cli::{run, Io};

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(std::env::args_os(), &mut Io { out: &mut out, err: &mut err });
    let _ = out.flush();
    std::process::exit(code);
}
