use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    let code = latticewalk::cli::run(std::env::args().skip(1), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
