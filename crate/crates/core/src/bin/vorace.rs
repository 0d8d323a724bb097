fn main() {
    if let Err(e) = vorace::cli::init_threads() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = vorace::cli::run(std::env::args(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
