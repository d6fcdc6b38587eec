fn main() {
    env_logger::init();
    let out = sgsfm_cli::dispatch(std::env::args_os());
    if out.exit_code == 0 {
        if !out.summary.is_empty() {
            println!("{}", out.summary);
        }
    } else {
        eprintln!("{}", out.summary.trim_end());
    }
    std::process::exit(out.exit_code);
}
