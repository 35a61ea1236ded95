use clap::Parser;
use twfpd_cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| run(&cli)) {
        eprintln!("twfpd: {e}");
        std::process::exit(e.exit_code());
    }
}
