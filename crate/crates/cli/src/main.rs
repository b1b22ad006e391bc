use clap::Parser;
use vdselect_cli::{run, Cli};

fn main() {
    // clap reports usage errors itself with exit code 2.
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("vdselect: {e}");
        std::process::exit(e.exit_code());
    }
}
