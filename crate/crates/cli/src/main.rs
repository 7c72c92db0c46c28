use clap::Parser;

fn main() {
    let args = cli::Cli::parse();
    if let Err(e) = cli::run(&args) {
        eprintln!("qtomo: {e}");
        std::process::exit(e.exit_code());
    }
}
