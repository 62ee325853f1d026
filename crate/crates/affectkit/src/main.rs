use clap::Parser;

fn main() {
    let cli = affectkit::cli::Cli::parse();
    if let Err(e) = affectkit::cli::run(cli) {
        eprintln!("error[{}]: {e}", e.category().tag());
        std::process::exit(e.category().exit_code());
    }
}
