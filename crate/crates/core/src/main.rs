use clap::Parser;

fn main() {
    let cli = commlab::cli::Cli::parse();
    std::process::exit(commlab::cli::run(cli));
}
