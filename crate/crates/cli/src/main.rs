use clap::Parser;

fn main() {
    let cli = ndslab_cli::Cli::parse();
    std::process::exit(ndslab_cli::execute(&cli));
}
