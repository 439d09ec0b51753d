use clap::Parser;

fn main() {
    let cli = duopoly::Cli::parse();
    std::process::exit(duopoly::run(&cli));
}
