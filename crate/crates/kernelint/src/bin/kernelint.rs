use clap::Parser;

fn main() {
    let cli = kernelint::cli::Cli::parse();
    std::process::exit(kernelint::cli::run(cli));
}
