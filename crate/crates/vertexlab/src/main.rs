use clap::Parser;

fn main() {
    let cli = vertexlab::cli::Cli::parse();
    std::process::exit(vertexlab::cli::run(cli));
}
