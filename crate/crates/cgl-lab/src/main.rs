use clap::Parser;

fn main() {
    let cli = cgl_lab::cli::Cli::parse();
    std::process::exit(cgl_lab::cli::run(cli));
}
