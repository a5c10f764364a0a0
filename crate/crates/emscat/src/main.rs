use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = emscat::cli::Cli::parse();
    emscat::cli::run(cli)
}
