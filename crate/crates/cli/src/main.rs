use clap::Parser;

fn main() -> anyhow::Result<()> {
    cvqe_cli::run(cvqe_cli::Cli::parse())
}
