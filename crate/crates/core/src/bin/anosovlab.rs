use clap::Parser;

fn main() {
    let args = anosovlab::cli::Args::parse();
    std::process::exit(anosovlab::cli::main_with_args(args));
}
