use clap::Parser;
use mimo_ensrf_cli::{run, Invocation};

fn main() {
    let inv = Invocation::parse();
    std::process::exit(run(&inv));
}
