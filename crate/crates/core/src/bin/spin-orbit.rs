use clap::Parser;
use spin_orbit_pendulum::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
