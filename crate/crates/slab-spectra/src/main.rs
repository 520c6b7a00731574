use clap::Parser;
use slab_spectra::cli::{run, Args};

fn main() {
    let args = Args::parse();
    std::process::exit(run(&args));
}
