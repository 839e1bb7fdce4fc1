//! Binary entry point; all behaviour lives in `reflectsim::harness`.

fn main() {
    std::process::exit(reflectsim::harness::cli::main_entry());
}
