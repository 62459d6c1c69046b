use clap::Parser;

fn main() {
    let args = corrfade::cli::Args::parse();
    std::process::exit(corrfade::cli::run(&args));
}
