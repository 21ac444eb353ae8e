use saruav::harness::cli;

fn main() {
    std::process::exit(cli::run());
}
