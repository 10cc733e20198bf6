fn main() {
    std::process::exit(nqovi_harness::cli::run());
}
