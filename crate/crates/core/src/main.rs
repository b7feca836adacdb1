fn main() {
    std::process::exit(cauchy_observer::cli::main_entry());
}
