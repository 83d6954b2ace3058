fn main() {
    std::process::exit(hcm_sim::cli::main_with(std::env::args_os()));
}
