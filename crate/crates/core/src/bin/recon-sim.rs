fn main() {
    std::process::exit(recon_sim::cli::main_with_args(std::env::args_os()));
}
