fn main() {
    std::process::exit(photon_discrim::cli::run(std::env::args_os()));
}
