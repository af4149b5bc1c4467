fn main() {
    std::process::exit(breg_snn::cli::run(std::env::args_os()));
}
