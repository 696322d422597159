fn main() {
    std::process::exit(accel_ppa::cli::run(std::env::args_os()));
}
