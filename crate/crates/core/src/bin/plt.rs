fn main() {
    std::process::exit(poisson_laguerre::cli::dispatch(std::env::args_os()));
}
