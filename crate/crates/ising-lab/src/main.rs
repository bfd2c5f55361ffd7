fn main() { std::process::exit(ising_lab::cli::run(std::env::args_os())); }
