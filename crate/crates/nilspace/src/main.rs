fn main() { std::process::exit(nilspace::cli::run()); }
