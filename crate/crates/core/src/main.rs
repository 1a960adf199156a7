fn main() {
    std::process::exit(gameprice::cli::run(std::env::args_os()));
}
