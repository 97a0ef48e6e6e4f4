fn main() {
    let seed = std::env::var("VQGE_SEED").ok();
    std::process::exit(vqge_core::cli::run(std::env::args_os(), seed));
}
