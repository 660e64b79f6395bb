fn main() {
    std::process::exit(ntk_lab::cli::run());
}
