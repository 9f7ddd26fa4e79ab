fn main() {
    std::process::exit(tloss_cli::run());
}
