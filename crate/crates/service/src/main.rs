fn main() {
    std::process::exit(ieq_service::cli::main());
}
