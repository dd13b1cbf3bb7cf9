fn main() {
    std::process::exit(dglab::cli::main_exit_code());
}
