fn main() {
    std::process::exit(skystack::cli::main_entry());
}
