fn main() {
    std::process::exit(groupbh_cli::run(std::env::args_os()));
}
