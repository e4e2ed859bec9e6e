fn main() {
    std::process::exit(annealfem::cli::run(std::env::args_os()));
}
