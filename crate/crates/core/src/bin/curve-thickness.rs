fn main() {
    std::process::exit(curve_thickness::cli::run());
}
