fn main() {
    std::process::exit(volt_sched::cli::dispatch(std::env::args_os()));
}
