use horseshoe_entropy::cli;

fn main() {
    let code = cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
