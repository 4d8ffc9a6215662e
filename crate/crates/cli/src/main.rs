use clap::Parser;
use lhv_lab::Cli;

fn main() {
    let cli = Cli::parse();
    match lhv_lab::execute(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
