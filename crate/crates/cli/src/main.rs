use clap::Parser;

fn main() {
    let cli = holocrb_cli::Cli::parse();
    match holocrb_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
