use clap::Parser;
use latre_cli::report::{to_canonical_json, ErrorBodyJson, ErrorJson};
use latre_cli::run::{run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        match &e {
            CliError::Degenerate { kind, value, message } => {
                // Callers reading stdout as JSON still get JSON on failure.
                let body = ErrorJson {
                    error: ErrorBodyJson { kind, value: *value, message },
                };
                println!("{}", to_canonical_json(&body));
                eprintln!("error: {message}");
            }
            CliError::Input(m) => eprintln!("error: {m}"),
            CliError::Internal(m) => eprintln!("internal error: {m}"),
        }
        std::process::exit(e.exit_code());
    }
}
