use clap::Parser;

use diagap::cli::{exit_code, run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(report) => println!("{}", report.render(config.out)),
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(exit_code(&err));
        }
    }
}
