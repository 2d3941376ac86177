mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> cislunar_core::Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| cislunar_core::Error::InvalidParameter(format!("--jobs: {e}")))?;
    }
    let root = cli.out_root.as_path();
    match &cli.command {
        Command::Linkbudget(a) => commands::linkbudget(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Generate(a) => commands::generate(a, root),
        Command::Train(a) => commands::train(a, root),
        Command::Eval(a) => commands::evaluate(a, root),
        Command::Reproduce(a) => commands::reproduce(a, root),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one line: `error[<kind>]: <message>`
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
