//! `ai-lab`: batch runs, scenario validation and the session server.
//!
//! Exit status is 0 on success, 1 on a domain error (reported on stderr as
//! `error: <code>: <message>`) and 2 on a usage error.

mod args;
mod cmd;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{CliResult, Ctx};

fn run(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    let ctx = Ctx::new(cli.global, argv);
    match cli.command {
        Command::Search(a) => cmd::search::run(ctx, a),
        Command::Mdp(c) => cmd::mdp::run(ctx, c),
        Command::Q(c) => cmd::q::run(ctx, c),
        Command::Hmm(c) => cmd::hmm::run(ctx, c),
        Command::Validate(a) => cmd::validate::run(ctx, a),
        Command::Serve(a) => cmd::serve::run(ctx, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
