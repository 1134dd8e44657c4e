mod args;
mod commands;
mod error;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::{CliResult, EXIT_USAGE};

fn run(cli: Cli) -> CliResult<i32> {
    let (global, command) = args::resolve(cli)?;
    let ctx = Context::new(&global)?;
    log::debug!("running {}", command.name());
    match &command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Certify(a) => commands::certify_cmd(&ctx, a),
        Command::Semidi(a) => commands::semidi(&ctx, a),
        Command::Steering(a) => commands::steering(&ctx, a),
        Command::Compton(a) => commands::compton(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::SdpSelftest(a) => commands::sdp_selftest(&ctx, a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    std::process::exit(code);
}
