mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use log::info;

use args::{Cli, Command};
use config::RunConfig;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    let outputs = pool.install(|| match cli.command {
        Command::Gen(a) => commands::gen(a, &cfg),
        Command::Extract(a) => commands::extract(a, &cfg),
        Command::Train(a) => commands::train_cmd(a, &cfg),
        Command::Cascade(a) => commands::cascade_cmd(a, &cfg),
        Command::Eval(a) => commands::eval(a, &cfg),
        Command::Ksweep(a) => commands::ksweep_cmd(a, &cfg),
        Command::Report(a) => commands::report(a, &cfg),
    })?;
    let paths: Vec<_> = outputs.paths().map(|p| p.display().to_string()).collect();
    outputs.commit()?;
    for p in paths {
        info!("wrote {p}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
