use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use byztree_cli::{execute, Cli, CliError};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let emitted = execute(&cli).and_then(|table| {
        let write = |out: &mut dyn Write| table.write_to(out);
        match &cli.out {
            Some(path) => File::create(path)
                .and_then(|f| {
                    let mut w = BufWriter::new(f);
                    write(&mut w)?;
                    w.flush()
                })
                .map_err(|source| CliError::Io { path: path.clone(), source }),
            None => write(&mut io::stdout().lock()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        }
    });
    match emitted {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
