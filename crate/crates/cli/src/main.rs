mod args;
mod commands;
mod config;
mod error;
mod imageio;
mod trace;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Denoise(a) => config::resolve(a).and_then(|cfg| commands::denoise(&cfg, false)),
        Command::SpeckleDenoise(a) => {
            config::resolve(a).and_then(|cfg| commands::denoise(&cfg, true))
        }
        Command::AddNoise(a) => commands::add_noise_cmd(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Synth(a) => commands::synth(a),
        Command::Gradcheck(a) => commands::gradcheck_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
