mod args;
mod commands;
mod manifest;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use carbon_ledger::{Error, ErrorClass};
use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use manifest::{CommandOverrides, Settings};

const EXIT_VALIDATION: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

fn overrides(command: &Command) -> CommandOverrides {
    match command {
        Command::Indicators | Command::Tax(_) => CommandOverrides::default(),
        Command::Ledger(a) => CommandOverrides {
            window: a.window.window.clone(),
            totals: a.window.totals.clone(),
            ..Default::default()
        },
        Command::Cumulative(a) => CommandOverrides {
            window: a.window.clone(),
            totals: a.totals.clone(),
            ..Default::default()
        },
        Command::EtsClear(a) => CommandOverrides {
            transfers: a.transfers.clone(),
            positions: a.positions.clone(),
            ..Default::default()
        },
        Command::Simulate(a) => CommandOverrides {
            growth: a.growth.clone(),
            growth_window: a.growth_window.clone(),
            horizon: a.horizon.clone(),
            tax_drag: a.tax_drag,
            tax_abatement: a.tax_abatement,
            tech_rate: a.tech_rate,
            floor: a.floor,
            ..Default::default()
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    let env_out = std::env::var_os("CARBON_LEDGER_OUT").map(Into::into);
    let settings = Settings::resolve(&cli.common, overrides(&cli.command), env_out)?;
    let ctx = Context::load(settings)?;
    match &cli.command {
        Command::Indicators => commands::indicators(&ctx),
        Command::Ledger(a) => commands::ledger(&ctx, a.cumulative),
        Command::Cumulative(_) => commands::cumulative(&ctx),
        Command::Tax(a) => commands::tax(&ctx, a.importer.as_deref().zip(a.exporter.as_deref())),
        Command::EtsClear(_) => commands::ets_clear_cmd(&ctx),
        Command::Simulate(a) => commands::simulate(&ctx, a.mode),
    }
}

fn report(kind: &str, message: String, code: u8) -> ExitCode {
    let record = serde_json::json!({
        "error": kind,
        "message": message,
        "exit_code": code,
    });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            return report("Usage", message.trim_end().to_string(), EXIT_VALIDATION);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}");
            match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
                Some(core) => {
                    let code = match core.class() {
                        ErrorClass::Validation => EXIT_VALIDATION,
                        ErrorClass::Computation => EXIT_COMPUTATION,
                    };
                    report(core.kind(), message, code)
                }
                None => report("InvalidInput", message, EXIT_VALIDATION),
            }
        }
    }
}
