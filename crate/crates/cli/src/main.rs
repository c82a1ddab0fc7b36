use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use symflow_cli::{emit_report, load_config, run, Campaign, Command, Format};
use symflow_core::{catalog_entry, FluidParams, CATALOG_IDS};

/// Verification campaigns for the modified shallow-water system.
#[derive(Parser, Debug)]
#[command(name = "symflow", version)]
struct Cli {
    /// Campaign to run.
    #[arg(value_enum, required_unless_present = "list_catalog")]
    command: Option<Command>,
    /// JSON campaign configuration.
    #[arg(long, required_unless_present = "list_catalog")]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report and CSV artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the catalog entry ids and exit.
    #[arg(long)]
    list_catalog: bool,
}

fn list_catalog() {
    let params = FluidParams::default();
    for id in CATALOG_IDS {
        match catalog_entry(id, &params) {
            Ok(e) => println!("{id}\t{}", e.kind),
            Err(_) => println!("{id}"),
        }
    }
}

fn campaign(cli: &Cli) -> anyhow::Result<Campaign> {
    let (Some(command), Some(path)) = (cli.command, cli.config.as_ref()) else {
        bail!("a command and --config are required");
    };
    let mut c = load_config(path, Some(command))?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_catalog {
        list_catalog();
        return ExitCode::SUCCESS;
    }
    let c = match campaign(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = run(&c);
    let written = (|| -> anyhow::Result<()> {
        for format in [Format::Json, Format::CsvSummary] {
            emit_report(&outcome.report, format, &cli.out)
                .with_context(|| format!("writing {}", cli.out.join(format.file_name()).display()))?;
        }
        for (name, body) in &outcome.artifacts {
            let path = cli.out.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let s = outcome.report.summary;
    println!("{}: {} pass, {} flag, {} fail", c.command, s.pass, s.flag, s.fail);
    if outcome.report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
