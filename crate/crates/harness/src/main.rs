use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blockpf_harness::catalog;
use blockpf_harness::experiment::grid;
use blockpf_harness::output::{sidecar_path, write_outputs};
use blockpf_harness::{run_table, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(
    name = "blockpf",
    version,
    about = "Block-adaptive particle filter experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV table.
    Run {
        /// Config file, or the name of a bundled experiment.
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Output CSV path (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled experiments.
    ListExperiments,
    /// Print the resolved configuration and grid.
    Describe {
        #[arg(long)]
        config: String,
    },
}

fn load(config: &str) -> Result<ExperimentConfig, HarnessError> {
    let path = PathBuf::from(config);
    let text = if path.is_file() {
        std::fs::read_to_string(&path).map_err(|source| HarnessError::Io { path, source })?
    } else if let Some(b) = catalog::find(config) {
        b.text.to_string()
    } else {
        return Err(HarnessError::NotFound(config.to_string()));
    };
    Ok(ExperimentConfig::parse(&text)?)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            runs,
            out,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if out.is_some() {
                cfg.output = out;
            }
            let path = cfg
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name)));
            cfg.output = Some(path.clone());
            let table = run_table(&cfg)?;
            write_outputs(&cfg, &table, &path)?;
            eprintln!(
                "wrote {} rows to {} ({})",
                table.rows.len(),
                path.display(),
                sidecar_path(&path).display()
            );
        }
        Command::ListExperiments => {
            for b in catalog::EXPERIMENTS {
                let cfg = ExperimentConfig::parse(b.text)?;
                println!("{:<8} {}", b.name, cfg.description);
            }
        }
        Command::Describe { config } => {
            let cfg = load(&config)?;
            print!("{}", cfg.to_text());
            let cells = grid(&cfg);
            println!("# grid: {} cells x {} runs", cells.len(), cfg.runs);
            for (i, c) in cells.iter().enumerate() {
                println!(
                    "# cell {i}: M={} K={} W={}",
                    c.variants().join("|"),
                    c.k(),
                    c.w()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
