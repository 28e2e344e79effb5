//! Configuration-driven front end for the `ndslab` checks, gallery,
//! theorem suites and counterexample search.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{parse_config, ConfigErrors, Format, GalleryDef, RunConfig, SearchDef, SuiteDef, Syntax};
use run::{emit, Overrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ndslab", version, about = "Horizon-bounded transitivity and mixing checks for non-autonomous systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML, or JSON by `.json` extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every horizon in the run.
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Overrides every basis resolution in the run.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "NDSLAB_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every item of the configuration file.
    Check,
    /// Run gallery examples; all of them when none are named.
    Gallery { ids: Vec<String> },
    /// Run theorem echo suites; all of them when none are named. With
    /// `--config`, the configured systems form the registry.
    Verify { suites: Vec<String> },
    /// Search the toy block family for horizon-limited candidates.
    Search {
        /// `Q1` (multi-transitive, not weakly mixing) or `Q2`
        /// (delta-transitive, not weakly mixing of all orders).
        question: String,
        #[arg(long, default_value_t = 88)]
        budget: usize,
    },
}

fn load(path: &PathBuf) -> Result<RunConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![config::ConfigError { path: String::new(), message: format!("{}: {e}", path.display()) }])
    })?;
    parse_config(&text, Syntax::from_path(path))
}

/// Builds the configuration a command line describes.
pub fn resolve(cli: &Cli) -> Result<RunConfig, ConfigErrors> {
    let base = match &cli.config {
        Some(p) => load(p)?,
        None => RunConfig::default(),
    };
    let config = match &cli.command {
        Command::Check => {
            if cli.config.is_none() {
                return Err(ConfigErrors(vec![config::ConfigError {
                    path: String::new(),
                    message: "`check` needs --config".into(),
                }]));
            }
            base
        }
        Command::Gallery { ids } => {
            let ids: Vec<String> = if ids.is_empty() {
                ndslab::gallery::ExampleId::ALL.iter().map(|e| e.name().to_string()).collect()
            } else {
                ids.clone()
            };
            let gallery = ids
                .into_iter()
                .map(|id| GalleryDef { id, horizon: None, resolution: None, n: None, alpha: None, run_request: None, gap_bound: None })
                .collect();
            RunConfig { gallery, output: base.output, ..RunConfig::default() }
        }
        Command::Verify { suites } => {
            let ids: Vec<String> = if suites.is_empty() {
                ndslab::gallery::TheoremId::ALL.iter().map(|t| t.name().to_string()).collect()
            } else {
                suites.clone()
            };
            let registry = (!base.systems.is_empty()).then(|| base.systems.iter().map(|s| s.name.clone()).collect());
            let suites = ids.into_iter().map(|id| SuiteDef { id, registry: registry.clone(), bounds: Default::default() }).collect();
            RunConfig { systems: base.systems, suites, output: base.output, ..RunConfig::default() }
        }
        Command::Search { question, budget } => RunConfig {
            searches: vec![SearchDef { question: question.clone(), budget: *budget, horizon: 32, resolution: 2 }],
            output: base.output,
            ..RunConfig::default()
        },
    };
    config.validate()?;
    Ok(config)
}

/// Runs a parsed command line; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let config = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error:\n{e}");
            return EXIT_CONFIG;
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("configuration error:\njobs must be ≥ 1");
        return EXIT_CONFIG;
    }
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let overrides = Overrides { horizon: cli.horizon, resolution: cli.resolution };
    let report = match run::run(&config, overrides, jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error:\n{e}");
            return EXIT_CONFIG;
        }
    };
    let format = cli.format.unwrap_or(config.output.format);
    let text = emit(&report, format);
    let out = cli.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));
    let written = match &out {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return EXIT_INTERNAL;
    }
    for item in report.items.iter().filter(|i| i.status == run::ItemStatus::Error) {
        eprintln!("item \"{}\" failed: {}", item.label, item.error.as_deref().unwrap_or(""));
    }
    if report.all_completed() {
        EXIT_OK
    } else {
        EXIT_INTERNAL
    }
}
