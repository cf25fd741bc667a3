use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use textnet::pipeline::{
    export_plots, run_attribution, run_baseline, run_without_mds, write_synthetic_corpus, RunConfig, RunOutcome,
    SyntheticConfig, SyntheticMode,
};
use textnet::{Error, Result};

/// Authorship attribution from word co-occurrence networks.
#[derive(Parser)]
#[command(name = "textnet", version)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Network method with MDS and without; writes the joint report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Only classify the concatenated distance rows.
        #[arg(long)]
        no_mds: bool,
    },
    /// TF-IDF cosine baseline through the same MDS and classifiers.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Plot data and SVGs from the outputs of earlier runs.
    ExportPlots {
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic labeled corpus and its manifest.
    GenSynthetic(SyntheticArgs),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus manifest (CSV: author,document_id,path).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override any config key, e.g. `--set metrics=degree,betweenness`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SyntheticArgs {
    /// Directory for `manifest.csv` and `texts/`.
    #[arg(long)]
    out: PathBuf,
    /// `vocabulary` (partly private vocabularies) or `ordering` (shared
    /// vocabulary, author-specific collocations).
    #[arg(long, default_value = "vocabulary")]
    mode: SyntheticMode,
    #[arg(long, default_value_t = 8)]
    authors: usize,
    #[arg(long, default_value_t = 10)]
    documents: usize,
    #[arg(long, default_value_t = 20_000)]
    tokens: usize,
    #[arg(long, default_value_t = 2_000)]
    vocabulary: usize,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, default_value_t = 0.5)]
    binding_rate: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    let cwd = Path::new(".");
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set {o}: expected KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim(), cwd)?;
    }
    if let Some(m) = &common.manifest {
        cfg.manifest = Some(m.clone());
    }
    if let Some(o) = &common.output_dir {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(cfg: &RunConfig, outcome: &RunOutcome) {
    match std::fs::read_to_string(cfg.output_dir.join("report.txt")) {
        Ok(text) => print!("{text}"),
        Err(_) => {
            for r in &outcome.summary.rows {
                println!("{} {} {:.4}", r.method, r.classifier, r.accuracy);
            }
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { common, no_mds } => {
            let cfg = resolve(&common)?;
            let outcome = if no_mds {
                run_without_mds(&cfg)?
            } else {
                run_attribution(&cfg)?
            };
            print_report(&cfg, &outcome);
        }
        Command::Baseline { common } => {
            let cfg = resolve(&common)?;
            let outcome = run_baseline(&cfg)?;
            print_report(&cfg, &outcome);
        }
        Command::ExportPlots { common } => {
            let cfg = resolve(&common)?;
            let files = export_plots(&cfg)?;
            println!("wrote {} files under {}", files.len(), cfg.output_dir.join("plots").display());
        }
        Command::GenSynthetic(a) => {
            let cfg = SyntheticConfig {
                authors: a.authors,
                documents_per_author: a.documents,
                tokens_per_document: a.tokens,
                vocabulary_size: a.vocabulary,
                overlap: a.overlap,
                binding_rate: a.binding_rate,
                mode: a.mode,
                seed: a.seed,
                ..Default::default()
            };
            let manifest = write_synthetic_corpus(&cfg, &a.out)?;
            println!(
                "wrote {} documents; manifest {}",
                manifest.entries.len(),
                a.out.join("manifest.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
