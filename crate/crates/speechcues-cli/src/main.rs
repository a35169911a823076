use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use speechcues::pipeline::{run_extract, run_report, run_scan, run_words};
use speechcues::PipelineConfig;

/// Batch analytics for timestamped speech corpora: reference-speaker
/// diarization, prosodic descriptors, word frequencies, and weekly trend
/// alignment against daily event series.
#[derive(Parser)]
#[command(name = "speechcues", version, about)]
struct Cli {
    /// `key = value` config file; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for extraction.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deduplicate and filter recording metadata; write the funnel report.
    Scan,
    /// Diarize each recording against its reference segment and extract the
    /// 18-dimensional prosodic descriptor per recording.
    Extract,
    /// Per-bin word-frequency tables and the target-word trajectory.
    Words,
    /// Weekly feature table, event totals, peak sets, and peak alignment.
    Report,
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    config.validate()?;

    match cli.command {
        Command::Scan => {
            let outcome = run_scan(&config)?;
            let r = &outcome.report;
            println!(
                "scan: {} raw -> {} deduped -> {} in range -> {} located",
                r.raw, r.after_dedupe, r.after_date_filter, r.after_location_filter
            );
            if let Some(kappa) = r.annotator_kappa {
                println!("annotator kappa: {kappa}");
            }
        }
        Command::Extract => {
            let outcome = run_extract(&config)?;
            println!(
                "extract: {} feature rows, {} skipped",
                outcome.rows.len(),
                outcome.skips.len()
            );
        }
        Command::Words => {
            run_words(&config)?;
            println!("words: tables written to {}", config.out_dir.display());
        }
        Command::Report => {
            let outcome = run_report(&config)?;
            let a = &outcome.alignment;
            println!(
                "report: {} matched peak pairs, {} unmatched feature peaks, {} unmatched event peaks",
                a.matches.len(),
                a.unmatched_feature.len(),
                a.unmatched_event.len()
            );
            for note in &a.diagnostics {
                println!("note: {note}");
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(error) = run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
