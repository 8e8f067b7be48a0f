//! `corpusalign`: one subcommand per pipeline stage. Each stage reads files,
//! writes `<output_dir>/<stage>/` atomically, and records its resolved
//! config there as `config.json`.
//!
//! Exit codes: 0 success, 1 validation or config error, 2 data error,
//! 3 internal error.

mod commands;
mod config;
mod inputs;
mod stage;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use corpusalign_core::aligner::{AlignError, SearchMethod};
use corpusalign_core::manifest::ManifestError;
use corpusalign_core::pairing::PairError;
use corpusalign_core::refinement::RefineError;
use corpusalign_core::segmenter::SegmentError;
use corpusalign_core::sim_transcriber::TranscriberError;
use corpusalign_core::text_norm::NormError;

use config::RunConfig;

/// Invalid configuration, flags or rule files.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser, Debug)]
#[command(name = "corpusalign", version, about = "Build aligned speech corpora from long recordings and human transcripts")]
struct Cli {
    /// JSON run config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    cer_threshold: Option<f64>,
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    /// Output directory; each stage writes into a subdirectory named after it.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    #[arg(long, global = true)]
    regions: Option<PathBuf>,
    #[arg(long, global = true)]
    segments: Option<PathBuf>,
    #[arg(long, global = true)]
    hypotheses: Option<PathBuf>,
    #[arg(long, global = true)]
    transcripts: Option<PathBuf>,
    #[arg(long, global = true)]
    audio_meta: Option<PathBuf>,
    #[arg(long, global = true)]
    transcript_meta: Option<PathBuf>,
    #[arg(long, global = true)]
    pairs: Option<PathBuf>,
    #[arg(long, global = true)]
    pool: Option<PathBuf>,
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a text file line by line with a rule set.
    Normalize,
    /// Cut speech regions into bounded segments.
    Segment,
    /// Pair audio sessions with transcripts by metadata.
    Pair,
    /// Find the best transcript span for every segment hypothesis.
    Align {
        /// Score every candidate span instead of the coarse-to-fine search.
        #[arg(long)]
        exhaustive: bool,
        /// Only search after the previous retained match.
        #[arg(long)]
        monotone: bool,
    },
    /// Iterative re-alignment with an improving simulated recognizer.
    Refine {
        #[arg(long)]
        max_passes: Option<usize>,
        #[arg(long)]
        min_relative_gain: Option<f64>,
    },
    /// Corpus statistics for a manifest.
    Stats,
    /// Keep manifest records matching every given condition.
    Filter {
        #[arg(long)]
        max_cer: Option<f64>,
        #[arg(long)]
        min_duration: Option<f64>,
        #[arg(long)]
        max_duration: Option<f64>,
        #[arg(long)]
        min_quality: Option<f64>,
        #[arg(long)]
        language: Option<String>,
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        date_from: Option<String>,
        #[arg(long)]
        date_to: Option<String>,
    },
    /// Session-atomic train/test split of a manifest.
    Split,
    /// Generate a synthetic corpus (regions, transcripts, metadata, hypotheses, pool).
    Synth {
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long)]
        minutes: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
    },
}

fn parse_date(raw: &str) -> Result<NaiveDate> {
    raw.parse().map_err(|e| ConfigError(format!("invalid date `{raw}`: {e}")).into())
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(t) = cli.cer_threshold {
        cfg.align.cer_threshold = t;
    }
    if let Some(f) = cli.train_fraction {
        cfg.split.train_fraction = f;
    }
    let p = &mut cfg.paths;
    if let Some(o) = &cli.out {
        p.output_dir = o.clone();
    }
    for (flag, slot) in [
        (&cli.input, &mut p.input),
        (&cli.rules, &mut p.rules),
        (&cli.regions, &mut p.regions),
        (&cli.segments, &mut p.segments),
        (&cli.hypotheses, &mut p.hypotheses),
        (&cli.transcripts, &mut p.transcripts),
        (&cli.audio_meta, &mut p.audio_meta),
        (&cli.transcript_meta, &mut p.transcript_meta),
        (&cli.pairs, &mut p.pairs),
        (&cli.pool, &mut p.pool),
        (&cli.manifest, &mut p.manifest),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    match &cli.command {
        Command::Align { exhaustive, monotone } => {
            if *exhaustive {
                cfg.align.method = SearchMethod::Exhaustive;
            }
            cfg.align.monotone |= *monotone;
        }
        Command::Refine { max_passes, min_relative_gain } => {
            if let Some(n) = max_passes {
                cfg.refine.max_passes = *n;
            }
            if let Some(g) = min_relative_gain {
                cfg.refine.min_relative_gain = *g;
            }
        }
        Command::Filter { max_cer, min_duration, max_duration, min_quality, language, source, date_from, date_to } => {
            let f = &mut cfg.filter;
            f.max_cer = max_cer.or(f.max_cer);
            f.min_duration = min_duration.or(f.min_duration);
            f.max_duration = max_duration.or(f.max_duration);
            f.min_quality = min_quality.or(f.min_quality);
            if language.is_some() {
                f.language.clone_from(language);
            }
            if source.is_some() {
                f.source.clone_from(source);
            }
            if let Some(d) = date_from {
                f.date_from = Some(parse_date(d)?);
            }
            if let Some(d) = date_to {
                f.date_to = Some(parse_date(d)?);
            }
        }
        Command::Synth { sessions, minutes, noise } => {
            let s = &mut cfg.synth;
            s.sessions = sessions.unwrap_or(s.sessions);
            s.minutes = minutes.unwrap_or(s.minutes);
            s.noise = noise.unwrap_or(s.noise);
        }
        _ => {}
    }
    cfg.resolve()
}

fn run(cli: &Cli) -> Result<PathBuf> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Normalize => commands::normalize(&cfg),
        Command::Segment => commands::segment(&cfg),
        Command::Pair => commands::pair(&cfg),
        Command::Align { .. } => commands::align(&cfg),
        Command::Refine { .. } => commands::refine_cmd(&cfg),
        Command::Stats => commands::stats_cmd(&cfg),
        Command::Filter { .. } => commands::filter_cmd(&cfg),
        Command::Split => commands::split_cmd(&cfg),
        Command::Synth { .. } => commands::synth(&cfg),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 1;
        }
        let config = match cause {
            c if c.is::<NormError>() => !matches!(c.downcast_ref(), Some(NormError::NonConvergent)),
            c if c.is::<AlignError>() => matches!(c.downcast_ref(), Some(AlignError::Params(_))),
            c if c.is::<SegmentError>() => matches!(c.downcast_ref(), Some(SegmentError::Params(_))),
            c if c.is::<RefineError>() => {
                matches!(c.downcast_ref(), Some(RefineError::Config(_) | RefineError::Align(AlignError::Params(_))))
            }
            c if c.is::<ManifestError>() => matches!(c.downcast_ref(), Some(ManifestError::Fraction(_))),
            c if c.is::<PairError>() => matches!(c.downcast_ref(), Some(PairError::Weights(_))),
            c if c.is::<TranscriberError>() => matches!(c.downcast_ref(), Some(TranscriberError::Config(_))),
            _ => false,
        };
        if config {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(_)) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}
