use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use isoword::config::ToolConfig;
use isoword::eval::{reference, ClassifierKind, ReportRow, SplitMode, SweepLevel, SweepMode, TABLE_II_LEVELS};
use isoword::synth::SynthSpec;
use isoword::workflow::{self, Outcome, RunOptions};

/// Isolated-word speech recognition toolkit.
#[derive(Parser)]
#[command(name = "isoword", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance every clip of a manifest (noise subtraction, normalization, trimming).
    Prepare(IoArgs),
    /// Add pitch-shifted clones of every clip.
    Augment {
        #[command(flatten)]
        io: IoArgs,
        /// Semitone offsets, comma separated; defaults to the config's list.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        semitones: Option<Vec<f64>>,
    },
    /// Compute MFCC feature files.
    Featurize(IoArgs),
    /// Train one model on the training side of a split.
    Train(RunArgs),
    /// Evaluate a saved model, or run the full multi-seed experiment.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Saved model to score instead of training one per seed.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Accuracy as a function of utterances per word.
    Sweep {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, value_enum, default_value = "hmm")]
        classifier: ClassifierArg,
        /// Levels as total:test:train, comma separated; defaults to the published six.
        #[arg(long)]
        levels: Option<String>,
        #[arg(long = "sweep-mode", value_enum, default_value = "pooled")]
        sweep_mode: SweepModeArg,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Combine saved eval reports into one accuracy table.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// report.json files written by `eval`.
        reports: Vec<PathBuf>,
        /// Tabulate the published accuracies instead.
        #[arg(long)]
        published: bool,
    },
    /// Write a synthetic corpus of tone-pattern words.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        words: usize,
        #[arg(long, default_value_t = 10)]
        speakers: usize,
        #[arg(long, default_value_t = 3)]
        takes: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Speaker pitch spread in semitones either side of the base pattern.
        #[arg(long, default_value_t = 2.0)]
        pitch_spread: f64,
        #[arg(long, default_value_t = 20.0)]
        snr_db: f64,
    },
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// JSON config; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SeedArgs {
    /// Number of runs; seeds 1..=N unless --seeds is given.
    #[arg(long)]
    runs: Option<usize>,
    /// Explicit seeds, comma separated; defaults to the config's list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value = "hmm")]
    classifier: ClassifierArg,
    #[arg(long, value_enum, default_value = "speaker-indep")]
    mode: ModeArg,
    /// Add the augmented clones of training clips to training.
    #[arg(long)]
    augment: bool,
    #[command(flatten)]
    seeds: SeedArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Hmm,
    Dnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    SpeakerDep,
    SpeakerIndep,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepModeArg {
    Pooled,
    SpeakerIndep,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Hmm => ClassifierKind::Hmm,
            ClassifierArg::Dnn => ClassifierKind::Dnn,
        }
    }
}

impl From<ModeArg> for SplitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SpeakerDep => SplitMode::SpeakerDependent,
            ModeArg::SpeakerIndep => SplitMode::SpeakerIndependent,
        }
    }
}

impl From<SweepModeArg> for SweepMode {
    fn from(m: SweepModeArg) -> Self {
        match m {
            SweepModeArg::Pooled => SweepMode::Pooled,
            SweepModeArg::SpeakerIndep => SweepMode::SpeakerIndependent,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ToolConfig> {
    match path {
        Some(p) => ToolConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(ToolConfig::default()),
    }
}

fn resolve_seeds(args: &SeedArgs, config: &ToolConfig) -> Result<Vec<u64>> {
    match (&args.seeds, args.runs) {
        (Some(seeds), Some(n)) if seeds.len() != n => {
            bail!("--runs {n} conflicts with {} seeds given by --seeds", seeds.len())
        }
        (Some(seeds), _) if seeds.is_empty() => bail!("--seeds must list at least one seed"),
        (Some(seeds), _) => Ok(seeds.clone()),
        (None, Some(0)) => bail!("--runs must be at least 1"),
        (None, Some(n)) => Ok((1..=n as u64).collect()),
        (None, None) => Ok(config.seeds.clone()),
    }
}

fn run_options(run: &RunArgs, config: &ToolConfig) -> Result<RunOptions> {
    Ok(RunOptions {
        classifier: run.classifier.into(),
        mode: run.mode.into(),
        augment: run.augment,
        seeds: resolve_seeds(&run.seeds, config)?,
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    let outcome = match cli.command {
        Command::Prepare(io) => {
            let config = load_config(io.config.as_deref())?;
            workflow::cmd_prepare(&io.manifest, &io.out, &config)?
        }
        Command::Augment { io, semitones } => {
            let config = load_config(io.config.as_deref())?;
            let semitones = semitones.unwrap_or_else(|| config.augmentation.semitones.clone());
            workflow::cmd_augment(&io.manifest, &io.out, &semitones, &config)?
        }
        Command::Featurize(io) => {
            let config = load_config(io.config.as_deref())?;
            workflow::cmd_featurize(&io.manifest, &io.out, &config)?
        }
        Command::Train(run) => {
            let config = load_config(run.io.config.as_deref())?;
            let opts = run_options(&run, &config)?;
            workflow::cmd_train(&run.io.manifest, &run.io.out, &opts, &config)?
        }
        Command::Eval { run, model } => {
            let config = load_config(run.io.config.as_deref())?;
            let opts = run_options(&run, &config)?;
            workflow::cmd_eval(&run.io.manifest, &run.io.out, model.as_deref(), &opts, &config)?
        }
        Command::Sweep {
            io,
            classifier,
            levels,
            sweep_mode,
            seeds,
        } => {
            let config = load_config(io.config.as_deref())?;
            let levels: Vec<SweepLevel> = match levels {
                Some(text) => isoword::eval::parse_levels(&text)?,
                None => TABLE_II_LEVELS.to_vec(),
            };
            if levels.is_empty() {
                bail!("--levels lists no levels");
            }
            for level in levels.iter().filter(|l| !l.is_consistent()) {
                eprintln!("warning: level {level} has total != test + train");
            }
            let seeds = resolve_seeds(&seeds, &config)?;
            workflow::cmd_sweep(
                &io.manifest,
                &io.out,
                classifier.into(),
                sweep_mode.into(),
                &levels,
                &seeds,
                &config,
            )?
        }
        Command::Report { out, reports, published } => {
            if published {
                let rows: Vec<ReportRow> = reference::TABLE_I
                    .iter()
                    .map(|c| ReportRow {
                        classifier: c.classifier,
                        mode: c.mode,
                        augmented: c.augmented,
                        accuracy: c.accuracy,
                    })
                    .collect();
                workflow::write_table(&rows, &out)?
            } else {
                if reports.is_empty() {
                    bail!("no reports given");
                }
                workflow::cmd_report(&reports, &out)?
            }
        }
        Command::Synth {
            out,
            words,
            speakers,
            takes,
            seed,
            pitch_spread,
            snr_db,
        } => {
            let spec = SynthSpec {
                n_words: words,
                n_speakers: speakers,
                takes,
                seed,
                pitch_spread,
                snr_db,
                ..SynthSpec::default()
            };
            workflow::cmd_synth(&spec, &out)?
        }
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            eprintln!("wrote {} files", outcome.written.len());
            if outcome.is_success() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("failed: {}: {}", f.path, f.reason);
                }
                eprintln!("{} item(s) failed", outcome.failures.len());
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
