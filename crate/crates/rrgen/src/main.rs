use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rrgen::pipeline::{self, ReportLine, Split};
use rrgen::{RunConfig, RunResult};

#[derive(Parser)]
#[command(name = "rrgen", version, about = "Review response generation")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Valid,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Valid => Split::Valid,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, split, build the vocabulary and annotate.
    Preprocess,
    /// Train the model and write checkpoints.
    Train,
    /// Generate responses for a split.
    Generate {
        /// Defaults to `<output_dir>/checkpoints/best.ckpt`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Also write per-response attention weights.
        #[arg(long)]
        dump_attention: bool,
    },
    /// Score generated responses against a split's references.
    Evaluate {
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Hypothesis file; defaults to `generated-<split>.txt`.
        #[arg(long)]
        responses: Option<PathBuf>,
    },
    /// Random training response for every review.
    BaselineRandom {
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Nearest-neighbour response retrieval.
    BaselineNngen {
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Corpus BLEU between two files of tokenized lines.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
}

fn load(cli: &Cli) -> RunResult<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| rrgen::RunError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn report(r: &ReportLine) {
    println!("{}", r.json());
    eprintln!("{}", r.table());
}

fn run(cli: Cli) -> RunResult<()> {
    match &cli.command {
        Command::Preprocess => {
            let s = pipeline::preprocess(&load(&cli)?)?;
            println!("{}", serde_json::to_string(&s).expect("summary serializes"));
        }
        Command::Train => {
            let s = pipeline::train(&load(&cli)?)?;
            println!("{}", serde_json::to_string(&s).expect("summary serializes"));
        }
        Command::Generate {
            checkpoint,
            split,
            dump_attention,
        } => {
            let rows = pipeline::generate(&load(&cli)?, checkpoint.as_deref(), (*split).into(), *dump_attention)?;
            let flagged = rows.iter().filter(|r| r.requires_check).count();
            println!("{{\"generated\":{},\"requires_check\":{flagged}}}", rows.len());
        }
        Command::Evaluate { split, responses } => {
            report(&pipeline::evaluate(
                &load(&cli)?,
                (*split).into(),
                responses.as_deref(),
            )?);
        }
        Command::BaselineRandom { split } => report(&pipeline::baseline_random(&load(&cli)?, (*split).into())?),
        Command::BaselineNngen { split } => report(&pipeline::baseline_nngen(&load(&cli)?, (*split).into())?),
        Command::Bleu { hyp, reference } => {
            let h = pipeline::read_token_lines(hyp)?;
            let r = pipeline::read_token_lines(reference)?;
            report(&pipeline::bleu_between(&h, &r)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
