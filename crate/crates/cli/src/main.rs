//! `tbed`: train, apply and evaluate transformation-based taggers.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use tbed::corpus::{
    load_tagset, parse_raw_corpus, parse_tagged_corpus, serialize_tagged_corpus, TaggedCorpus,
    Tagset,
};
use tbed::error::Error;
use tbed::eval::{
    accuracy, cross_validate, learning_curve, render_confusion_csv, render_curve_csv,
    render_report_csv, split_accuracy,
};
use tbed::learner::{train_model, TrainConfig};
use tbed::lexicon::InitialRuleChain;
use tbed::model::{load_model, save_model, ModelError};
use tbed::synth::{generate_synthetic_corpus, SynthSpec};

/// Sentences tagged per batch by `tag`.
const TAG_BATCH: usize = 1024;

#[derive(Parser)]
#[command(
    name = "tbed",
    version,
    about = "Transformation-based error-driven part-of-speech tagger"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a model from a tagged corpus and write it to a directory.
    Train(TrainArgs),
    /// Tag a raw corpus (one whitespace-tokenised sentence per line).
    Tag(TagArgs),
    /// Measure a model's accuracy against a gold corpus.
    Eval(EvalArgs),
    /// k-fold cross-validation on a tagged corpus.
    Crossval(CrossvalArgs),
    /// Cross-validation over growing corpus prefixes.
    Curve(CurveArgs),
    /// Generate a synthetic tagged corpus and its tagset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Tagged corpus, one `word/TAG` sentence per line.
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Tagset configuration file.
    #[arg(long, value_name = "PATH")]
    tagset: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Minimum net score for a rule to be accepted.
    #[arg(long, default_value_t = 2, value_name = "N")]
    threshold: u64,
    /// Seed for every shuffle and split.
    #[arg(long, default_value_t = 0, value_name = "N")]
    seed: u64,
    /// Share of training sentences that build the guess lexicon.
    #[arg(long, default_value_t = 0.5, value_name = "F")]
    lexicon_split: f64,
    /// Longest affix considered by lexical rules, in characters.
    #[arg(long, default_value_t = 4, value_name = "N")]
    max_affix_len: usize,
    /// Cap on rules learned per phase (unlimited when absent).
    #[arg(long, value_name = "N")]
    max_rules: Option<usize>,
}

impl LearnArgs {
    fn config(&self) -> Result<TrainConfig, Error> {
        let config = TrainConfig {
            score_threshold: self.threshold,
            max_rules_per_phase: self.max_rules,
            lexicon_split_fraction: self.lexicon_split,
            max_affix_len: self.max_affix_len,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// Model directory to create or replace.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    learn: LearnArgs,
    /// Write one line per accepted rule: `phase iteration rule net errors_remaining`.
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct TagArgs {
    /// Model directory written by `train`.
    #[arg(long, value_name = "DIR")]
    model: PathBuf,
    /// Raw input corpus.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Tagged output corpus.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Model directory written by `train`.
    #[arg(long, value_name = "DIR")]
    model: PathBuf,
    /// Gold tagged corpus; its words are re-tagged by the model.
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    /// Score this tagged corpus instead of tagging the gold words.
    #[arg(long, value_name = "PATH")]
    predicted: Option<PathBuf>,
    /// Confusion counts CSV [default: <gold>.confusion.csv].
    #[arg(long, value_name = "PATH")]
    confusion: Option<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// Number of folds.
    #[arg(long, default_value_t = 10, value_name = "N")]
    k: usize,
    #[command(flatten)]
    learn: LearnArgs,
    /// Report CSV.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Folds evaluated in parallel; output does not depend on it.
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    input: CorpusArgs,
    /// Strictly ascending corpus sizes in words, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_name = "W1,W2,...")]
    sizes: Vec<usize>,
    /// Number of folds.
    #[arg(long, default_value_t = 10, value_name = "N")]
    k: usize,
    #[command(flatten)]
    learn: LearnArgs,
    /// Curve CSV.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Folds evaluated in parallel; output does not depend on it.
    #[arg(long, default_value_t = 1, value_name = "N")]
    jobs: usize,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator settings, one `key value` per line.
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Tagged corpus output.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Tagset output [default: <out>.tagset].
    #[arg(long, value_name = "PATH")]
    tagset_out: Option<PathBuf>,
}

/// Failure classes, one exit code each.
#[derive(Debug)]
enum Failure {
    /// Bad flags, input formats or models: exit 2.
    Config(String),
    /// Unreadable or unwritable files: exit 3.
    Io(String),
    /// Corpora that do not fit the operation: exit 4.
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Data(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Data(m) => m,
        }
    }

    fn in_file(path: &Path, e: Error) -> Failure {
        Failure::from(e).prefixed(&path.display().to_string())
    }

    fn prefixed(self, prefix: &str) -> Failure {
        match self {
            Failure::Config(m) => Failure::Config(format!("{prefix}: {m}")),
            Failure::Io(m) => Failure::Io(format!("{prefix}: {m}")),
            Failure::Data(m) => Failure::Data(format!("{prefix}: {m}")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Alignment { .. } | Error::TooSmall(_) => Failure::Data(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

/// Reading a model: a missing or malformed file means an invalid model.
fn model_failure(dir: &Path, e: ModelError) -> Failure {
    Failure::Config(format!("invalid model {}: {e}", dir.display()))
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_corpus(args: &CorpusArgs) -> Result<TaggedCorpus, Failure> {
    let tagset = read_tagset(&args.tagset)?;
    parse_tagged_corpus(&read(&args.corpus)?, tagset).map_err(|e| Failure::in_file(&args.corpus, e))
}

fn read_tagset(path: &Path) -> Result<Arc<Tagset>, Failure> {
    Ok(Arc::new(
        load_tagset(&read(path)?).map_err(|e| Failure::in_file(path, e))?,
    ))
}

fn train(args: TrainArgs) -> Outcome {
    let config = args.learn.config()?;
    let corpus = load_corpus(&args.input)?;
    if corpus.is_empty() {
        return Err(Failure::Data(format!(
            "{}: corpus is empty",
            args.input.corpus.display()
        )));
    }
    let chain = InitialRuleChain::greek();
    let training = train_model(&corpus, &chain, &config)?;
    let model = &training.model;
    if let Some(log) = &args.log {
        let text: String = training.log_lines().map(|l| l + "\n").collect();
        write(log, &text)?;
    }
    save_model(&args.out, model, &config).map_err(|e| Failure::Io(e.to_string()))?;
    let tagged = model.tag(&corpus.untagged());
    let acc = accuracy(&tagged, &corpus)?;
    println!("tokens {}", corpus.word_count());
    println!("lexical_rules {}", model.lexical_rules().len());
    println!("contextual_rules {}", model.contextual_rules().len());
    println!("training_accuracy {:.6}", acc.fraction());
    Ok(())
}

fn tag(args: TagArgs) -> Outcome {
    let (model, _) = load_model(&args.model).map_err(|e| model_failure(&args.model, e))?;
    let io_in = |e: io::Error| Failure::Io(format!("{}: {e}", args.input.display()));
    let io_out = |e: io::Error| Failure::Io(format!("{}: {e}", args.out.display()));
    let input = fs::File::open(&args.input).map_err(io_in)?;
    let mut out = BufWriter::new(fs::File::create(&args.out).map_err(io_out)?);
    // Each word type's lexical-stage tag depends only on the word, so
    // tagging in batches gives the same output as tagging the whole file.
    let mut lines = BufReader::new(input).lines();
    loop {
        let mut batch = String::new();
        let mut n = 0;
        for line in lines.by_ref() {
            let line = line.map_err(io_in)?;
            batch.push_str(&line);
            batch.push('\n');
            n += 1;
            if n == TAG_BATCH {
                break;
            }
        }
        if n == 0 {
            break;
        }
        let tagged = model.tag(&parse_raw_corpus(&batch));
        out.write_all(serialize_tagged_corpus(&tagged).as_bytes())
            .map_err(io_out)?;
    }
    out.flush().map_err(io_out)
}

fn eval(args: EvalArgs) -> Outcome {
    let (model, _) = load_model(&args.model).map_err(|e| model_failure(&args.model, e))?;
    let tagset = model.tagset().clone();
    let gold = parse_tagged_corpus(&read(&args.gold)?, tagset.clone())
        .map_err(|e| Failure::in_file(&args.gold, e))?;
    let predicted = match &args.predicted {
        Some(path) => parse_tagged_corpus(&read(path)?, tagset.clone())
            .map_err(|e| Failure::in_file(path, e))?,
        None => model.tag(&gold.untagged()),
    };
    let acc = accuracy(&predicted, &gold)?;
    let (known, unknown) = split_accuracy(&predicted, &gold, model.lexicon())?;
    let confusion = args.confusion.unwrap_or_else(|| {
        let mut name = args.gold.clone().into_os_string();
        name.push(".confusion.csv");
        PathBuf::from(name)
    });
    write(&confusion, &render_confusion_csv(&acc, &tagset))?;
    println!("accuracy {:.6}", acc.fraction());
    println!("tokens {}", acc.total);
    for (name, part) in [("known", &known), ("unknown", &unknown)] {
        let value = if part.total == 0 {
            "n/a".to_owned()
        } else {
            format!("{:.6}", part.fraction())
        };
        println!("{name}_accuracy {value} ({} tokens)", part.total);
    }
    Ok(())
}

fn crossval(args: CrossvalArgs) -> Outcome {
    let config = args.learn.config()?;
    let corpus = load_corpus(&args.input)?;
    let chain = InitialRuleChain::greek();
    let report = cross_validate(&corpus, args.k, &config, &chain, args.learn.seed, args.jobs)?;
    write(&args.out, &render_report_csv(&report))?;
    println!(
        "mean_accuracy {:.6} stddev {:.6} baseline {:.6}",
        report.mean_accuracy, report.stddev_accuracy, report.mean_baseline_accuracy
    );
    Ok(())
}

fn curve(args: CurveArgs) -> Outcome {
    let config = args.learn.config()?;
    let corpus = load_corpus(&args.input)?;
    let chain = InitialRuleChain::greek();
    let rows = learning_curve(
        &corpus,
        &args.sizes,
        args.k,
        &config,
        &chain,
        args.learn.seed,
        args.jobs,
    )?;
    write(&args.out, &render_curve_csv(&rows))?;
    for row in &rows {
        println!(
            "{} words: accuracy {:.6}, rules {:.1} lexical + {:.1} contextual",
            row.corpus_words,
            row.report.mean_accuracy,
            row.report.mean_lexical_rules,
            row.report.mean_contextual_rules
        );
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Outcome {
    let spec = SynthSpec::parse(&read(&args.spec)?).map_err(|e| Failure::in_file(&args.spec, e))?;
    let corpus = generate_synthetic_corpus(&spec)?;
    let tagset_out = args.tagset_out.unwrap_or_else(|| {
        let mut name = args.out.clone().into_os_string();
        name.push(".tagset");
        PathBuf::from(name)
    });
    write(&args.out, &serialize_tagged_corpus(&corpus))?;
    write(&tagset_out, &corpus.tagset().to_config())?;
    println!("sentences {} tokens {}", corpus.len(), corpus.word_count());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => train(a),
        Command::Tag(a) => tag(a),
        Command::Eval(a) => eval(a),
        Command::Crossval(a) => crossval(a),
        Command::Curve(a) => curve(a),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tbed: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
