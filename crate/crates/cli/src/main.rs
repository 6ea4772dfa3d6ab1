//! `tritag`: train, apply and score a trigram-HMM named-entity tagger
//! over word/POS/chunk TSV corpora.
//!
//! Exit codes: 0 success, 2 input parse or I/O failure, 3 degenerate
//! training corpus, 4 model load/decode failure, 5 corpus mismatch
//! during evaluation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tritag::model_file;
use tritag::{
    augment_end_tags, evaluate, parse_ssf, parse_tsv, render_text, render_tsv, tag_corpus,
    tag_corpus_serial, to_tsv, to_tsv_stripped, train, Corpus, DecodeOptions, EmissionMode,
    EndTransition, Error, EvalMode, Lang, NeKind, TrainOptions, TrainedModel,
};

#[derive(Parser)]
#[command(
    name = "tritag",
    version,
    about = "Trigram HMM named-entity tagger for POS-tagged, chunked text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Tsv,
    Ssf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmissionArg {
    /// Divide joint counts by the observation count.
    Paper,
    /// Divide joint counts by the tag count.
    Standard,
}

impl From<EmissionArg> for EmissionMode {
    fn from(arg: EmissionArg) -> Self {
        match arg {
            EmissionArg::Paper => EmissionMode::Posterior,
            EmissionArg::Standard => EmissionMode::Likelihood,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LangArg {
    Bengali,
    English,
    Hindi,
    Marathi,
    Punjabi,
    Tamil,
    Telugu,
}

impl From<LangArg> for Lang {
    fn from(arg: LangArg) -> Self {
        match arg {
            LangArg::Bengali => Lang::Bengali,
            LangArg::English => Lang::English,
            LangArg::Hindi => Lang::Hindi,
            LangArg::Marathi => Lang::Marathi,
            LangArg::Punjabi => Lang::Punjabi,
            LangArg::Tamil => Lang::Tamil,
            LangArg::Telugu => Lang::Telugu,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Exact span matching.
    Span,
    /// Per-token category matching, for diagnostics.
    Token,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a corpus to canonical tagged TSV with B/I/E/O tags.
    ///
    /// End-tag augmentation is applied unless the input already carries
    /// E tags; canonical TSV input round-trips byte-identically.
    Convert {
        /// Input annotation format.
        #[arg(long, value_enum)]
        from: InputFormat,
        /// Input corpus path.
        #[arg(short, long)]
        input: PathBuf,
        /// Output TSV path (written atomically).
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train a model on a tagged TSV corpus and write the model file.
    Train {
        /// Tagged 4-column TSV corpus.
        #[arg(short, long)]
        input: PathBuf,
        /// Model file path (written atomically).
        #[arg(short, long)]
        output: PathBuf,
        /// Language whose tuned maximum suffix length to use.
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        /// Maximum suffix length; overrides --lang (default 9).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        suffix_len: Option<u64>,
        /// Observations at or below this frequency feed the suffix model.
        #[arg(long, default_value_t = tritag::DEFAULT_RARE_MAX)]
        rare_max: u64,
        /// Emission estimate: joint count over observation count
        /// (paper) or over tag count (standard).
        #[arg(long, value_enum, default_value_t = EmissionArg::Paper)]
        emission: EmissionArg,
    },
    /// Tag an untagged 3-column TSV corpus with a trained model.
    Tag {
        /// Trained model file.
        #[arg(short, long)]
        model: PathBuf,
        /// Untagged 3-column TSV corpus.
        #[arg(short, long)]
        input: PathBuf,
        /// Output TSV path (written atomically).
        #[arg(short, long)]
        output: PathBuf,
        /// Emit only the word and NE columns.
        #[arg(long)]
        strip: bool,
        /// Worker threads for decoding; 1 forces the sequential path,
        /// absent uses the default pool. Output bytes are identical
        /// either way.
        #[arg(long)]
        threads: Option<usize>,
        /// Score the sentence-final transition on the last tag alone.
        #[arg(long)]
        bigram_end: bool,
    },
    /// Score a predicted corpus against gold and print the report.
    Eval {
        /// Gold tagged TSV corpus.
        #[arg(long)]
        gold: PathBuf,
        /// Predicted tagged TSV corpus over the same token stream.
        #[arg(long)]
        pred: PathBuf,
        /// Matching granularity.
        #[arg(long, value_enum, default_value_t = ModeArg::Span)]
        mode: ModeArg,
    },
}

/// A diagnostic plus the process exit code it maps to.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code,
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MalformedLine { .. }
        | Error::EmptyCorpus
        | Error::UnbalancedGroup { .. }
        | Error::MissingSentenceDelimiter { .. }
        | Error::MalformedTokenLine { .. }
        | Error::InvalidScheme { .. }
        | Error::OverlappingSpans { .. }
        | Error::SpanOutOfBounds { .. }
        | Error::UntaggedSentence { .. }
        | Error::InvalidInput(_)
        | Error::Io(_) => 2,
        Error::DegenerateCorpus | Error::NoRareWords => 3,
        Error::UnknownTag { .. }
        | Error::UnknownObservation { .. }
        | Error::EmptySentence
        | Error::NoViablePath { .. }
        | Error::ModelFormat { .. }
        | Error::UnsupportedVersion { .. } => 4,
        Error::CorpusMismatch { .. } => 5,
        Error::InSentence { source, .. } => exit_code(source),
    }
}

fn fail(path: &Path, err: &Error) -> Failure {
    Failure::new(exit_code(err), format!("{}: {err}", path.display()))
}

fn read_corpus(path: &Path, format: InputFormat) -> Result<Corpus, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    let parsed = match format {
        InputFormat::Tsv => parse_tsv(&text),
        InputFormat::Ssf => parse_ssf(&text),
    };
    parsed.map_err(|e| fail(path, &e))
}

/// Writes via a temporary file in the target directory plus rename, so a
/// failure never leaves a partial output behind.
fn write_atomic(path: &Path, bytes: &[u8], code: u8) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let attempt = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    attempt().map_err(|e| Failure::new(code, format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<TrainedModel, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| Failure::new(4, format!("{}: {e}", path.display())))?;
    model_file::load(std::io::BufReader::new(file))
        .map_err(|e| Failure::new(4, format!("{}: {e}", path.display())))
}

fn cmd_convert(from: InputFormat, input: &Path, output: &Path) -> Result<(), Failure> {
    let corpus = read_corpus(input, from)?;
    // A corpus already carrying E tags is in final form; re-running the
    // augmentation on it is an error, not an idempotent step.
    let has_end_tags = corpus.sentences().iter().any(|s| {
        s.tags()
            .is_some_and(|tags| tags.iter().any(|t| t.kind() == NeKind::End))
    });
    let converted = if has_end_tags {
        corpus
    } else {
        augment_end_tags(&corpus).map_err(|e| fail(input, &e))?
    };
    write_atomic(output, to_tsv(&converted).as_bytes(), 2)
}

fn cmd_train(
    input: &Path,
    output: &Path,
    opts: &TrainOptions,
) -> Result<(), Failure> {
    let corpus = read_corpus(input, InputFormat::Tsv)?;
    let model = train(&corpus, opts).map_err(|e| fail(input, &e))?;
    let mut serialized = Vec::new();
    model_file::save(&model, &mut serialized)
        .map_err(|e| Failure::new(4, format!("{}: {e}", output.display())))?;
    write_atomic(output, &serialized, 4)?;
    println!("sentences\t{}", corpus.len());
    println!("tokens\t{}", corpus.token_count());
    println!("tags\t{}", model.inventory().len());
    Ok(())
}

fn cmd_tag(
    model_path: &Path,
    input: &Path,
    output: &Path,
    strip: bool,
    threads: Option<usize>,
    bigram_end: bool,
) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let corpus = read_corpus(input, InputFormat::Tsv)?;
    if let Some(i) = corpus.sentences().iter().position(|s| s.is_tagged()) {
        return Err(Failure::new(
            2,
            format!(
                "{}: sentence {i} is already tagged (expected 3-column TSV)",
                input.display()
            ),
        ));
    }
    let opts = DecodeOptions {
        end_transition: if bigram_end {
            EndTransition::Bigram
        } else {
            EndTransition::Trigram
        },
    };
    let tagged = match threads {
        Some(1) => tag_corpus_serial(&model, &corpus, &opts),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::new(2, format!("thread pool: {e}")))?;
            pool.install(|| tag_corpus(&model, &corpus, &opts))
        }
        None => tag_corpus(&model, &corpus, &opts),
    }
    .map_err(|e| fail(input, &e))?;
    let text = if strip {
        to_tsv_stripped(&tagged).map_err(|e| fail(input, &e))?
    } else {
        to_tsv(&tagged)
    };
    write_atomic(output, text.as_bytes(), 2)
}

fn cmd_eval(gold_path: &Path, pred_path: &Path, mode: EvalMode) -> Result<(), Failure> {
    let gold = read_corpus(gold_path, InputFormat::Tsv)?;
    let pred = read_corpus(pred_path, InputFormat::Tsv)?;
    let report = evaluate(&gold, &pred, mode).map_err(|e| fail(pred_path, &e))?;
    print!("{}", render_text(&report));
    println!();
    print!("{}", render_tsv(&report));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Convert {
            from,
            input,
            output,
        } => cmd_convert(from, &input, &output),
        Command::Train {
            input,
            output,
            lang,
            suffix_len,
            rare_max,
            emission,
        } => {
            let opts = TrainOptions {
                emission_mode: emission.into(),
                rare_max,
                suffix_len: suffix_len.map(|n| n as usize),
                lang: lang.map(Lang::from),
            };
            cmd_train(&input, &output, &opts)
        }
        Command::Tag {
            model,
            input,
            output,
            strip,
            threads,
            bigram_end,
        } => cmd_tag(&model, &input, &output, strip, threads, bigram_end),
        Command::Eval { gold, pred, mode } => {
            let mode = match mode {
                ModeArg::Span => EvalMode::Span,
                ModeArg::Token => EvalMode::Token,
            };
            cmd_eval(&gold, &pred, mode)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("tritag: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
