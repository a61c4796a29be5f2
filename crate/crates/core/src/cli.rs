//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 runtime
//! (I/O) error. Diagnostics go to stderr; data goes to files or stdout.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{
    build_flatfile, read_flatfile_path, tokenize_text, word_length, CorpusError, EntityTable,
    Preparation, TagsetMapping,
};
use crate::eval::{evaluate, split_corpus, EvalError};
use crate::kb::{KbError, KnowledgeBase, LengthKey, DEFAULT_MAX_WINDOW};
use crate::tagger::{tag_sentence, Mode, TagError, TaggingConfig, DEFAULT_REFINE_ITERS};

#[derive(Debug, Parser)]
#[command(
    name = "lentag",
    version,
    about = "Part-of-speech tagging from word lengths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert SUSANNE sources into a flatfile corpus
    Prepare {
        /// Directory of SUSANNE files
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated genre letters
        #[arg(long, default_value = "A,G,J")]
        genres: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        conversion: ConversionArgs,
        /// Write the conversion report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert SUSANNE sources into disjoint train and test flatfiles
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "A,G,J")]
        train_genres: String,
        #[arg(long, default_value = "N")]
        test_genres: String,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
        #[command(flatten)]
        conversion: ConversionArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build a knowledge base from flatfile corpora
    Train {
        /// Flatfile corpus; may be repeated
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_WINDOW)]
        max_window: usize,
        /// Also build the context index used by multi-pass tagging
        #[arg(long)]
        context: bool,
    },
    /// Print knowledge base statistics as JSON
    KbStats { kb: PathBuf },
    /// Tag length sequences or raw text
    Tag {
        #[arg(long)]
        kb: PathBuf,
        /// Colon-joined word lengths, e.g. 3:6:6; may be repeated
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        lengths: Vec<String>,
        /// Raw text, one sentence per line
        #[arg(long)]
        text: Option<String>,
        #[command(flatten)]
        tagging: TaggingArgs,
        /// Append tag/source pairs to each line
        #[arg(long)]
        verbose: bool,
    },
    /// Tag a held-out flatfile and report accuracy
    Eval {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Write the report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        tagging: TaggingArgs,
    },
}

#[derive(Debug, Args)]
struct ConversionArgs {
    /// Tagset mapping TSV, or "default"
    #[arg(long, default_value = "default")]
    mapping: String,
    /// Entity table TSV, or "default"
    #[arg(long, default_value = "default")]
    entities: String,
    /// Emit `TAG:LEN:` records without surfaces
    #[arg(long)]
    no_surfaces: bool,
}

#[derive(Debug, Args)]
struct TaggingArgs {
    /// single or multi
    #[arg(long, default_value = "single")]
    mode: Mode,
    /// Largest window to query; defaults to the knowledge base's
    #[arg(long)]
    max_window: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_REFINE_ITERS)]
    refine_iters: usize,
}

impl TaggingArgs {
    fn config(&self, kb: &KnowledgeBase) -> TaggingConfig {
        TaggingConfig {
            max_window: self.max_window.unwrap_or(kb.max_window()),
            mode: self.mode,
            max_refine_iters: self.refine_iters,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        if e.is_io() {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        if e.is_io() {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<TagError> for Failure {
    fn from(e: TagError) -> Self {
        match e {
            TagError::WindowTooLarge { .. } | TagError::ZeroWindow => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Corpus(c) => c.into(),
            EvalError::Tag(t) => t.into(),
            EvalError::Overlap(_) => Failure::Usage(e.to_string()),
            EvalError::EmptyTest => Failure::Data(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Runs the CLI with `args` (including the program name), writing data
/// output to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn parse_genres(s: &str) -> Result<BTreeSet<char>, Failure> {
    let mut set = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let mut chars = part.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() => {
                set.insert(c);
            }
            _ => return Err(Failure::Usage(format!("bad genre {part:?}"))),
        }
    }
    if set.is_empty() {
        return Err(Failure::Usage("no genres given".into()));
    }
    Ok(set)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn preparation(args: &ConversionArgs, genres: BTreeSet<char>) -> Result<Preparation, Failure> {
    let mapping = match args.mapping.as_str() {
        "default" => TagsetMapping::builtin(),
        path => TagsetMapping::from_tsv(&read_text(Path::new(path))?)?,
    };
    let entities = match args.entities.as_str() {
        "default" => EntityTable::builtin(),
        path => EntityTable::from_tsv(&read_text(Path::new(path))?)?,
    };
    Ok(Preparation {
        mapping,
        entities,
        genres,
        keep_surfaces: !args.no_surfaces,
    })
}

fn emit_json<T: Serialize>(
    value: &T,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Runtime(format!("serializing report: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("stdout: {e}"))),
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Prepare {
            input,
            genres,
            out: flat,
            conversion,
            report,
        } => {
            let prep = preparation(&conversion, parse_genres(&genres)?)?;
            let r = build_flatfile(&input, &prep, &flat)?;
            eprintln!(
                "wrote {} tokens in {} sentences to {}",
                r.tokens,
                r.sentences,
                flat.display()
            );
            emit_json(&r, report.as_deref(), out)
        }
        Command::Split {
            input,
            train_genres,
            test_genres,
            train_out,
            test_out,
            conversion,
            report,
        } => {
            let train_genres = parse_genres(&train_genres)?;
            let test_genres = parse_genres(&test_genres)?;
            let prep = preparation(&conversion, BTreeSet::new())?;
            let (train, test) = split_corpus(
                &input,
                &prep,
                &train_genres,
                &test_genres,
                &train_out,
                &test_out,
            )?;
            eprintln!(
                "train: {} tokens, test: {} tokens",
                train.tokens, test.tokens
            );
            emit_json(
                &serde_json::json!({ "train": train, "test": test }),
                report.as_deref(),
                out,
            )
        }
        Command::Train {
            corpus,
            out: kb_path,
            max_window,
            context,
        } => {
            if max_window == 0 {
                return Err(Failure::Usage("--max-window must be positive".into()));
            }
            let mut sentences = Vec::new();
            for path in &corpus {
                sentences.extend(read_flatfile_path(path)?);
            }
            let kb = KnowledgeBase::train(&sentences, max_window, context);
            kb.save_path(&kb_path)?;
            eprintln!(
                "indexed {} sentences into {}",
                sentences.len(),
                kb_path.display()
            );
            Ok(())
        }
        Command::KbStats { kb } => {
            let kb = KnowledgeBase::load_path(&kb)?;
            emit_json(&kb.stats(), None, out)
        }
        Command::Tag {
            kb,
            lengths,
            text,
            tagging,
            verbose,
        } => {
            let kb = KnowledgeBase::load_path(&kb)?;
            let cfg = tagging.config(&kb);
            let sentences: Vec<Vec<u32>> = match text {
                Some(text) => text
                    .lines()
                    .map(tokenize_text)
                    .filter(|toks| !toks.is_empty())
                    .map(|toks| {
                        toks.iter()
                            .map(|t| word_length(t))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?,
                None => lengths
                    .iter()
                    .map(|l| {
                        l.parse::<LengthKey>()
                            .map(|k| k.lengths().to_vec())
                            .map_err(Failure::Usage)
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mut buf = String::new();
            for lengths in &sentences {
                let decisions = tag_sentence(&kb, lengths, &cfg)?;
                let tags: Vec<&str> = decisions.iter().map(|d| d.tag.name()).collect();
                buf.push_str(&tags.join(" "));
                if verbose {
                    let pairs: Vec<String> = decisions
                        .iter()
                        .map(|d| format!("{}/{}", d.tag, d.source))
                        .collect();
                    buf.push('\t');
                    buf.push_str(&pairs.join(" "));
                }
                buf.push('\n');
            }
            out.write_all(buf.as_bytes())
                .map_err(|e| Failure::Runtime(format!("stdout: {e}")))
        }
        Command::Eval {
            kb,
            test,
            report,
            tagging,
        } => {
            let kb = KnowledgeBase::load_path(&kb)?;
            let cfg = tagging.config(&kb);
            let test = read_flatfile_path(&test)?;
            let r = evaluate(&kb, &test, &cfg)?;
            eprintln!(
                "{} of {} tokens correct ({}%)",
                r.correct,
                r.total,
                r.accuracy_pct()
            );
            emit_json(&r.to_json(), report.as_deref(), out)
        }
    }
}
