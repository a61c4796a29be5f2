//! Corpus preparation: SUSANNE ingestion and the length-annotated flatfile.
//!
//! The pipeline is markup conversion, field reduction, tagset simplification
//! and a per-token length field. The output is a colon-delimited flatfile
//! with one token per line and a blank line between sentences:
//!
//! ```text
//! Det:3:"The"
//! N:6:"Fulton"
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

const DEFAULT_MAPPING_TSV: &str = include_str!("../data/default_mapping.tsv");
const DEFAULT_ENTITIES_TSV: &str = include_str!("../data/default_entities.tsv");

/// Replacement for entities missing from the entity table.
pub const UNKNOWN_ENTITY_REPLACEMENT: &str = "?";

/// Fine tags that mark non-lexical material (minor breaks, ghost nodes).
pub const NON_LEXICAL_TAGS: &[&str] = &["YB", "YG"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected at least 6 fields, found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("empty surface after markup conversion")]
    EmptySurface,
    #[error("bracket depth below zero at token {reference}")]
    NegativeDepth { reference: String },
    #[error("unknown coarse tag {0:?}")]
    UnknownTag(String),
    #[error("flatfile line {line}: {message}")]
    Flatfile { line: usize, message: String },
    #[error("mapping line {line}: {message}")]
    Mapping { line: usize, message: String },
    #[error("entity table line {line}: {message}")]
    Entity { line: usize, message: String },
    #[error("no tokens selected for genres {0}")]
    NoTokens(String),
    #[error("genre set is empty")]
    NoGenres,
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io { .. })
    }
}

/// The fifteen coarse word-types. Declaration order is the final tie-break
/// when tagging, so it is part of the observable behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoarseTag {
    N,
    V,
    Adj,
    Adv,
    Det,
    Pron,
    Prep,
    Conj,
    Num,
    Aux,
    Interj,
    Part,
    Punct,
    Formula,
    Other,
}

impl CoarseTag {
    pub const COUNT: usize = 15;

    pub const ALL: [CoarseTag; CoarseTag::COUNT] = [
        CoarseTag::N,
        CoarseTag::V,
        CoarseTag::Adj,
        CoarseTag::Adv,
        CoarseTag::Det,
        CoarseTag::Pron,
        CoarseTag::Prep,
        CoarseTag::Conj,
        CoarseTag::Num,
        CoarseTag::Aux,
        CoarseTag::Interj,
        CoarseTag::Part,
        CoarseTag::Punct,
        CoarseTag::Formula,
        CoarseTag::Other,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<CoarseTag> {
        CoarseTag::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CoarseTag::N => "N",
            CoarseTag::V => "V",
            CoarseTag::Adj => "Adj",
            CoarseTag::Adv => "Adv",
            CoarseTag::Det => "Det",
            CoarseTag::Pron => "Pron",
            CoarseTag::Prep => "Prep",
            CoarseTag::Conj => "Conj",
            CoarseTag::Num => "Num",
            CoarseTag::Aux => "Aux",
            CoarseTag::Interj => "Interj",
            CoarseTag::Part => "Part",
            CoarseTag::Punct => "Punct",
            CoarseTag::Formula => "Formula",
            CoarseTag::Other => "Other",
        }
    }
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoarseTag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CoarseTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| CorpusError::UnknownTag(s.to_string()))
    }
}

/// One line of a SUSANNE source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub reference: String,
    pub status: String,
    pub fine_tag: String,
    pub surface: String,
    pub lemma: String,
    pub parse: String,
}

impl RawToken {
    /// Brown genre letter, the first character of the reference.
    pub fn genre(&self) -> char {
        self.reference.chars().next().unwrap_or('?')
    }

    pub fn is_non_lexical(&self) -> bool {
        NON_LEXICAL_TAGS.contains(&self.fine_tag.as_str())
    }

    /// Net change in parse bracket depth contributed by this token.
    pub fn depth_delta(&self) -> i64 {
        self.parse.chars().fold(0, |d, c| match c {
            '[' => d + 1,
            ']' => d - 1,
            _ => d,
        })
    }
}

/// Splits a SUSANNE line into its six fields. Source files are
/// tab-separated; whitespace-separated lines (as found in quoted excerpts)
/// are accepted too.
pub fn parse_susanne_line(line: &str, line_no: usize) -> Result<RawToken, CorpusError> {
    let fields: Vec<&str> = if line.contains('\t') {
        line.split('\t')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect()
    } else {
        line.split_whitespace().collect()
    };
    if fields.len() < 6 {
        return Err(CorpusError::MalformedLine {
            line: line_no,
            found: fields.len(),
        });
    }
    Ok(RawToken {
        reference: fields[0].to_string(),
        status: fields[1].to_string(),
        fine_tag: fields[2].to_string(),
        surface: fields[3].to_string(),
        lemma: fields[4].to_string(),
        parse: fields[5].to_string(),
    })
}

/// SGML entity to ASCII replacement table.
#[derive(Debug, Clone, Default)]
pub struct EntityTable {
    map: HashMap<String, String>,
}

impl EntityTable {
    pub fn builtin() -> Self {
        Self::from_tsv(DEFAULT_ENTITIES_TSV).expect("built-in entity table is valid")
    }

    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (entity, replacement) = line.split_once('\t').unwrap_or((line, ""));
            let entity = entity.trim();
            if !(entity.starts_with('<') && entity.ends_with('>') && entity.len() > 2) {
                return Err(CorpusError::Entity {
                    line: i + 1,
                    message: format!("not an entity: {entity:?}"),
                });
            }
            map.insert(entity.to_string(), replacement.to_string());
        }
        Ok(EntityTable { map })
    }

    pub fn insert(&mut self, entity: impl Into<String>, replacement: impl Into<String>) {
        self.map.insert(entity.into(), replacement.into());
    }

    pub fn get(&self, entity: &str) -> Option<&str> {
        self.map.get(entity).map(String::as_str)
    }
}

/// Result of converting one surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Converted {
    pub text: String,
    pub unknown_entities: usize,
}

/// Replaces every `<name>` entity in `surface` with its ASCII equivalent.
/// Entities absent from the table become [`UNKNOWN_ENTITY_REPLACEMENT`] and
/// are counted.
pub fn strip_markup(surface: &str, table: &EntityTable) -> Converted {
    let mut text = String::with_capacity(surface.len());
    let mut unknown_entities = 0;
    let mut rest = surface;
    while let Some(start) = rest.find('<') {
        text.push_str(&rest[..start]);
        let tail = &rest[start..];
        let entity_end = tail[1..]
            .find(|c: char| !c.is_ascii_alphanumeric())
            .map(|p| p + 1)
            .filter(|&p| p > 1 && tail[p..].starts_with('>'));
        match entity_end {
            Some(p) => {
                let entity = &tail[..=p];
                match table.get(entity) {
                    Some(rep) => text.push_str(rep),
                    None => {
                        text.push_str(UNKNOWN_ENTITY_REPLACEMENT);
                        unknown_entities += 1;
                    }
                }
                rest = &tail[p + 1..];
            }
            None => {
                text.push('<');
                rest = &tail[1..];
            }
        }
    }
    text.push_str(rest);
    Converted {
        text,
        unknown_entities,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagPattern {
    Exact(String),
    Prefix(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRule {
    pub pattern: TagPattern,
    pub coarse: CoarseTag,
}

/// Fine-to-coarse tagset mapping. Exact rules win over prefix rules; among
/// prefix rules the longest match wins, and the earliest rule breaks ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagsetMapping {
    pub rules: Vec<MappingRule>,
    pub default: CoarseTag,
}

impl TagsetMapping {
    pub fn builtin() -> Self {
        Self::from_tsv(DEFAULT_MAPPING_TSV).expect("built-in mapping is valid")
    }

    /// Parses `pattern<TAB>coarse` lines. `X*` is a prefix rule, `*` the
    /// default, anything else an exact tag.
    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut rules = Vec::new();
        let mut default = CoarseTag::Other;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (pattern, coarse) = line.split_once('\t').ok_or(CorpusError::Mapping {
                line: line_no,
                message: "expected pattern<TAB>coarse_tag".into(),
            })?;
            let coarse: CoarseTag = coarse.trim().parse().map_err(|_| CorpusError::Mapping {
                line: line_no,
                message: format!("unknown coarse tag {:?}", coarse.trim()),
            })?;
            let pattern = pattern.trim();
            if pattern == "*" {
                default = coarse;
            } else if let Some(prefix) = pattern.strip_suffix('*') {
                rules.push(MappingRule {
                    pattern: TagPattern::Prefix(prefix.to_string()),
                    coarse,
                });
            } else if pattern.is_empty() {
                return Err(CorpusError::Mapping {
                    line: line_no,
                    message: "empty pattern".into(),
                });
            } else {
                rules.push(MappingRule {
                    pattern: TagPattern::Exact(pattern.to_string()),
                    coarse,
                });
            }
        }
        Ok(TagsetMapping { rules, default })
    }

    pub fn simplify(&self, fine: &str) -> CoarseTag {
        let exact = self.rules.iter().find_map(|r| match &r.pattern {
            TagPattern::Exact(t) if t == fine => Some(r.coarse),
            _ => None,
        });
        if let Some(tag) = exact {
            return tag;
        }
        let mut best: Option<(usize, CoarseTag)> = None;
        for rule in &self.rules {
            if let TagPattern::Prefix(p) = &rule.pattern {
                if fine.starts_with(p.as_str()) && best.is_none_or(|(len, _)| p.len() > len) {
                    best = Some((p.len(), rule.coarse));
                }
            }
        }
        best.map_or(self.default, |(_, tag)| tag)
    }
}

pub fn simplify_tag(fine: &str, mapping: &TagsetMapping) -> CoarseTag {
    mapping.simplify(fine)
}

/// Character count of an already-converted surface.
pub fn word_length(surface: &str) -> Result<u32, CorpusError> {
    match surface.chars().count() {
        0 => Err(CorpusError::EmptySurface),
        n => Ok(n as u32),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRecord {
    pub tag: CoarseTag,
    pub length: u32,
    pub surface: Option<String>,
}

impl WordRecord {
    pub fn new(tag: CoarseTag, length: u32) -> Self {
        WordRecord {
            tag,
            length,
            surface: None,
        }
    }

    pub fn with_surface(tag: CoarseTag, surface: &str) -> Result<Self, CorpusError> {
        Ok(WordRecord {
            tag,
            length: word_length(surface)?,
            surface: Some(surface.to_string()),
        })
    }
}

/// A non-empty run of words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    words: Vec<WordRecord>,
}

impl Sentence {
    pub fn new(words: Vec<WordRecord>) -> Option<Self> {
        if words.is_empty() {
            None
        } else {
            Some(Sentence { words })
        }
    }

    /// Builds a surface-less sentence from parallel slices.
    pub fn from_parts(lengths: &[u32], tags: &[CoarseTag]) -> Option<Self> {
        if lengths.len() != tags.len() || lengths.contains(&0) {
            return None;
        }
        Sentence::new(
            lengths
                .iter()
                .zip(tags)
                .map(|(&l, &t)| WordRecord::new(t, l))
                .collect(),
        )
    }

    pub fn words(&self) -> &[WordRecord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.words.iter().map(|w| w.length).collect()
    }

    pub fn tags(&self) -> Vec<CoarseTag> {
        self.words.iter().map(|w| w.tag).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Sentence(Vec<RawToken>),
    Break(RawToken),
}

/// Groups tokens into sentences by parse-field bracket depth. A sentence
/// closes when the depth returns to zero; non-lexical tokens are emitted as
/// their own [`Segment::Break`]. Tokens left open at the end of input form a
/// final sentence.
pub fn segment_sentences(tokens: &[RawToken]) -> Result<Vec<Segment>, CorpusError> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut depth: i64 = 0;
    for tok in tokens {
        depth += tok.depth_delta();
        if depth < 0 {
            return Err(CorpusError::NegativeDepth {
                reference: tok.reference.clone(),
            });
        }
        if tok.is_non_lexical() {
            out.push(Segment::Break(tok.clone()));
        } else {
            current.push(tok.clone());
        }
        if depth == 0 && !current.is_empty() {
            out.push(Segment::Sentence(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        out.push(Segment::Sentence(current));
    }
    Ok(out)
}

/// Counts accumulated while converting SUSANNE sources.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConversionReport {
    pub tokens: u64,
    pub sentences: u64,
    pub dropped: u64,
    pub unknown_entities: u64,
    pub per_genre: BTreeMap<String, u64>,
}

impl ConversionReport {
    fn absorb(&mut self, seg: &ConvertedSentence) {
        let emitted = !seg.words.is_empty();
        self.tokens += seg.words.len() as u64;
        self.sentences += emitted as u64;
        self.dropped += seg.dropped;
        self.unknown_entities += seg.unknown_entities;
        if emitted {
            *self.per_genre.entry(seg.genre.to_string()).or_default() += seg.words.len() as u64;
        }
    }
}

/// Everything `prepare` needs besides the source directory.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub mapping: TagsetMapping,
    pub entities: EntityTable,
    pub genres: BTreeSet<char>,
    pub keep_surfaces: bool,
}

impl Preparation {
    pub fn new(genres: impl IntoIterator<Item = char>) -> Self {
        Preparation {
            mapping: TagsetMapping::builtin(),
            entities: EntityTable::builtin(),
            genres: genres.into_iter().collect(),
            keep_surfaces: true,
        }
    }
}

/// One sentence after conversion, before genre selection.
#[derive(Debug, Clone)]
pub struct ConvertedSentence {
    pub genre: char,
    pub words: Vec<WordRecord>,
    pub dropped: u64,
    pub unknown_entities: u64,
}

/// Converts the text of one SUSANNE file.
pub fn convert_source(
    text: &str,
    mapping: &TagsetMapping,
    entities: &EntityTable,
) -> Result<Vec<ConvertedSentence>, CorpusError> {
    let tokens = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_susanne_line(l, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for seg in segment_sentences(&tokens)? {
        let Segment::Sentence(toks) = seg else {
            continue;
        };
        let mut conv = ConvertedSentence {
            genre: toks[0].genre(),
            words: Vec::with_capacity(toks.len()),
            dropped: 0,
            unknown_entities: 0,
        };
        for tok in &toks {
            let c = strip_markup(&tok.surface, entities);
            conv.unknown_entities += c.unknown_entities as u64;
            match WordRecord::with_surface(mapping.simplify(&tok.fine_tag), &c.text) {
                Ok(w) => conv.words.push(w),
                Err(_) => {
                    warn!(
                        "{}: empty surface after conversion, token dropped",
                        tok.reference
                    );
                    conv.dropped += 1;
                }
            }
        }
        out.push(conv);
    }
    Ok(out)
}

/// SUSANNE text files are named after their Brown text id, e.g. `A01`.
fn is_source_file_name(name: &str) -> bool {
    let b = name.as_bytes();
    b.len() >= 3 && b[0].is_ascii_uppercase() && b[1].is_ascii_digit() && b[2].is_ascii_digit()
}

/// Reads and converts every source file in `dir`, in file-name order.
pub fn convert_dir(
    dir: &Path,
    mapping: &TagsetMapping,
    entities: &EntityTable,
) -> Result<Vec<ConvertedSentence>, CorpusError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))? {
        let entry = entry.map_err(|e| CorpusError::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if path.is_file() && is_source_file_name(&name) {
            files.push((name, path));
        }
    }
    files.sort();
    let converted = files
        .par_iter()
        .map(|(_, path)| {
            let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
            convert_source(&text, mapping, entities).map_err(|e| match e {
                CorpusError::Io { .. } => e,
                other => CorpusError::File {
                    path: path.clone(),
                    message: other.to_string(),
                },
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(converted.into_iter().flatten().collect())
}

/// Keeps the sentences of the selected genres and reports on them.
pub fn select_genres(
    converted: &[ConvertedSentence],
    genres: &BTreeSet<char>,
) -> (Vec<Sentence>, ConversionReport) {
    let mut report = ConversionReport::default();
    let mut sentences = Vec::new();
    for conv in converted.iter().filter(|c| genres.contains(&c.genre)) {
        report.absorb(conv);
        if let Some(s) = Sentence::new(conv.words.clone()) {
            sentences.push(s);
        }
    }
    (sentences, report)
}

pub fn genre_list(genres: &BTreeSet<char>) -> String {
    genres
        .iter()
        .map(char::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Converts the SUSANNE files in `source_dir` and writes the sentences of the
/// selected genres to `out` as a flatfile.
pub fn build_flatfile(
    source_dir: &Path,
    prep: &Preparation,
    out: &Path,
) -> Result<ConversionReport, CorpusError> {
    if prep.genres.is_empty() {
        return Err(CorpusError::NoGenres);
    }
    let converted = convert_dir(source_dir, &prep.mapping, &prep.entities)?;
    let (sentences, report) = select_genres(&converted, &prep.genres);
    if report.tokens == 0 {
        return Err(CorpusError::NoTokens(genre_list(&prep.genres)));
    }
    write_flatfile_path(out, &sentences, prep.keep_surfaces)?;
    Ok(report)
}

pub fn write_flatfile_path(
    out: &Path,
    sentences: &[Sentence],
    keep_surfaces: bool,
) -> Result<(), CorpusError> {
    let file = fs::File::create(out).map_err(|e| CorpusError::io(out, e))?;
    let mut w = io::BufWriter::new(file);
    write_flatfile(&mut w, sentences, keep_surfaces)
        .and_then(|_| w.flush())
        .map_err(|e| CorpusError::io(out, e))
}

pub fn write_flatfile<W: Write>(
    w: &mut W,
    sentences: &[Sentence],
    keep_surfaces: bool,
) -> io::Result<()> {
    for s in sentences {
        for word in s.words() {
            match (&word.surface, keep_surfaces) {
                (Some(surface), true) => {
                    writeln!(w, "{}:{}:\"{}\"", word.tag, word.length, surface)?
                }
                _ => writeln!(w, "{}:{}:", word.tag, word.length)?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parses one `TAG:LEN:"SURFACE"` record. Spaces before the first colon are
/// tolerated.
pub fn parse_flatfile_line(line: &str, line_no: usize) -> Result<WordRecord, CorpusError> {
    let err = |message: String| CorpusError::Flatfile {
        line: line_no,
        message,
    };
    let (tag, rest) = line
        .split_once(':')
        .ok_or_else(|| err("missing ':' after tag".into()))?;
    let tag: CoarseTag = tag
        .trim_end()
        .parse()
        .map_err(|_| err(format!("unknown tag {:?}", tag.trim_end())))?;
    let (len, surface) = rest
        .split_once(':')
        .ok_or_else(|| err("missing ':' after length".into()))?;
    let length: u32 = len
        .parse()
        .ok()
        .filter(|&l| l > 0)
        .ok_or_else(|| err(format!("bad length {len:?}")))?;
    let surface = if surface.is_empty() {
        None
    } else if surface.len() >= 2 && surface.starts_with('"') && surface.ends_with('"') {
        Some(surface[1..surface.len() - 1].to_string())
    } else {
        return Err(err(format!("unquoted surface {surface:?}")));
    };
    if let Some(s) = &surface {
        if s.chars().count() != length as usize {
            return Err(err(format!("length {length} does not match surface {s:?}")));
        }
    }
    Ok(WordRecord {
        tag,
        length,
        surface,
    })
}

pub fn read_flatfile<R: BufRead>(r: R) -> Result<Vec<Sentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut words = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(Path::new("<flatfile>"), e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some(s) = Sentence::new(std::mem::take(&mut words)) {
                sentences.push(s);
            }
            continue;
        }
        words.push(parse_flatfile_line(line, i + 1)?);
    }
    if let Some(s) = Sentence::new(words) {
        sentences.push(s);
    }
    Ok(sentences)
}

pub fn read_flatfile_path(path: &Path) -> Result<Vec<Sentence>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_flatfile(io::BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::io(path, source),
        other => other,
    })
}

/// Whitespace tokenizer for raw text. Leading and trailing ASCII punctuation
/// is split off one character per token; inner punctuation stays attached.
pub fn tokenize_text(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let start = chars
            .iter()
            .position(|c| !c.is_ascii_punctuation())
            .unwrap_or(chars.len());
        let end = chars
            .iter()
            .rposition(|c| !c.is_ascii_punctuation())
            .map_or(start, |p| p + 1);
        out.extend(chars[..start].iter().map(char::to_string));
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(chars[end.max(start)..].iter().map(char::to_string));
    }
    out
}
