//! The knowledge base: word-length windows keyed to the tag sequences seen
//! under them, with occurrence counts.
//!
//! Every contiguous window of a training sentence, up to `max_window` words,
//! is counted once per occurrence. Lookups go through a hash index on the
//! length key. The interchange format is a sorted text file (`LKB 1`), so
//! equal knowledge bases always serialize to identical bytes.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{CoarseTag, Sentence};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_MAX_WINDOW: usize = 12;

/// Per-tag counts indexed by [`CoarseTag::index`].
pub type TagCounts = [u64; CoarseTag::COUNT];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: unsupported format header {found:?}")]
    Version { line: usize, found: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("metadata mismatch: {0}")]
    Mismatch(String),
    #[error("invalid entry: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl KbError {
    pub fn is_io(&self) -> bool {
        matches!(self, KbError::Io { .. })
    }
}

/// A non-empty sequence of positive word lengths, written `3:6:6`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LengthKey(Vec<u32>);

impl LengthKey {
    pub fn new(lengths: Vec<u32>) -> Option<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            None
        } else {
            Some(LengthKey(lengths))
        }
    }

    pub fn lengths(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Borrow<[u32]> for LengthKey {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(":")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for LengthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0)
    }
}

impl FromStr for LengthKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lengths = s
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| format!("bad length {p:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        LengthKey::new(lengths).ok_or_else(|| format!("invalid length key {s:?}"))
    }
}

/// The tags aligned with a length key, written `Det:N:N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagSequence(Vec<CoarseTag>);

impl TagSequence {
    pub fn new(tags: Vec<CoarseTag>) -> Option<Self> {
        if tags.is_empty() {
            None
        } else {
            Some(TagSequence(tags))
        }
    }

    pub fn tags(&self) -> &[CoarseTag] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TagSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.0)
    }
}

impl FromStr for TagSequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tags = s
            .split(':')
            .map(|p| {
                p.parse::<CoarseTag>()
                    .map_err(|_| format!("unknown tag {p:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TagSequence::new(tags).ok_or_else(|| "empty tag sequence".to_string())
    }
}

/// A length window plus the tags around one hole, written `3:6|_:N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextKey {
    lengths: LengthKey,
    context: Vec<Option<CoarseTag>>,
}

impl ContextKey {
    pub fn new(lengths: LengthKey, context: Vec<Option<CoarseTag>>) -> Option<Self> {
        let holes = context.iter().filter(|t| t.is_none()).count();
        if holes != 1 || context.len() != lengths.len() {
            return None;
        }
        Some(ContextKey { lengths, context })
    }

    /// Context for `tags` with a hole at `hole`.
    pub fn with_hole(lengths: &[u32], tags: &[CoarseTag], hole: usize) -> Option<Self> {
        let context = tags
            .iter()
            .enumerate()
            .map(|(i, &t)| (i != hole).then_some(t))
            .collect();
        ContextKey::new(LengthKey::new(lengths.to_vec())?, context)
    }

    pub fn lengths(&self) -> &LengthKey {
        &self.lengths
    }

    pub fn context(&self) -> &[Option<CoarseTag>] {
        &self.context
    }
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|", self.lengths)?;
        for (i, t) in self.context.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            match t {
                Some(t) => write!(f, "{t}")?,
                None => f.write_str("_")?,
            }
        }
        Ok(())
    }
}

impl FromStr for ContextKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lengths, ctx) = s
            .split_once('|')
            .ok_or_else(|| format!("missing '|' in context key {s:?}"))?;
        let lengths: LengthKey = lengths.parse()?;
        let context = ctx
            .split(':')
            .map(|p| match p {
                "_" => Ok(None),
                t => t
                    .parse::<CoarseTag>()
                    .map(Some)
                    .map_err(|_| format!("unknown tag {t:?}")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ContextKey::new(lengths, context)
            .ok_or_else(|| format!("context key {s:?} needs exactly one hole per length"))
    }
}

fn bump<K: Ord>(slot: &mut Vec<(K, u64)>, key: K, count: u64) {
    match slot.binary_search_by(|(k, _)| k.cmp(&key)) {
        Ok(i) => slot[i].1 += count,
        Err(i) => slot.insert(i, (key, count)),
    }
}

type EntryTable = HashMap<LengthKey, Vec<(TagSequence, u64)>>;
type ContextTable = HashMap<ContextKey, Vec<(CoarseTag, u64)>>;

/// Mutable knowledge base under construction.
#[derive(Debug, Clone)]
pub struct KbBuilder {
    max_window: usize,
    entries: EntryTable,
    context: Option<ContextTable>,
}

impl KbBuilder {
    pub fn new(max_window: usize) -> Self {
        assert!(max_window >= 1, "max_window must be positive");
        KbBuilder {
            max_window,
            entries: HashMap::new(),
            context: None,
        }
    }

    pub fn with_context(mut self, enabled: bool) -> Self {
        self.context = enabled.then(HashMap::new);
        self
    }

    /// Counts every window of `sentence` up to `max_window` words once, and
    /// when context indexing is on, every (window, hole position) pair.
    pub fn index_sentence(&mut self, sentence: &Sentence) {
        let lengths = sentence.lengths();
        let tags = sentence.tags();
        let n = lengths.len();
        for start in 0..n {
            for end in start + 1..=n.min(start + self.max_window) {
                let lk = &lengths[start..end];
                let tk = &tags[start..end];
                bump(
                    self.entries.entry(LengthKey(lk.to_vec())).or_default(),
                    TagSequence(tk.to_vec()),
                    1,
                );
                if let Some(ctx) = self.context.as_mut() {
                    for hole in 0..lk.len() {
                        let key = ContextKey::with_hole(lk, tk, hole).expect("valid window");
                        bump(ctx.entry(key).or_default(), tk[hole], 1);
                    }
                }
            }
        }
    }

    /// Adds `count` occurrences of `tags` under `key`.
    pub fn insert(&mut self, key: LengthKey, tags: TagSequence, count: u64) -> Result<(), KbError> {
        if count == 0 {
            return Err(KbError::Invalid(format!("zero count for {key}")));
        }
        if key.len() > self.max_window {
            return Err(KbError::Invalid(format!(
                "key {key} longer than max window {}",
                self.max_window
            )));
        }
        if key.len() != tags.len() {
            return Err(KbError::Invalid(format!(
                "key {key} does not align with {tags}"
            )));
        }
        bump(self.entries.entry(key).or_default(), tags, count);
        Ok(())
    }

    pub fn insert_context(
        &mut self,
        key: ContextKey,
        tag: CoarseTag,
        count: u64,
    ) -> Result<(), KbError> {
        if count == 0 {
            return Err(KbError::Invalid(format!("zero count for {key}")));
        }
        if key.lengths.len() > self.max_window {
            return Err(KbError::Invalid(format!(
                "context key {key} longer than max window"
            )));
        }
        let ctx = self
            .context
            .as_mut()
            .ok_or_else(|| KbError::Invalid("context indexing is disabled".into()))?;
        bump(ctx.entry(key).or_default(), tag, count);
        Ok(())
    }

    fn absorb(&mut self, other: &KnowledgeBase) {
        for (key, seqs) in &other.entries {
            let slot = self.entries.entry(key.clone()).or_default();
            for (seq, c) in seqs {
                bump(slot, seq.clone(), *c);
            }
        }
        if let (Some(mine), Some(theirs)) = (self.context.as_mut(), other.context.as_ref()) {
            for (key, tags) in theirs {
                let slot = mine.entry(key.clone()).or_default();
                for (t, c) in tags {
                    bump(slot, *t, *c);
                }
            }
        }
    }

    pub fn finish(self) -> KnowledgeBase {
        let mut global = [0u64; CoarseTag::COUNT];
        let mut by_length: HashMap<u32, TagCounts> = HashMap::new();
        for (key, seqs) in &self.entries {
            if key.len() != 1 {
                continue;
            }
            let row = by_length.entry(key.0[0]).or_insert([0; CoarseTag::COUNT]);
            for (seq, c) in seqs {
                let i = seq.0[0].index();
                row[i] += c;
                global[i] += c;
            }
        }
        KnowledgeBase {
            max_window: self.max_window,
            entries: self.entries,
            context: self.context,
            global,
            by_length,
        }
    }
}

/// An immutable, indexed knowledge base. Safe to share between threads.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    max_window: usize,
    entries: EntryTable,
    context: Option<ContextTable>,
    global: TagCounts,
    by_length: HashMap<u32, TagCounts>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        // derived tables follow from the entries
        self.max_window == other.max_window
            && self.entries == other.entries
            && self.context == other.context
    }
}

impl Eq for KnowledgeBase {}

impl KnowledgeBase {
    pub fn builder(max_window: usize) -> KbBuilder {
        KbBuilder::new(max_window)
    }

    pub fn empty(max_window: usize, context: bool) -> Self {
        KbBuilder::new(max_window).with_context(context).finish()
    }

    /// Builds a knowledge base from a corpus, indexing chunks in parallel and
    /// merging the partial results.
    pub fn train(sentences: &[Sentence], max_window: usize, context: bool) -> Self {
        const CHUNK: usize = 2048;
        let parts: Vec<KnowledgeBase> = sentences
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut b = KbBuilder::new(max_window).with_context(context);
                for s in chunk {
                    b.index_sentence(s);
                }
                b.finish()
            })
            .collect();
        let mut b = KbBuilder::new(max_window).with_context(context);
        for part in &parts {
            b.absorb(part);
        }
        b.finish()
    }

    pub fn to_builder(&self) -> KbBuilder {
        KbBuilder {
            max_window: self.max_window,
            entries: self.entries.clone(),
            context: self.context.clone(),
        }
    }

    pub fn max_window(&self) -> usize {
        self.max_window
    }

    pub fn has_context(&self) -> bool {
        self.context.is_some()
    }

    /// True when no single-word entries exist, i.e. nothing to fall back on.
    pub fn is_untrained(&self) -> bool {
        self.by_length.is_empty()
    }

    /// Tag sequences stored under `key`, sorted by tag sequence.
    pub fn lookup(&self, key: &[u32]) -> &[(TagSequence, u64)] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn context_lookup(&self, key: &ContextKey) -> &[(CoarseTag, u64)] {
        self.context
            .as_ref()
            .and_then(|c| c.get(key))
            .map_or(&[], Vec::as_slice)
    }

    /// All entries, in no particular order.
    pub fn entries(&self) -> impl Iterator<Item = (&LengthKey, &[(TagSequence, u64)])> + '_ {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn context_entries(&self) -> impl Iterator<Item = (&ContextKey, &[(CoarseTag, u64)])> + '_ {
        self.context
            .iter()
            .flat_map(|c| c.iter().map(|(k, v)| (k, v.as_slice())))
    }

    /// Tag frequencies over all single-word entries.
    pub fn global_tag_counts(&self) -> &TagCounts {
        &self.global
    }

    /// Tag frequencies among single-word entries of the given length.
    pub fn length_tag_counts(&self, length: u32) -> Option<&TagCounts> {
        self.by_length.get(&length)
    }

    /// Sums counts per (key, tag sequence). Both sides must agree on window
    /// size and context indexing.
    pub fn merge(&self, other: &KnowledgeBase) -> Result<KnowledgeBase, KbError> {
        if self.max_window != other.max_window {
            return Err(KbError::Mismatch(format!(
                "max window {} vs {}",
                self.max_window, other.max_window
            )));
        }
        if self.has_context() != other.has_context() {
            return Err(KbError::Mismatch("context indexing differs".into()));
        }
        let mut b = self.to_builder();
        b.absorb(other);
        Ok(b.finish())
    }

    pub fn save<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "LKB {FORMAT_VERSION}")?;
        writeln!(w, "maxwindow {}", self.max_window)?;
        writeln!(w, "tags {}", tag_header())?;
        let mut lines: Vec<(String, String, u64)> = self
            .entries
            .iter()
            .flat_map(|(k, seqs)| {
                let key = k.to_string();
                seqs.iter()
                    .map(move |(s, c)| (key.clone(), s.to_string(), *c))
            })
            .collect();
        lines.sort_unstable();
        for (k, s, c) in &lines {
            writeln!(w, "{k}\t{s}\t{c}")?;
        }
        if let Some(ctx) = &self.context {
            writeln!(w, "CTX")?;
            let mut lines: Vec<(String, &'static str, u64)> = ctx
                .iter()
                .flat_map(|(k, tags)| {
                    let key = k.to_string();
                    tags.iter().map(move |(t, c)| (key.clone(), t.name(), *c))
                })
                .collect();
            lines.sort_unstable();
            for (k, t, c) in &lines {
                writeln!(w, "{k}\t{t}\t{c}")?;
            }
        }
        Ok(())
    }

    /// Canonical serialized form.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn save_path(&self, path: &Path) -> Result<(), KbError> {
        let io_err = |source| KbError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = fs::File::create(path).map_err(io_err)?;
        let mut w = io::BufWriter::new(file);
        self.save(&mut w).and_then(|_| w.flush()).map_err(io_err)
    }

    pub fn load<R: BufRead>(r: R) -> Result<KnowledgeBase, KbError> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next_line = |what: &str| -> Result<(usize, String), KbError> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((_, Err(source))) => Err(KbError::Io {
                    path: PathBuf::from("<kb>"),
                    source,
                }),
                None => Err(KbError::Format {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };

        let (n, header) = next_line("header")?;
        if header != format!("LKB {FORMAT_VERSION}") {
            return Err(KbError::Version {
                line: n,
                found: header,
            });
        }
        let (n, mw) = next_line("maxwindow")?;
        let max_window = mw
            .strip_prefix("maxwindow ")
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v >= 1)
            .ok_or_else(|| KbError::Format {
                line: n,
                message: format!("bad maxwindow line {mw:?}"),
            })?;
        let (n, tags) = next_line("tags")?;
        if tags != format!("tags {}", tag_header()) {
            return Err(KbError::Format {
                line: n,
                message: format!("tagset does not match {:?}", tag_header()),
            });
        }

        let mut b = KbBuilder::new(max_window);
        let mut in_ctx = false;
        loop {
            let (n, line) = match next_line("") {
                Ok(l) => l,
                Err(KbError::Format { line: 0, .. }) => break,
                Err(e) => return Err(e),
            };
            let fmt_err = |message: String| KbError::Format { line: n, message };
            if line.is_empty() {
                continue;
            }
            if line == "CTX" {
                if in_ctx {
                    return Err(fmt_err("duplicate CTX section".into()));
                }
                in_ctx = true;
                b.context = Some(HashMap::new());
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(key), Some(val), Some(count), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(fmt_err(format!(
                    "expected 3 tab-separated fields in {line:?}"
                )));
            };
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| fmt_err(format!("bad count {count:?}")))?;
            let dup = if in_ctx {
                let key: ContextKey = key.parse().map_err(fmt_err)?;
                let tag: CoarseTag = val
                    .parse()
                    .map_err(|_| fmt_err(format!("unknown tag {val:?}")))?;
                let dup = b.has_context_entry(&key, tag);
                b.insert_context(key, tag, count)
                    .map_err(|e| fmt_err(e.to_string()))?;
                dup
            } else {
                let key: LengthKey = key.parse().map_err(fmt_err)?;
                let seq: TagSequence = val.parse().map_err(fmt_err)?;
                let dup = b
                    .entries
                    .get(&key)
                    .is_some_and(|v| v.iter().any(|(s, _)| *s == seq));
                b.insert(key, seq, count)
                    .map_err(|e| fmt_err(e.to_string()))?;
                dup
            };
            if dup {
                return Err(fmt_err("duplicate entry".into()));
            }
        }
        Ok(b.finish())
    }

    pub fn load_path(path: &Path) -> Result<KnowledgeBase, KbError> {
        let file = fs::File::open(path).map_err(|source| KbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::load(io::BufReader::new(file)).map_err(|e| match e {
            KbError::Io { source, .. } => KbError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn stats(&self) -> KbStats {
        let mut windows_per_length = vec![0u64; self.max_window];
        let mut entries = 0;
        for (key, seqs) in &self.entries {
            entries += seqs.len() as u64;
            windows_per_length[key.len() - 1] += seqs.iter().map(|(_, c)| c).sum::<u64>();
        }
        let mut counter = ByteCounter(0);
        self.save(&mut counter).expect("counting sink cannot fail");
        KbStats {
            max_window: self.max_window,
            entries,
            distinct_keys: self.entries.len() as u64,
            windows_per_length,
            context_entries: self
                .context
                .as_ref()
                .map(|c| c.values().map(|v| v.len() as u64).sum()),
            serialized_bytes: counter.0,
        }
    }
}

impl KbBuilder {
    fn has_context_entry(&self, key: &ContextKey, tag: CoarseTag) -> bool {
        self.context
            .as_ref()
            .and_then(|c| c.get(key))
            .is_some_and(|v| v.iter().any(|(t, _)| *t == tag))
    }
}

fn tag_header() -> String {
    CoarseTag::ALL
        .iter()
        .map(|t| t.name())
        .collect::<Vec<_>>()
        .join(",")
}

struct ByteCounter(u64);

impl Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Size summary of a knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KbStats {
    pub max_window: usize,
    /// Distinct (key, tag sequence) pairs.
    pub entries: u64,
    pub distinct_keys: u64,
    /// Total window occurrences per window length; index 0 is length 1.
    pub windows_per_length: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context_entries: Option<u64>,
    pub serialized_bytes: u64,
}
