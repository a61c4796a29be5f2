//! Tagging from word lengths.
//!
//! For a target word, every contiguous window that contains it (up to the
//! configured window size) is looked up in the knowledge base. Each stored
//! tag sequence votes for the tag it aligns with the target, weighted by
//! `count * 2^(window length)`, so a single long match outweighs any single
//! shorter one. Scores are exact unbounded integers.
//!
//! Positions are zero-based throughout.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::corpus::CoarseTag;
use crate::kb::{ContextKey, KnowledgeBase, TagCounts};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("knowledge base has no single-word entries")]
    Untrained,
    #[error("empty sentence")]
    EmptySentence,
    #[error("word {position} has length 0")]
    ZeroLength { position: usize },
    #[error("position {position} out of range for {len} words")]
    OutOfRange { position: usize, len: usize },
    #[error("window size {requested} exceeds the knowledge base's {available}")]
    WindowTooLarge { requested: usize, available: usize },
    #[error("window size must be positive")]
    ZeroWindow,
    #[error("multi-pass tagging needs a knowledge base with a context index")]
    NoContext,
    #[error("{tags} tags for {lengths} lengths")]
    LengthMismatch { tags: usize, lengths: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    SinglePass,
    MultiPass,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" | "single_pass" => Ok(Mode::SinglePass),
            "multi" | "multi_pass" => Ok(Mode::MultiPass),
            other => Err(format!("unknown mode {other:?} (expected single or multi)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggingConfig {
    pub max_window: usize,
    pub mode: Mode,
    pub max_refine_iters: usize,
}

pub const DEFAULT_REFINE_ITERS: usize = 3;

impl TaggingConfig {
    /// Single-pass tagging over the knowledge base's full window size.
    pub fn for_kb(kb: &KnowledgeBase) -> Self {
        TaggingConfig {
            max_window: kb.max_window(),
            mode: Mode::SinglePass,
            max_refine_iters: DEFAULT_REFINE_ITERS,
        }
    }

    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), TagError> {
        if self.max_window == 0 {
            return Err(TagError::ZeroWindow);
        }
        if self.max_window > kb.max_window() {
            return Err(TagError::WindowTooLarge {
                requested: self.max_window,
                available: kb.max_window(),
            });
        }
        if self.mode == Mode::MultiPass && !kb.has_context() {
            return Err(TagError::NoContext);
        }
        Ok(())
    }
}

/// Exact per-tag scores for one word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScoreTable {
    scores: [BigUint; CoarseTag::COUNT],
}

impl ScoreTable {
    pub fn get(&self, tag: CoarseTag) -> &BigUint {
        &self.scores[tag.index()]
    }

    /// Adds `count * 2^window_len` to `tag`.
    pub fn add_match(&mut self, tag: CoarseTag, count: u64, window_len: usize) {
        self.scores[tag.index()] += BigUint::from(count) << window_len;
    }

    pub fn add(&mut self, other: &ScoreTable) {
        for (mine, theirs) in self.scores.iter_mut().zip(&other.scores) {
            *mine += theirs;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scores.iter().all(|s| s.bits() == 0)
    }

    /// Nonzero scores in tag declaration order.
    pub fn nonzero(&self) -> impl Iterator<Item = (CoarseTag, &BigUint)> + '_ {
        CoarseTag::ALL
            .iter()
            .map(|&t| (t, &self.scores[t.index()]))
            .filter(|(_, s)| s.bits() > 0)
    }
}

impl fmt::Display for ScoreTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (t, s)) in self.nonzero().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}: {s}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionSource {
    Matched,
    FallbackLength,
    FallbackGlobal,
}

impl DecisionSource {
    pub fn name(self) -> &'static str {
        match self {
            DecisionSource::Matched => "matched",
            DecisionSource::FallbackLength => "fallback_length",
            DecisionSource::FallbackGlobal => "fallback_global",
        }
    }
}

impl fmt::Display for DecisionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagDecision {
    pub tag: CoarseTag,
    pub source: DecisionSource,
    /// Zero for fallbacks.
    pub winning_score: BigUint,
}

fn check_lengths(lengths: &[u32]) -> Result<(), TagError> {
    if lengths.is_empty() {
        return Err(TagError::EmptySentence);
    }
    match lengths.iter().position(|&l| l == 0) {
        Some(position) => Err(TagError::ZeroLength { position }),
        None => Ok(()),
    }
}

/// Calls `f(start, end)` for every window `[start, end)` containing
/// `position` with at most `max_window` words.
fn for_each_window(n: usize, position: usize, max_window: usize, mut f: impl FnMut(usize, usize)) {
    let first = (position + 1).saturating_sub(max_window);
    for start in first..=position {
        for end in position + 1..=n.min(start + max_window) {
            f(start, end);
        }
    }
}

/// Exact score of every tag for the word at `position`.
pub fn score_word(
    kb: &KnowledgeBase,
    lengths: &[u32],
    position: usize,
    cfg: &TaggingConfig,
) -> Result<ScoreTable, TagError> {
    if position >= lengths.len() {
        return Err(TagError::OutOfRange {
            position,
            len: lengths.len(),
        });
    }
    let mut table = ScoreTable::default();
    for_each_window(lengths.len(), position, cfg.max_window, |start, end| {
        for (seq, count) in kb.lookup(&lengths[start..end]) {
            table.add_match(seq.tags()[position - start], *count, end - start);
        }
    });
    Ok(table)
}

/// Picks the best of `candidates` by `key`, then global frequency, then
/// declaration order.
fn pick<K: Ord>(
    candidates: impl Iterator<Item = CoarseTag>,
    global: &TagCounts,
    key: impl Fn(CoarseTag) -> K,
) -> Option<CoarseTag> {
    // earlier declaration wins, hence Reverse
    candidates.max_by(|&a, &b| {
        (key(a), global[a.index()], std::cmp::Reverse(a.index())).cmp(&(
            key(b),
            global[b.index()],
            std::cmp::Reverse(b.index()),
        ))
    })
}

/// Chooses a tag from a score table, falling back to the most frequent tag
/// for the word's length and then to the most frequent tag overall.
pub fn select_tag(
    table: &ScoreTable,
    kb: &KnowledgeBase,
    word_length: u32,
) -> Result<TagDecision, TagError> {
    if kb.is_untrained() {
        return Err(TagError::Untrained);
    }
    let global = kb.global_tag_counts();
    if !table.is_zero() {
        let tag = pick(CoarseTag::ALL.into_iter(), global, |t| table.get(t)).expect("nonempty");
        return Ok(TagDecision {
            tag,
            source: DecisionSource::Matched,
            winning_score: table.get(tag).clone(),
        });
    }
    if let Some(row) = kb.length_tag_counts(word_length) {
        let tag = pick(CoarseTag::ALL.into_iter(), global, |t| row[t.index()]).expect("nonempty");
        if row[tag.index()] > 0 {
            return Ok(TagDecision {
                tag,
                source: DecisionSource::FallbackLength,
                winning_score: BigUint::default(),
            });
        }
    }
    let tag = pick(CoarseTag::ALL.into_iter(), global, |_| ()).expect("nonempty");
    Ok(TagDecision {
        tag,
        source: DecisionSource::FallbackGlobal,
        winning_score: BigUint::default(),
    })
}

fn base_tables(
    kb: &KnowledgeBase,
    lengths: &[u32],
    cfg: &TaggingConfig,
) -> Result<Vec<ScoreTable>, TagError> {
    (0..lengths.len())
        .map(|i| score_word(kb, lengths, i, cfg))
        .collect()
}

/// Tags every word of a sentence given only its word lengths.
pub fn tag_sentence(
    kb: &KnowledgeBase,
    lengths: &[u32],
    cfg: &TaggingConfig,
) -> Result<Vec<TagDecision>, TagError> {
    check_lengths(lengths)?;
    cfg.validate(kb)?;
    if kb.is_untrained() {
        return Err(TagError::Untrained);
    }
    let base = base_tables(kb, lengths, cfg)?;
    let mut decisions = base
        .iter()
        .zip(lengths)
        .map(|(t, &l)| select_tag(t, kb, l))
        .collect::<Result<Vec<_>, _>>()?;
    if cfg.mode == Mode::MultiPass {
        let mut current: Vec<CoarseTag> = decisions.iter().map(|d| d.tag).collect();
        for _ in 0..cfg.max_refine_iters {
            let next = refine_with_base(kb, lengths, &current, &base, cfg)?;
            let tags: Vec<CoarseTag> = next.iter().map(|d| d.tag).collect();
            decisions = next;
            if tags == current {
                break;
            }
            current = tags;
        }
    }
    Ok(decisions)
}

/// Context score for `position`: every window containing it, keyed by the
/// lengths plus the current tags with a hole at `position`.
pub fn context_score(
    kb: &KnowledgeBase,
    lengths: &[u32],
    current: &[CoarseTag],
    position: usize,
    cfg: &TaggingConfig,
) -> Result<ScoreTable, TagError> {
    if !kb.has_context() {
        return Err(TagError::NoContext);
    }
    if current.len() != lengths.len() {
        return Err(TagError::LengthMismatch {
            tags: current.len(),
            lengths: lengths.len(),
        });
    }
    if position >= lengths.len() {
        return Err(TagError::OutOfRange {
            position,
            len: lengths.len(),
        });
    }
    let mut table = ScoreTable::default();
    for_each_window(lengths.len(), position, cfg.max_window, |start, end| {
        let key =
            ContextKey::with_hole(&lengths[start..end], &current[start..end], position - start)
                .expect("window is a valid context key");
        for (tag, count) in kb.context_lookup(&key) {
            table.add_match(*tag, *count, end - start);
        }
    });
    Ok(table)
}

fn refine_with_base(
    kb: &KnowledgeBase,
    lengths: &[u32],
    current: &[CoarseTag],
    base: &[ScoreTable],
    cfg: &TaggingConfig,
) -> Result<Vec<TagDecision>, TagError> {
    // synchronous: every position reads the pass-input tags
    (0..lengths.len())
        .map(|i| {
            let mut combined = context_score(kb, lengths, current, i, cfg)?;
            combined.add(&base[i]);
            select_tag(&combined, kb, lengths[i])
        })
        .collect()
}

/// One refinement pass: base score plus context score at every position,
/// all positions updated from the same input tagging.
pub fn refine_pass(
    kb: &KnowledgeBase,
    lengths: &[u32],
    current: &[CoarseTag],
    cfg: &TaggingConfig,
) -> Result<Vec<CoarseTag>, TagError> {
    check_lengths(lengths)?;
    if !kb.has_context() {
        return Err(TagError::NoContext);
    }
    if current.len() != lengths.len() {
        return Err(TagError::LengthMismatch {
            tags: current.len(),
            lengths: lengths.len(),
        });
    }
    let base = base_tables(kb, lengths, cfg)?;
    Ok(refine_with_base(kb, lengths, current, &base, cfg)?
        .into_iter()
        .map(|d| d.tag)
        .collect())
}

/// Applies up to `cfg.max_refine_iters` refinement passes, stopping at a
/// fixpoint.
pub fn refine(
    kb: &KnowledgeBase,
    lengths: &[u32],
    initial: &[CoarseTag],
    cfg: &TaggingConfig,
) -> Result<Vec<CoarseTag>, TagError> {
    let mut current = initial.to_vec();
    for _ in 0..cfg.max_refine_iters {
        let next = refine_pass(kb, lengths, &current, cfg)?;
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}
