//! Held-out evaluation: token accuracy, confusion matrix, decision sources.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::corpus::{
    convert_dir, genre_list, select_genres, write_flatfile_path, CoarseTag, ConversionReport,
    CorpusError, Preparation, Sentence,
};
use crate::kb::KnowledgeBase;
use crate::tagger::{tag_sentence, DecisionSource, TagDecision, TagError, TaggingConfig};

pub const DEFAULT_TRAIN_GENRES: [char; 3] = ['A', 'G', 'J'];
pub const DEFAULT_TEST_GENRES: [char; 1] = ['N'];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTest,
    #[error(transparent)]
    Tag(#[from] TagError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("train and test genres overlap: {0}")]
    Overlap(String),
}

type Matrix = [[u64; CoarseTag::COUNT]; CoarseTag::COUNT];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SourceCounts {
    pub matched: u64,
    pub fallback_length: u64,
    pub fallback_global: u64,
}

/// Token-level results. `confusion[gold][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub total: u64,
    pub correct: u64,
    pub confusion: Matrix,
    pub sources: SourceCounts,
}

impl Default for EvalReport {
    fn default() -> Self {
        EvalReport {
            total: 0,
            correct: 0,
            confusion: [[0; CoarseTag::COUNT]; CoarseTag::COUNT],
            sources: SourceCounts::default(),
        }
    }
}

/// `100 * num / den` to two decimals, rounding half up.
pub fn format_percentage(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.00".into();
    }
    let scaled = (num as u128 * 10_000 * 2 + den as u128) / (2 * den as u128);
    format!("{}.{:02}", scaled / 100, scaled % 100)
}

impl EvalReport {
    pub fn record(&mut self, gold: CoarseTag, decision: &TagDecision) {
        self.record_tags(gold, decision.tag);
        match decision.source {
            DecisionSource::Matched => self.sources.matched += 1,
            DecisionSource::FallbackLength => self.sources.fallback_length += 1,
            DecisionSource::FallbackGlobal => self.sources.fallback_global += 1,
        }
    }

    fn record_tags(&mut self, gold: CoarseTag, predicted: CoarseTag) {
        self.total += 1;
        self.correct += (gold == predicted) as u64;
        self.confusion[gold.index()][predicted.index()] += 1;
    }

    /// `correct / total`, or 0 for an empty report.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn accuracy_pct(&self) -> String {
        format_percentage(self.correct, self.total)
    }

    pub fn gold_count(&self, tag: CoarseTag) -> u64 {
        self.confusion[tag.index()].iter().sum()
    }

    pub fn predicted_count(&self, tag: CoarseTag) -> u64 {
        self.confusion.iter().map(|row| row[tag.index()]).sum()
    }

    /// Precision and recall for `tag`; 0 when undefined.
    pub fn precision_recall(&self, tag: CoarseTag) -> (f64, f64) {
        let hits = self.confusion[tag.index()][tag.index()] as f64;
        let ratio = |d: u64| if d == 0 { 0.0 } else { hits / d as f64 };
        (
            ratio(self.predicted_count(tag)),
            ratio(self.gold_count(tag)),
        )
    }

    pub fn to_json(&self) -> Value {
        let mut confusion = Map::new();
        let mut per_tag = Map::new();
        for gold in CoarseTag::ALL {
            let row: Map<String, Value> = CoarseTag::ALL
                .iter()
                .map(|p| {
                    (
                        p.to_string(),
                        json!(self.confusion[gold.index()][p.index()]),
                    )
                })
                .collect();
            confusion.insert(gold.to_string(), Value::Object(row));
            let (precision, recall) = self.precision_recall(gold);
            per_tag.insert(
                gold.to_string(),
                json!({ "precision": precision, "recall": recall }),
            );
        }
        json!({
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy(),
            "accuracy_pct": self.accuracy_pct(),
            "confusion": confusion,
            "per_tag": per_tag,
            "sources": {
                "matched": self.sources.matched,
                "fallback_length": self.sources.fallback_length,
                "fallback_global": self.sources.fallback_global,
            },
        })
    }
}

/// Tags every test sentence from its lengths alone and scores the result
/// against the gold tags.
pub fn evaluate(
    kb: &KnowledgeBase,
    test: &[Sentence],
    cfg: &TaggingConfig,
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    if kb.is_untrained() {
        return Err(TagError::Untrained.into());
    }
    cfg.validate(kb)?;
    let tagged = test
        .par_iter()
        .map(|s| tag_sentence(kb, &s.lengths(), cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = EvalReport::default();
    for (sentence, decisions) in test.iter().zip(&tagged) {
        for (word, decision) in sentence.words().iter().zip(decisions) {
            report.record(word.tag, decision);
        }
    }
    Ok(report)
}

/// Converts the sources once and writes disjoint train and test flatfiles.
pub fn split_corpus(
    source_dir: &Path,
    prep: &Preparation,
    train_genres: &BTreeSet<char>,
    test_genres: &BTreeSet<char>,
    train_out: &Path,
    test_out: &Path,
) -> Result<(ConversionReport, ConversionReport), EvalError> {
    if train_genres.is_empty() || test_genres.is_empty() {
        return Err(CorpusError::NoGenres.into());
    }
    let overlap: BTreeSet<char> = train_genres.intersection(test_genres).copied().collect();
    if !overlap.is_empty() {
        return Err(EvalError::Overlap(genre_list(&overlap)));
    }
    let converted = convert_dir(source_dir, &prep.mapping, &prep.entities)?;
    let mut reports = Vec::with_capacity(2);
    for (genres, out) in [(train_genres, train_out), (test_genres, test_out)] {
        let (sentences, report) = select_genres(&converted, genres);
        if report.tokens == 0 {
            return Err(CorpusError::NoTokens(genre_list(genres)).into());
        }
        write_flatfile_path(out, &sentences, prep.keep_surfaces)?;
        reports.push(report);
    }
    let test = reports.pop().expect("two reports");
    let train = reports.pop().expect("two reports");
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::KbBuilder;
    use num_bigint::BigUint;
    use CoarseTag::*;

    fn decision(tag: CoarseTag) -> TagDecision {
        TagDecision {
            tag,
            source: DecisionSource::Matched,
            winning_score: BigUint::from(2u32),
        }
    }

    #[test]
    fn percentage_rounding() {
        assert_eq!(format_percentage(11_118, 32_777), "33.92");
        assert_eq!(format_percentage(1, 3), "33.33");
        assert_eq!(format_percentage(2, 3), "66.67");
        assert_eq!(format_percentage(1, 8), "12.50");
        // 0.000125 -> 0.0125% -> 0.01 (half up)
        assert_eq!(format_percentage(1, 8000), "0.01");
        assert_eq!(format_percentage(5, 5), "100.00");
        assert_eq!(format_percentage(0, 0), "0.00");
    }

    #[test]
    fn perfect_report() {
        let mut r = EvalReport::default();
        for t in [Det, N, N, Adj, N] {
            r.record(t, &decision(t));
        }
        assert_eq!(r.accuracy(), 1.0);
        let off_diagonal: u64 = (0..CoarseTag::COUNT)
            .flat_map(|g| {
                (0..CoarseTag::COUNT)
                    .filter(move |&p| p != g)
                    .map(move |p| (g, p))
            })
            .map(|(g, p)| r.confusion[g][p])
            .sum();
        assert_eq!(off_diagonal, 0);
        assert_eq!(r.precision_recall(N), (1.0, 1.0));
    }

    #[test]
    fn one_of_three() {
        let mut r = EvalReport::default();
        r.record(N, &decision(N));
        r.record(N, &decision(V));
        r.record(Det, &decision(N));
        assert_eq!((r.correct, r.total), (1, 3));
        assert!((r.accuracy() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.gold_count(N), 2);
        assert_eq!(r.predicted_count(N), 2);
        assert_eq!(r.precision_recall(N), (0.5, 0.5));
        assert_eq!(r.precision_recall(V), (0.0, 0.0));
        let v = r.to_json();
        assert_eq!(v["confusion"]["N"]["V"], 1);
        assert_eq!(v["accuracy_pct"], "33.33");
        assert_eq!(v["sources"]["matched"], 3);
    }

    #[test]
    fn evaluate_errors() {
        let kb = KnowledgeBase::empty(3, false);
        let cfg = TaggingConfig::for_kb(&kb);
        assert!(matches!(
            evaluate(&kb, &[], &cfg),
            Err(EvalError::EmptyTest)
        ));
        let s = Sentence::from_parts(&[3], &[Det]).unwrap();
        assert!(matches!(
            evaluate(&kb, &[s], &cfg),
            Err(EvalError::Tag(TagError::Untrained))
        ));
    }

    #[test]
    fn evaluate_on_training_sentence() {
        let s = Sentence::from_parts(&[3, 6, 6, 5, 4], &[Det, N, N, Adj, N]).unwrap();
        let mut b = KbBuilder::new(12);
        b.index_sentence(&s);
        let kb = b.finish();
        let r = evaluate(&kb, &[s.clone(), s], &TaggingConfig::for_kb(&kb)).unwrap();
        assert_eq!((r.total, r.correct), (10, 10));
        assert_eq!(r.sources.matched, 10);
    }
}
