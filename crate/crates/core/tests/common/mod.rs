//! Brute-force reference tagger and corpus generators shared by the
//! integration suites. Nothing here goes through the knowledge base: the
//! oracle works straight off the training sentences.

#![allow(dead_code)]

pub mod invariants;

use lentag::corpus::{CoarseTag, Sentence};
use lentag::tagger::DecisionSource;
use num_bigint::BigUint;
use proptest::prelude::*;

pub const TAGS: [CoarseTag; 4] = [CoarseTag::N, CoarseTag::V, CoarseTag::Det, CoarseTag::Adj];

#[derive(Debug, Clone)]
pub struct RawSentence {
    pub lengths: Vec<u32>,
    pub tags: Vec<CoarseTag>,
}

impl RawSentence {
    pub fn to_sentence(&self) -> Sentence {
        Sentence::from_parts(&self.lengths, &self.tags).unwrap()
    }
}

pub fn sentences(raw: &[RawSentence]) -> Vec<Sentence> {
    raw.iter().map(RawSentence::to_sentence).collect()
}

pub fn raw_sentence(max_len: usize, max_word: u32) -> impl Strategy<Value = RawSentence> {
    prop::collection::vec(
        (1..=max_word, prop::sample::select(TAGS.to_vec())),
        1..=max_len,
    )
    .prop_map(|words| RawSentence {
        lengths: words.iter().map(|w| w.0).collect(),
        tags: words.iter().map(|w| w.1).collect(),
    })
}

/// At most 6 sentences of at most 8 words, word lengths 1..=9, 4 tags.
pub fn small_corpus() -> impl Strategy<Value = Vec<RawSentence>> {
    prop::collection::vec(raw_sentence(8, 9), 1..=6)
}

/// Per-tag score for the word at `position`, by enumerating every training
/// window against every test window that contains `position`.
pub fn oracle_scores(
    corpus: &[RawSentence],
    max_window: usize,
    lengths: &[u32],
    position: usize,
) -> Vec<BigUint> {
    let mut scores = vec![BigUint::default(); CoarseTag::COUNT];
    for s in corpus {
        for a in 0..s.lengths.len() {
            for b in a..s.lengths.len() {
                let w = b - a + 1;
                if w > max_window {
                    continue;
                }
                for c in 0..lengths.len() {
                    let d = c + w - 1;
                    if d >= lengths.len() || c > position || position > d {
                        continue;
                    }
                    if s.lengths[a..=b] == lengths[c..=d] {
                        let tag = s.tags[a + (position - c)];
                        scores[tag.index()] += BigUint::from(1u32) << w;
                    }
                }
            }
        }
    }
    scores
}

fn unigram(corpus: &[RawSentence], length: Option<u32>) -> Vec<u64> {
    let mut counts = vec![0u64; CoarseTag::COUNT];
    for s in corpus {
        for (l, t) in s.lengths.iter().zip(&s.tags) {
            if length.is_none_or(|want| want == *l) {
                counts[t.index()] += 1;
            }
        }
    }
    counts
}

/// Largest by `key`, then global frequency, then earliest declared tag.
fn best<K: Ord + Clone>(key: &[K], global: &[u64]) -> usize {
    let mut best = 0;
    for i in 1..CoarseTag::COUNT {
        let better = (key[i].clone(), global[i]) > (key[best].clone(), global[best]);
        if better {
            best = i;
        }
    }
    best
}

pub fn oracle_tag(
    corpus: &[RawSentence],
    max_window: usize,
    lengths: &[u32],
) -> Vec<(CoarseTag, DecisionSource, BigUint)> {
    let global = unigram(corpus, None);
    (0..lengths.len())
        .map(|i| {
            let scores = oracle_scores(corpus, max_window, lengths, i);
            if scores.iter().any(|s| s.bits() > 0) {
                let t = best(&scores, &global);
                return (
                    CoarseTag::from_index(t).unwrap(),
                    DecisionSource::Matched,
                    scores[t].clone(),
                );
            }
            let per_length = unigram(corpus, Some(lengths[i]));
            if per_length.iter().any(|&c| c > 0) {
                let t = best(&per_length, &global);
                return (
                    CoarseTag::from_index(t).unwrap(),
                    DecisionSource::FallbackLength,
                    BigUint::default(),
                );
            }
            let t = best(&[0u8; CoarseTag::COUNT], &global);
            (
                CoarseTag::from_index(t).unwrap(),
                DecisionSource::FallbackGlobal,
                BigUint::default(),
            )
        })
        .collect()
}

/// Σ over sentences of max(0, L − l + 1).
pub fn window_census(corpus: &[RawSentence], l: usize) -> u64 {
    corpus
        .iter()
        .map(|s| (s.lengths.len() + 1).saturating_sub(l) as u64)
        .sum()
}

/// The SUSANNE lines quoted for the opening of text A01, plus the line for
/// "Jury" that follows them in the corpus.
pub const SUSANNE_EXCERPT: &str = "\
A01:0010a\t-\tYB\t<minbrk>\t-\t[Oh.Oh]
A01:0010b\t-\tAT\tThe\tthe\t[O[S[Nns:s.
A01:0010c\t-\tNP1s\tFulton\tFulton\t[Nns.
A01:0010d\t-\tNNL1cb\tCounty\tcounty\t.Nns]
A01:0010e\t-\tJJ\tGrand\tgrand\t.
A01:0010f\t-\tNN1c\tJury\tjury\t.Nns:s]
";

/// Writes a small synthetic SUSANNE-format corpus with texts in genres A,
/// G, J and N into `dir`.
pub fn write_synthetic_susanne(dir: &std::path::Path) {
    let texts: [(&str, &[(&str, &str)]); 5] = [
        (
            "A01",
            &[
                ("AT", "The"),
                ("NN1c", "jury"),
                ("VVDv", "said"),
                ("YF", "."),
            ],
        ),
        (
            "A02",
            &[
                ("AT1", "A"),
                ("JJ", "grand"),
                ("NN1c", "plan"),
                ("VVZv", "fails"),
                ("YF", "."),
            ],
        ),
        (
            "G01",
            &[
                ("PPHS1m", "He"),
                ("VMo", "would"),
                ("VV0v", "write"),
                ("RR", "slowly"),
                ("YF", "."),
            ],
        ),
        (
            "J01",
            &[
                ("AT", "The"),
                ("NN2", "data"),
                ("VBR", "are"),
                ("JJ", "<ldquo>clear<rdquo>"),
                ("YF", "."),
            ],
        ),
        (
            "N01",
            &[
                ("PPHS1m", "He"),
                ("VVDv", "rode"),
                ("II", "into"),
                ("AT", "the"),
                ("NN1c", "town"),
                ("YF", "."),
            ],
        ),
    ];
    for (name, words) in texts {
        let mut text = String::new();
        for rep in 0..2 {
            text.push_str(&format!("{name}:{rep:03}0a\t-\tYB\t<minbrk>\t-\t[Oh.Oh]\n"));
            for (i, (tag, word)) in words.iter().enumerate() {
                let parse = match i {
                    0 => "[O[S.",
                    i if i + 1 == words.len() => ".S]O]",
                    _ => ".",
                };
                let letter = (b'b' + i as u8) as char;
                text.push_str(&format!(
                    "{name}:{rep:03}0{letter}\t-\t{tag}\t{word}\t{}\t{parse}\n",
                    word.to_lowercase()
                ));
            }
        }
        std::fs::write(dir.join(name), text).unwrap();
    }
    std::fs::write(dir.join("README"), "not a corpus file\n").unwrap();
}
