//! Invariant checks shared by the property suite and the acceptance harness.

use lentag::corpus::CoarseTag;
use lentag::kb::{KbBuilder, KnowledgeBase};
use lentag::tagger::{score_word, tag_sentence, DecisionSource, Mode, TaggingConfig};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::TestCaseError;

use super::{raw_sentence, sentences, small_corpus, window_census, RawSentence};

pub fn train(corpus: &[RawSentence], max_window: usize, context: bool) -> KnowledgeBase {
    KnowledgeBase::train(&sentences(corpus), max_window, context)
}

pub fn census(
    corpus: &[RawSentence],
    max_window: usize,
    context: bool,
) -> Result<(), TestCaseError> {
    let kb = train(corpus, max_window, context);
    let stats = kb.stats();
    for l in 1..=max_window {
        prop_assert_eq!(stats.windows_per_length[l - 1], window_census(corpus, l));
    }
    prop_assert!(stats.distinct_keys <= stats.windows_per_length.iter().sum::<u64>());
    if context {
        let mut per_len = vec![0u64; max_window];
        for (key, tags) in kb.context_entries() {
            per_len[key.lengths().len() - 1] += tags.iter().map(|(_, c)| c).sum::<u64>();
        }
        for l in 1..=max_window {
            prop_assert_eq!(per_len[l - 1], l as u64 * window_census(corpus, l));
        }
    }
    Ok(())
}

pub fn census_strategy() -> impl Strategy<Value = (Vec<RawSentence>, usize, bool)> {
    (small_corpus(), 1usize..=8, any::<bool>())
}

pub fn merge_algebra(
    a: &[RawSentence],
    b: &[RawSentence],
    c: &[RawSentence],
    context: bool,
) -> Result<(), TestCaseError> {
    let (ka, kb, kc) = (
        train(a, 5, context),
        train(b, 5, context),
        train(c, 5, context),
    );
    let empty = KnowledgeBase::empty(5, context);
    prop_assert_eq!(ka.merge(&empty).unwrap().to_bytes(), ka.to_bytes());
    prop_assert_eq!(empty.merge(&ka).unwrap().to_bytes(), ka.to_bytes());
    prop_assert_eq!(
        ka.merge(&kb).unwrap().to_bytes(),
        kb.merge(&ka).unwrap().to_bytes()
    );
    let left = ka.merge(&kb).unwrap().merge(&kc).unwrap();
    let right = ka.merge(&kb.merge(&kc).unwrap()).unwrap();
    prop_assert_eq!(left.to_bytes(), right.to_bytes());
    let whole: Vec<RawSentence> = a.iter().chain(b).chain(c).cloned().collect();
    prop_assert_eq!(train(&whole, 5, context).to_bytes(), left.to_bytes());
    Ok(())
}

pub type MergeInput = (Vec<RawSentence>, Vec<RawSentence>, Vec<RawSentence>, bool);

pub fn merge_strategy() -> impl Strategy<Value = MergeInput> {
    let part = || prop::collection::vec(raw_sentence(8, 9), 0..4);
    (part(), part(), part(), any::<bool>())
}

pub fn round_trip(
    corpus: &[RawSentence],
    context: bool,
    rotate: usize,
) -> Result<(), TestCaseError> {
    let kb = train(corpus, 6, context);
    let bytes = kb.to_bytes();
    let back = KnowledgeBase::load(bytes.as_slice()).unwrap();
    prop_assert_eq!(&back, &kb);
    prop_assert_eq!(back.to_bytes(), bytes.clone());

    let mut permuted = corpus.to_vec();
    let k = rotate % permuted.len();
    permuted.rotate_left(k);
    permuted.reverse();
    prop_assert_eq!(train(&permuted, 6, context).to_bytes(), bytes);
    Ok(())
}

pub fn round_trip_strategy() -> impl Strategy<Value = (Vec<RawSentence>, bool, usize)> {
    (small_corpus(), any::<bool>(), 0usize..6)
}

pub fn scaling(corpus: &[RawSentence], probe: &RawSentence, k: u64) -> Result<(), TestCaseError> {
    let kb = train(corpus, 8, false);
    let mut b = KbBuilder::new(8);
    for (key, seqs) in kb.entries() {
        for (seq, c) in seqs {
            b.insert(key.clone(), seq.clone(), c * k).unwrap();
        }
    }
    let scaled = b.finish();
    let (c1, c2) = (TaggingConfig::for_kb(&kb), TaggingConfig::for_kb(&scaled));
    for i in 0..probe.lengths.len() {
        let s1 = score_word(&kb, &probe.lengths, i, &c1).unwrap();
        let s2 = score_word(&scaled, &probe.lengths, i, &c2).unwrap();
        for t in CoarseTag::ALL {
            prop_assert_eq!(s1.get(t) * BigUint::from(k), s2.get(t).clone());
        }
    }
    let d1 = tag_sentence(&kb, &probe.lengths, &c1).unwrap();
    let d2 = tag_sentence(&scaled, &probe.lengths, &c2).unwrap();
    for (x, y) in d1.iter().zip(&d2) {
        prop_assert_eq!(x.tag, y.tag);
        prop_assert_eq!(x.source, y.source);
    }
    Ok(())
}

pub fn scaling_strategy() -> impl Strategy<Value = (Vec<RawSentence>, RawSentence, u64)> {
    (small_corpus(), raw_sentence(8, 9), 2u64..6)
}

/// Bumping one (key, tag sequence) count by 1 adds exactly 2^|key| to the
/// aligned tag at every matching window and touches nothing else.
pub fn monotone(
    corpus: &[RawSentence],
    pick: Index,
    probe_pick: Index,
) -> Result<(), TestCaseError> {
    let kb = train(corpus, 8, false);
    let mut entries: Vec<_> = kb
        .entries()
        .flat_map(|(k, seqs)| seqs.iter().map(move |(s, _)| (k.clone(), s.clone())))
        .collect();
    entries.sort();
    let (key, seq) = pick.get(&entries).clone();
    let mut b = kb.to_builder();
    b.insert(key.clone(), seq.clone(), 1).unwrap();
    let bumped = b.finish();

    let probe = &probe_pick.get(corpus).lengths;
    let w = key.len();
    let (c1, c2) = (TaggingConfig::for_kb(&kb), TaggingConfig::for_kb(&bumped));
    for i in 0..probe.len() {
        let mut expected = vec![BigUint::default(); CoarseTag::COUNT];
        for start in 0..probe.len() {
            let end = start + w;
            if end <= probe.len() && start <= i && i < end && probe[start..end] == *key.lengths() {
                expected[seq.tags()[i - start].index()] += BigUint::from(1u32) << w;
            }
        }
        let before = score_word(&kb, probe, i, &c1).unwrap();
        let after = score_word(&bumped, probe, i, &c2).unwrap();
        for t in CoarseTag::ALL {
            prop_assert_eq!(after.get(t) - before.get(t), expected[t.index()].clone());
        }
    }
    Ok(())
}

pub fn monotone_strategy() -> impl Strategy<Value = (Vec<RawSentence>, Index, Index)> {
    (small_corpus(), any::<Index>(), any::<Index>())
}

/// A trained knowledge base tags any length sequence, deterministically.
pub fn fallback_totality(
    corpus: &[RawSentence],
    probe: &[u32],
    max_window: usize,
    multi: bool,
) -> Result<(), TestCaseError> {
    let kb = train(corpus, max_window, multi);
    let mut cfg = TaggingConfig::for_kb(&kb);
    if multi {
        cfg.mode = Mode::MultiPass;
    }
    let out = tag_sentence(&kb, probe, &cfg).unwrap();
    prop_assert_eq!(out.len(), probe.len());
    for d in &out {
        prop_assert_eq!(
            d.source == DecisionSource::Matched,
            d.winning_score.bits() > 0
        );
    }
    prop_assert_eq!(tag_sentence(&kb, probe, &cfg).unwrap(), out);
    Ok(())
}

pub fn fallback_strategy() -> impl Strategy<Value = (Vec<RawSentence>, Vec<u32>, usize, bool)> {
    (
        small_corpus(),
        prop::collection::vec(1u32..=30, 1..30),
        1usize..=8,
        any::<bool>(),
    )
}
