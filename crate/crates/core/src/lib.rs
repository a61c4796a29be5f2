//! Part-of-speech tagging from word lengths alone.
//!
//! A knowledge base maps runs of word lengths to the coarse tag sequences
//! observed for them in a training corpus. Tagging looks up every window
//! around a word and lets longer matches dominate with a `2^length` weight.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod kb;
pub mod tagger;

pub use corpus::{CoarseTag, Sentence, WordRecord};
pub use eval::EvalReport;
pub use kb::{KnowledgeBase, LengthKey, TagSequence};
pub use tagger::{tag_sentence, DecisionSource, Mode, TagDecision, TaggingConfig};
