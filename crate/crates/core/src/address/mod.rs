//! From dialogue lines to per-dyad address-term counts.

pub mod bootstrap;
pub mod corpus;
pub mod lexicon;
pub mod spans;
pub mod tokenize;

pub use bootstrap::{binomial_upper_tail, bootstrap_lexicon, BaselinePolicy, BootstrapResult, Candidate, SlotKind};
pub use corpus::{
    build_content_vectors, parse_characters, parse_dialogue, CharacterTable, ContentBuild, DialogueCorpus, VocabPolicy,
};
pub use lexicon::{curated_list, parse_term_list, Lexicon, Provenance, TermKind};
pub use spans::{
    detect_address_spans, line_tags, valid_bilou, AddressSpan, CharacterRecord, DialogueLine, SpanCategory, Tag,
};
pub use tokenize::tokenize;
