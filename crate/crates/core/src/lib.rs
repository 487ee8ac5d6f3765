//! Non-neural tooling around multi-word expressions (MWEs) in machine
//! translation.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! * [`corpus_io`] reads and writes CoNLL-U, parallel text, lexicon TSV and
//!   attention JSONL.
//! * [`pattern`] parses POS-sequence patterns and extracts MWE candidates
//!   from tagged corpora.
//! * [`aligner`] pairs source and target candidates into a bilingual lexicon.
//! * [`composer`] mixes a baseline corpus with repeated MWE data.
//! * [`evaluation`] computes corpus BLEU, MWE dev subsets and n-gram diffs.
//! * [`attention`] merges BPE units and measures attention over MWE spans.
//! * [`pipeline`] chains extraction, alignment, composition and dev-set
//!   filtering from a flat config file.
//!
//! Data-parallel loops go through [`Execution`]; with the default `parallel`
//! feature they run on rayon, otherwise everything is sequential. Results
//! never depend on the execution mode.

pub mod aligner;
pub mod attention;
pub mod composer;
pub mod corpus_io;
pub mod error;
pub mod evaluation;
mod par;
pub mod pattern;
pub mod pipeline;

pub use error::{Error, Result};
pub use par::Execution;
