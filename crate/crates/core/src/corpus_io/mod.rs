//! Readers and writers for every on-disk format the toolkit touches.

mod attention;
mod conllu;
mod lexicon;
mod parallel;

pub use attention::{
    read_attention_jsonl, write_attention_jsonl, AttentionRecord, ROW_SUM_TOLERANCE,
};
pub use conllu::{parse_conllu, TaggedSentence, Token};
pub use lexicon::{read_mwe_lexicon, write_mwe_lexicon, LexiconEntry};
pub use parallel::{read_parallel, ParallelCorpus};

use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

/// NFC-normalizes `s`.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Reads a UTF-8 file, attaching the path to any I/O error.
pub fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` to `path`, attaching the path to any I/O error.
pub fn write_file(path: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
