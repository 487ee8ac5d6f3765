use serde::{Deserialize, Serialize};

use super::nfc;
use crate::{Error, Result};

/// One syntactic word of a tagged sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    /// Universal POS tag, uppercase.
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surface forms joined by single spaces.
    pub fn text(&self) -> String {
        let forms: Vec<&str> = self.tokens.iter().map(|t| t.form.as_str()).collect();
        forms.join(" ")
    }
}

/// Parses CoNLL-U text into sentences.
///
/// Only the ID, FORM, LEMMA and UPOS columns are read. Multiword-token
/// ranges (`1-2`) and empty nodes (`1.1`) are skipped. A `# sent_id = X`
/// comment names the sentence; otherwise it is named by the 1-based ordinal
/// of its block. Blocks without token lines produce no sentence.
pub fn parse_conllu(text: &str) -> Result<Vec<TaggedSentence>> {
    let mut sentences = Vec::new();
    let mut block = Block::default();
    let mut ordinal = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if block.started {
                ordinal += 1;
                block.finish(ordinal, &mut sentences);
            }
            continue;
        }
        block.started = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    block.id = Some(value.trim().to_string());
                }
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 4 {
            return Err(Error::parse(
                line_no,
                format!(
                    "token line has {} column(s), expected at least 4: {line:?}",
                    cols.len()
                ),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: usize = id
            .parse()
            .map_err(|_| Error::parse(line_no, format!("token ID {id:?} is not an integer")))?;
        let expected = block.tokens.len() + 1;
        if index != expected {
            return Err(Error::parse(
                line_no,
                format!("token ID {index} out of sequence, expected {expected}"),
            ));
        }
        let (form, lemma, pos) = (cols[1], cols[2], cols[3].trim());
        if form.is_empty() || pos.is_empty() || pos == "_" {
            return Err(Error::parse(
                line_no,
                "token has an empty FORM or UPOS column",
            ));
        }
        block.tokens.push(Token {
            index,
            form: nfc(form),
            lemma: nfc(lemma),
            pos: pos.to_uppercase(),
        });
    }
    if block.started {
        ordinal += 1;
        block.finish(ordinal, &mut sentences);
    }
    Ok(sentences)
}

#[derive(Default)]
struct Block {
    started: bool,
    id: Option<String>,
    tokens: Vec<Token>,
}

impl Block {
    fn finish(&mut self, ordinal: usize, out: &mut Vec<TaggedSentence>) {
        let block = std::mem::take(self);
        if !block.tokens.is_empty() {
            out.push(TaggedSentence {
                id: block.id.unwrap_or_else(|| ordinal.to_string()),
                tokens: block.tokens,
            });
        }
    }
}
