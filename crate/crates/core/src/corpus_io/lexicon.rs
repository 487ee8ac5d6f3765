use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One row of the bilingual MWE lexicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub src_surface: String,
    pub trg_surface: String,
    pub score: f64,
    pub src_freq: usize,
    pub trg_freq: usize,
    pub cooc: usize,
}

impl LexiconEntry {
    pub fn src_tokens(&self) -> impl Iterator<Item = &str> {
        self.src_surface.split_whitespace()
    }

    pub fn trg_tokens(&self) -> impl Iterator<Item = &str> {
        self.trg_surface.split_whitespace()
    }
}

/// Writes `src_surface, trg_surface, score, src_freq, trg_freq, cooc` as
/// tab-separated lines with the score at six decimals.
pub fn write_mwe_lexicon(entries: &[LexiconEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{}\t{}\t{}\n",
            e.src_surface, e.trg_surface, e.score, e.src_freq, e.trg_freq, e.cooc
        ));
    }
    out
}

pub fn read_mwe_lexicon(text: &str) -> Result<Vec<LexiconEntry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(Error::parse(
                line_no,
                format!("lexicon line has {} column(s), expected 6", cols.len()),
            ));
        }
        let score: f64 = cols[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid score {:?}", cols[2])))?;
        let count = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("invalid {what} {s:?}")))
        };
        entries.push(LexiconEntry {
            src_surface: cols[0].to_string(),
            trg_surface: cols[1].to_string(),
            score,
            src_freq: count(cols[3], "src_freq")?,
            trg_freq: count(cols[4], "trg_freq")?,
            cooc: count(cols[5], "cooc_freq")?,
        });
    }
    Ok(entries)
}
