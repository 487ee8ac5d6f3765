use std::collections::{HashMap, HashSet};

use super::{Pattern, PatternSet};
use crate::corpus_io::TaggedSentence;
use crate::{par, Error, Execution, Result};

/// Where a candidate was seen.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    /// 0-based position of the sentence in the corpus.
    pub sentence: usize,
    pub sentence_id: String,
    /// 1-based inclusive token range.
    pub start: usize,
    pub end: usize,
}

/// An MWE candidate grouped by its lowercased lemma sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MweCandidate {
    pub lemma_key: Vec<String>,
    /// Surface forms of the first occurrence.
    pub surface: Vec<String>,
    /// Pattern that produced the first occurrence.
    pub pattern_name: String,
    pub freq: usize,
    pub occurrences: Vec<Occurrence>,
}

impl MweCandidate {
    pub fn surface_text(&self) -> String {
        self.surface.join(" ")
    }

    /// Sorted, deduplicated sentence positions containing this candidate.
    pub fn sentence_set(&self) -> Vec<usize> {
        let mut lines: Vec<usize> = self.occurrences.iter().map(|o| o.sentence).collect();
        lines.dedup();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

fn lemma_of(token: &crate::corpus_io::Token) -> String {
    if token.lemma.is_empty() || token.lemma == "_" {
        token.form.to_lowercase()
    } else {
        token.lemma.to_lowercase()
    }
}

pub fn extract_candidates(
    patterns: &[Pattern],
    corpus: &[TaggedSentence],
    min_freq: usize,
) -> Result<Vec<MweCandidate>> {
    extract_candidates_with(patterns, corpus, min_freq, Execution::default())
}

/// Matches every sentence, groups matches by lemma key, drops keys seen
/// fewer than `min_freq` times and sorts by frequency (descending), then
/// lemma key. Every match counts as one occurrence.
pub fn extract_candidates_with(
    patterns: &[Pattern],
    corpus: &[TaggedSentence],
    min_freq: usize,
    exec: Execution,
) -> Result<Vec<MweCandidate>> {
    if min_freq == 0 {
        return Err(Error::InvalidArgument("min_freq must be at least 1".into()));
    }
    let set = PatternSet::new(patterns);
    let per_sentence = par::map_range(exec, corpus.len(), |i| {
        let sentence = &corpus[i];
        set.matches(sentence)
            .into_iter()
            .map(|m| {
                let toks = &sentence.tokens[m.start - 1..m.end];
                let key: Vec<String> = toks.iter().map(lemma_of).collect();
                let surface: Vec<String> = toks.iter().map(|t| t.form.clone()).collect();
                let occ = Occurrence {
                    sentence: i,
                    sentence_id: sentence.id.clone(),
                    start: m.start,
                    end: m.end,
                };
                (key, surface, m.pattern, occ)
            })
            .collect::<Vec<_>>()
    });

    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut cands: Vec<MweCandidate> = Vec::new();
    for (key, surface, pattern, occ) in per_sentence.into_iter().flatten() {
        match index.get(&key) {
            Some(&c) => {
                cands[c].freq += 1;
                cands[c].occurrences.push(occ);
            }
            None => {
                index.insert(key.clone(), cands.len());
                cands.push(MweCandidate {
                    lemma_key: key,
                    surface,
                    pattern_name: set.name(pattern).to_string(),
                    freq: 1,
                    occurrences: vec![occ],
                });
            }
        }
    }
    cands.retain(|c| c.freq >= min_freq);
    cands.sort_by(|a, b| {
        b.freq
            .cmp(&a.freq)
            .then_with(|| a.lemma_key.cmp(&b.lemma_key))
    });
    Ok(cands)
}

/// Dice coefficient `2·cooc / (freq_a + freq_b)`.
pub fn dice_score(freq_a: usize, freq_b: usize, cooc: usize) -> Result<f64> {
    if freq_a == 0 || freq_b == 0 {
        return Err(Error::InvalidArgument(format!(
            "dice: frequencies must be positive, got ({freq_a}, {freq_b})"
        )));
    }
    if cooc > freq_a.min(freq_b) {
        return Err(Error::InvalidArgument(format!(
            "dice: co-occurrence {cooc} exceeds min({freq_a}, {freq_b})"
        )));
    }
    Ok(2.0 * cooc as f64 / (freq_a + freq_b) as f64)
}

/// Candidate dump: `lemma|key <TAB> surface words <TAB> pattern <TAB> freq`.
pub fn write_candidates(cands: &[MweCandidate]) -> String {
    let mut out = String::new();
    for c in cands {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            c.lemma_key.join("|"),
            c.surface.join(" "),
            c.pattern_name,
            c.freq
        ));
    }
    out
}

/// Reads a candidate dump. Occurrences are not stored in the dump, so the
/// returned candidates have none; see [`select_candidates`].
pub fn read_candidates(text: &str) -> Result<Vec<MweCandidate>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                i + 1,
                format!("candidate line has {} column(s), expected 4", cols.len()),
            ));
        }
        let freq = cols[3]
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("invalid freq {:?}", cols[3])))?;
        out.push(MweCandidate {
            lemma_key: cols[0].split('|').map(str::to_string).collect(),
            surface: cols[1].split(' ').map(str::to_string).collect(),
            pattern_name: cols[2].to_string(),
            freq,
            occurrences: Vec::new(),
        });
    }
    Ok(out)
}

/// Keeps the extracted candidates whose lemma key appears in `keep`,
/// preserving the order of `extracted`. Used to restore occurrences for a
/// (possibly curated) candidate dump.
pub fn select_candidates(extracted: Vec<MweCandidate>, keep: &[MweCandidate]) -> Vec<MweCandidate> {
    let keys: HashSet<&[String]> = keep.iter().map(|c| c.lemma_key.as_slice()).collect();
    extracted
        .into_iter()
        .filter(|c| keys.contains(c.lemma_key.as_slice()))
        .collect()
}
