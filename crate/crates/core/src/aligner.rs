//! Bilingual MWE alignment by co-occurrence and string similarity.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus_io::{LexiconEntry, ParallelCorpus, TaggedSentence};
use crate::pattern::{dice_score, MweCandidate};
use crate::{par, Error, Execution, Result};

/// Token-count ratio above which a pair is flagged as suspicious.
pub const LENGTH_RATIO_WARNING: f64 = 2.0;

/// Source and target tagged corpora, sentence-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedBitext {
    pub source: Vec<TaggedSentence>,
    pub target: Vec<TaggedSentence>,
}

impl TaggedBitext {
    pub fn new(source: Vec<TaggedSentence>, target: Vec<TaggedSentence>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::LengthMismatch {
                what: "tagged bitext",
                source_len: source.len(),
                target_len: target.len(),
            });
        }
        Ok(TaggedBitext { source, target })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Fails unless the plain-text corpus has one line per tagged sentence.
    pub fn check_against(&self, corpus: &ParallelCorpus) -> Result<()> {
        if corpus.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "parallel corpus vs tagged bitext",
                source_len: corpus.len(),
                target_len: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignWeights {
    dice: f64,
    sim: f64,
}

impl AlignWeights {
    pub fn new(dice: f64, sim: f64) -> Result<Self> {
        if !(dice >= 0.0 && sim >= 0.0) || (dice + sim - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "aligner weights must be non-negative and sum to 1, got ({dice}, {sim})"
            )));
        }
        Ok(AlignWeights { dice, sim })
    }

    pub fn dice(&self) -> f64 {
        self.dice
    }

    pub fn sim(&self) -> f64 {
        self.sim
    }
}

impl Default for AlignWeights {
    fn default() -> Self {
        AlignWeights {
            dice: 0.7,
            sim: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub weights: AlignWeights,
    pub threshold: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            weights: AlignWeights::default(),
            threshold: 0.5,
        }
    }
}

/// An aligned source/target candidate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MwePair {
    pub src: MweCandidate,
    pub trg: MweCandidate,
    pub cooc: usize,
    pub dice: f64,
    pub similarity: f64,
    pub score: f64,
    /// Token counts differ by more than [`LENGTH_RATIO_WARNING`]×.
    pub length_warning: bool,
}

impl MwePair {
    pub fn to_lexicon_entry(&self) -> LexiconEntry {
        LexiconEntry {
            src_surface: self.src.surface_text(),
            trg_surface: self.trg.surface_text(),
            score: self.score,
            src_freq: self.src.freq,
            trg_freq: self.trg.freq,
            cooc: self.cooc,
        }
    }
}

/// Counts, for every (source, target) candidate index pair, the parallel
/// lines containing both. Pairs that never co-occur are absent.
pub fn cooccurrence_counts(
    src_cands: &[MweCandidate],
    trg_cands: &[MweCandidate],
    bitext: &TaggedBitext,
) -> Result<BTreeMap<(usize, usize), usize>> {
    let lines = bitext.len();
    let check = |cands: &[MweCandidate], side: &str| -> Result<()> {
        for c in cands {
            if let Some(o) = c.occurrences.iter().find(|o| o.sentence >= lines) {
                return Err(Error::InvalidArgument(format!(
                    "{side} candidate {:?} occurs in sentence {} but the bitext has {lines} lines",
                    c.lemma_key.join(" "),
                    o.sentence
                )));
            }
        }
        Ok(())
    };
    check(src_cands, "source")?;
    check(trg_cands, "target")?;

    let mut by_line: Vec<Vec<usize>> = vec![Vec::new(); lines];
    for (t, cand) in trg_cands.iter().enumerate() {
        for line in cand.sentence_set() {
            by_line[line].push(t);
        }
    }
    let mut counts = BTreeMap::new();
    for (s, cand) in src_cands.iter().enumerate() {
        for line in cand.sentence_set() {
            for &t in &by_line[line] {
                *counts.entry((s, t)).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Lowercases and strips combining diacritics.
pub fn fold(s: &str) -> String {
    s.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// `1 - levenshtein / max_len` over folded strings, counted in characters.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    let (a, b) = (fold(a), fold(b));
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(&a, &b) as f64 / longest as f64
}

pub fn align_pairs(
    src_cands: &[MweCandidate],
    trg_cands: &[MweCandidate],
    bitext: &TaggedBitext,
    config: &AlignConfig,
) -> Result<Vec<MwePair>> {
    align_pairs_with(src_cands, trg_cands, bitext, config, Execution::default())
}

/// Scores every co-occurring pair as
/// `w_dice · dice + w_sim · similarity(surfaces)`, keeps the best target per
/// source (ties: higher co-occurrence, then smaller target lemma key), drops
/// pairs under the threshold and sorts by score descending, then source and
/// target lemma keys.
pub fn align_pairs_with(
    src_cands: &[MweCandidate],
    trg_cands: &[MweCandidate],
    bitext: &TaggedBitext,
    config: &AlignConfig,
    exec: Execution,
) -> Result<Vec<MwePair>> {
    let weights = AlignWeights::new(config.weights.dice, config.weights.sim)?;
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be in [0, 1], got {}",
            config.threshold
        )));
    }
    let counts = cooccurrence_counts(src_cands, trg_cands, bitext)?;
    let mut per_src: Vec<Vec<(usize, usize)>> = vec![Vec::new(); src_cands.len()];
    for (&(s, t), &c) in &counts {
        per_src[s].push((t, c));
    }
    let trg_surfaces: Vec<String> = trg_cands.iter().map(MweCandidate::surface_text).collect();

    let best = par::map_range(exec, src_cands.len(), |s| -> Result<Option<MwePair>> {
        let src = &src_cands[s];
        let src_surface = src.surface_text();
        let mut best: Option<(usize, usize, f64, f64, f64)> = None;
        for &(t, cooc) in &per_src[s] {
            let dice = dice_score(src.freq, trg_cands[t].freq, cooc)?;
            let similarity = string_similarity(&src_surface, &trg_surfaces[t]);
            let score = weights.dice * dice + weights.sim * similarity;
            let better = match best {
                None => true,
                Some((bt, bc, bs, _, _)) => {
                    score
                        .total_cmp(&bs)
                        .then(cooc.cmp(&bc))
                        .then_with(|| trg_cands[bt].lemma_key.cmp(&trg_cands[t].lemma_key))
                        == Ordering::Greater
                }
            };
            if better {
                best = Some((t, cooc, score, dice, similarity));
            }
        }
        Ok(best
            .filter(|b| b.2 >= config.threshold)
            .map(|(t, cooc, score, dice, similarity)| {
                let trg = &trg_cands[t];
                let (a, b) = (src.surface.len() as f64, trg.surface.len() as f64);
                MwePair {
                    src: src.clone(),
                    trg: trg.clone(),
                    cooc,
                    dice,
                    similarity,
                    score,
                    length_warning: a.max(b) / a.min(b) > LENGTH_RATIO_WARNING,
                }
            }))
    });
    let mut pairs = Vec::new();
    for p in best {
        if let Some(p) = p? {
            pairs.push(p);
        }
    }
    pairs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.src.lemma_key.cmp(&b.src.lemma_key))
            .then_with(|| a.trg.lemma_key.cmp(&b.trg.lemma_key))
    });
    Ok(pairs)
}
