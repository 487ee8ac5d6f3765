//! Synthetic training-corpus composition.
//!
//! Two modes are supported. In `sentences` mode the baseline is shuffled,
//! cut into chunks and interleaved with independently shuffled copies of the
//! MWE data. In `phrases` mode the same material is concatenated and the
//! whole result is shuffled, which discards the block layout.

use std::fmt;
use std::str::FromStr;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::aligner::MwePair;
use crate::corpus_io::{LexiconEntry, ParallelCorpus};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComposeMode {
    Phrases,
    Sentences,
}

impl FromStr for ComposeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phrases" => Ok(ComposeMode::Phrases),
            "sentences" | "sents" => Ok(ComposeMode::Sentences),
            other => Err(Error::Layout(format!(
                "unknown mode {other:?} (expected phrases or sentences)"
            ))),
        }
    }
}

impl fmt::Display for ComposeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComposeMode::Phrases => "phrases",
            ComposeMode::Sentences => "sentences",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// A fraction of the (truncated) baseline.
    Baseline(f64),
    /// This many copies of the MWE data.
    MweBlock(usize),
}

/// What gets shuffled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShuffleScope {
    /// Shuffle the baseline before chunking and each MWE copy on its own.
    Baseline,
    /// Concatenate everything, then shuffle the whole corpus.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    pub mode: ComposeMode,
    pub baseline_limit: Option<usize>,
    pub segments: Vec<Segment>,
    pub seed: u64,
    pub shuffle: ShuffleScope,
}

/// Four baseline quarters interleaved with 1×, 2×, 1× and 1× MWE blocks:
/// five copies in total.
pub fn default_layout(mode: ComposeMode) -> LayoutSpec {
    use Segment::*;
    LayoutSpec {
        mode,
        baseline_limit: None,
        segments: vec![
            Baseline(0.25),
            MweBlock(1),
            Baseline(0.25),
            MweBlock(2),
            Baseline(0.25),
            MweBlock(1),
            Baseline(0.25),
            MweBlock(1),
        ],
        seed: 1,
        shuffle: default_scope(mode),
    }
}

fn default_scope(mode: ComposeMode) -> ShuffleScope {
    match mode {
        ComposeMode::Phrases => ShuffleScope::Global,
        ComposeMode::Sentences => ShuffleScope::Baseline,
    }
}

impl LayoutSpec {
    /// Builds a layout from parsed segments with the mode's shuffle scope.
    pub fn from_segments(mode: ComposeMode, segments: Vec<Segment>, seed: u64) -> Self {
        LayoutSpec {
            mode,
            baseline_limit: None,
            segments,
            seed,
            shuffle: default_scope(mode),
        }
    }

    pub fn total_copies(&self) -> usize {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::MweBlock(c) => *c,
                Segment::Baseline(_) => 0,
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for s in &self.segments {
            if let Segment::Baseline(f) = s {
                if !(0.0..=1.0).contains(f) {
                    return Err(Error::Layout(format!(
                        "baseline fraction {f} outside [0, 1]"
                    )));
                }
                sum += f;
            }
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Layout(format!(
                "baseline fractions sum to {sum}, expected 1"
            )));
        }
        if self.total_copies() == 0 {
            return Err(Error::Layout("layout needs at least one MWE copy".into()));
        }
        if self.mode == ComposeMode::Phrases && self.shuffle != ShuffleScope::Global {
            return Err(Error::Layout(
                "phrases mode requires shuffling the whole composed corpus".into(),
            ));
        }
        Ok(())
    }

    fn effective_baseline(&self, baseline_len: usize) -> Result<usize> {
        match self.baseline_limit {
            Some(limit) if limit > baseline_len => Err(Error::Layout(format!(
                "baseline limit {limit} exceeds baseline size {baseline_len}"
            ))),
            Some(limit) => Ok(limit),
            None => Ok(baseline_len),
        }
    }

    /// Sizes of the baseline chunks, one per `Baseline` segment. Each chunk
    /// gets `floor(fraction · n)` lines and the last one takes the remainder.
    pub fn chunk_sizes(&self, baseline_len: usize) -> Result<Vec<usize>> {
        self.validate()?;
        let n = self.effective_baseline(baseline_len)?;
        let fractions: Vec<f64> = self
            .segments
            .iter()
            .filter_map(|s| match s {
                Segment::Baseline(f) => Some(*f),
                Segment::MweBlock(_) => None,
            })
            .collect();
        let mut sizes = Vec::with_capacity(fractions.len());
        let mut left = n;
        for (i, f) in fractions.iter().enumerate() {
            let size = if i + 1 == fractions.len() {
                left
            } else {
                ((f * n as f64).floor() as usize).min(left)
            };
            sizes.push(size);
            left -= size;
        }
        Ok(sizes)
    }

    /// Number of lines `compose` produces for these input sizes.
    pub fn output_len(&self, baseline_len: usize, mwe_len: usize) -> Result<usize> {
        self.validate()?;
        Ok(self.effective_baseline(baseline_len)? + self.total_copies() * mwe_len)
    }
}

/// Parses a layout file: one `base FRACTION` or `mwe COPIES` per line, `#`
/// comments and blank lines ignored.
pub fn parse_layout(text: &str) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let segment = match fields.as_slice() {
            ["base", f] => Segment::Baseline(
                f.parse()
                    .map_err(|_| Error::parse(i + 1, format!("invalid fraction {f:?}")))?,
            ),
            ["mwe", c] => Segment::MweBlock(
                c.parse()
                    .map_err(|_| Error::parse(i + 1, format!("invalid copy count {c:?}")))?,
            ),
            _ => {
                return Err(Error::parse(
                    i + 1,
                    format!("expected `base FRACTION` or `mwe COPIES`, got {line:?}"),
                ))
            }
        };
        segments.push(segment);
    }
    Ok(segments)
}

pub fn write_layout(segments: &[Segment]) -> String {
    let mut out = String::new();
    for s in segments {
        match s {
            Segment::Baseline(f) => out.push_str(&format!("base {f}\n")),
            Segment::MweBlock(c) => out.push_str(&format!("mwe {c}\n")),
        }
    }
    out
}

/// Fisher-Yates permutation of `0..n` driven by SplitMix64. Position `i`
/// (from `n-1` down to 1) swaps with `next_u64() % (i + 1)`.
pub fn seeded_shuffle(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Mixes `baseline` with copies of `mwe_units` according to `layout`.
pub fn compose(
    baseline: &ParallelCorpus,
    mwe_units: &ParallelCorpus,
    layout: &LayoutSpec,
) -> Result<ParallelCorpus> {
    let sizes = layout.chunk_sizes(baseline.len())?;
    if mwe_units.is_empty() {
        return Err(Error::Layout(
            "MWE data is empty but the layout has MWE blocks".into(),
        ));
    }
    let n = layout.effective_baseline(baseline.len())?;
    let mut base = baseline.clone();
    base.truncate(n);

    let global = layout.shuffle == ShuffleScope::Global;
    if !global {
        base = base.permuted(&seeded_shuffle(n, layout.seed));
    }

    let mut out = ParallelCorpus::default();
    let mut chunks = sizes.into_iter();
    let mut offset = 0;
    let mut copy_ordinal = 0u64;
    for segment in &layout.segments {
        match segment {
            Segment::Baseline(_) => {
                let size = chunks.next().expect("one size per baseline segment");
                for i in offset..offset + size {
                    let (s, t) = base.pair(i);
                    out.push(s, t);
                }
                offset += size;
            }
            Segment::MweBlock(copies) => {
                for _ in 0..*copies {
                    copy_ordinal += 1;
                    if global {
                        out.extend_from(mwe_units);
                    } else {
                        let order =
                            seeded_shuffle(mwe_units.len(), layout.seed.wrapping_add(copy_ordinal));
                        out.extend_from(&mwe_units.permuted(&order));
                    }
                }
            }
        }
    }
    if global {
        out = out.permuted(&seeded_shuffle(out.len(), layout.seed));
    }
    Ok(out)
}

/// Each lexicon pair becomes its own sentence pair.
pub fn phrase_units(entries: &[LexiconEntry]) -> ParallelCorpus {
    ParallelCorpus::from_pairs(
        entries
            .iter()
            .map(|e| (e.src_surface.clone(), e.trg_surface.clone())),
    )
}

/// Lines of `corpus` where both sides of at least one aligned pair occur,
/// in corpus order.
pub fn sentence_units(pairs: &[MwePair], corpus: &ParallelCorpus) -> ParallelCorpus {
    let mut keep = vec![false; corpus.len()];
    for pair in pairs {
        let trg = pair.trg.sentence_set();
        for line in pair.src.sentence_set() {
            if line < keep.len() && trg.binary_search(&line).is_ok() {
                keep[line] = true;
            }
        }
    }
    ParallelCorpus::from_pairs(
        keep.iter()
            .enumerate()
            .filter(|(_, k)| **k)
            .map(|(i, _)| corpus.pair(i)),
    )
}
