//! Corpus BLEU, MWE dev-subset extraction and n-gram diffing.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::aligner::MwePair;
use crate::corpus_io::{LexiconEntry, ParallelCorpus, TaggedSentence};
use crate::{par, Error, Execution, Result};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_length: usize,
    pub ref_length: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuOptions {
    /// Add one to matches and totals for orders 2-4.
    pub smooth: bool,
}

/// Whitespace tokenization; the input is expected to be pre-tokenized.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// N-grams of interned ids, padded to a fixed width and sorted.
fn sorted_grams(ids: &[u32], n: usize) -> Vec<[u32; MAX_ORDER]> {
    let mut grams: Vec<[u32; MAX_ORDER]> = ids
        .windows(n)
        .map(|w| {
            let mut g = [u32::MAX; MAX_ORDER];
            g[..n].copy_from_slice(w);
            g
        })
        .collect();
    grams.sort_unstable();
    grams
}

/// Size of the multiset intersection of two sorted lists, which is the
/// sum over n-grams of `min(hyp count, ref count)`.
fn clipped_matches<T: Ord>(hyp: &[T], reference: &[T]) -> u64 {
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < hyp.len() && j < reference.len() {
        match hyp[i].cmp(&reference[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                matched += 1;
                i += 1;
                j += 1;
            }
        }
    }
    matched
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    matches: [u64; MAX_ORDER],
    totals: [u64; MAX_ORDER],
    hyp_len: u64,
    ref_len: u64,
}

impl Stats {
    fn of<'a>(hyp: &'a [String], reference: &'a [String]) -> Stats {
        let mut s = Stats {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..Stats::default()
        };
        let mut vocab: HashMap<&str, u32> = HashMap::with_capacity(hyp.len() + reference.len());
        let mut intern = |tokens: &'a [String]| -> Vec<u32> {
            tokens
                .iter()
                .map(|t| {
                    let next = vocab.len() as u32;
                    *vocab.entry(t.as_str()).or_insert(next)
                })
                .collect()
        };
        let (h, r) = (intern(hyp), intern(reference));
        for n in 1..=MAX_ORDER {
            s.matches[n - 1] = clipped_matches(&sorted_grams(&h, n), &sorted_grams(&r, n));
            s.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
        }
        s
    }

    fn merge(mut self, other: Stats) -> Stats {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self
    }
}

pub fn corpus_bleu(
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
    options: BleuOptions,
) -> Result<BleuReport> {
    corpus_bleu_with(hyps, refs, options, Execution::default())
}

/// Single-reference corpus BLEU with clipped n-gram counts pooled over the
/// corpus, orders 1-4 and brevity penalty `min(1, e^(1 - r/h))`.
pub fn corpus_bleu_with(
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
    options: BleuOptions,
    exec: Execution,
) -> Result<BleuReport> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            what: "BLEU hypotheses vs references",
            source_len: hyps.len(),
            target_len: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(Error::InvalidArgument("empty hypothesis corpus".into()));
    }
    let idx: Vec<usize> = (0..hyps.len()).collect();
    let stats = par::fold(
        exec,
        &idx,
        Stats::default,
        |acc, &i| acc.merge(Stats::of(&hyps[i], &refs[i])),
        Stats::merge,
    );
    if stats.hyp_len == 0 {
        return Err(Error::InvalidArgument(
            "hypothesis corpus has no tokens".into(),
        ));
    }

    let precisions: [f64; MAX_ORDER] = std::array::from_fn(|n| {
        let (m, t) = if options.smooth && n > 0 {
            (stats.matches[n] + 1, stats.totals[n] + 1)
        } else {
            (stats.matches[n], stats.totals[n])
        };
        if t == 0 {
            0.0
        } else {
            m as f64 / t as f64
        }
    });
    let brevity_penalty = if stats.hyp_len >= stats.ref_len {
        1.0
    } else {
        (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
    };
    let bleu = if precisions.contains(&0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * log_mean.exp()
    };
    Ok(BleuReport {
        bleu,
        precisions,
        brevity_penalty,
        hyp_length: stats.hyp_len as usize,
        ref_length: stats.ref_len as usize,
    })
}

fn contains_seq(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn lowercase_tokens<'a>(words: impl Iterator<Item = &'a str>) -> Vec<String> {
    words.map(str::to_lowercase).collect()
}

/// Dev pairs whose lowercased source contains a lexicon source phrase as a
/// contiguous token sequence. Returns the subset and the kept 0-based line
/// indices.
pub fn extract_mwe_devset(
    dev: &ParallelCorpus,
    lexicon: &[LexiconEntry],
) -> (ParallelCorpus, Vec<usize>) {
    let needles: Vec<Vec<String>> = lexicon
        .iter()
        .map(|e| lowercase_tokens(e.src_tokens()))
        .filter(|n| !n.is_empty())
        .collect();
    let keep = |i: usize| {
        let src = lowercase_tokens(dev.source()[i].split_whitespace());
        needles.iter().any(|n| contains_seq(&src, n))
    };
    subset(dev, (0..dev.len()).filter(|&i| keep(i)).collect())
}

/// Lemma-based variant: a dev pair is kept when the lemma sequence of its
/// tagged source sentence contains the lemma key of any pair's source.
pub fn extract_mwe_devset_by_lemma(
    dev: &ParallelCorpus,
    tagged_source: &[TaggedSentence],
    keys: &[Vec<String>],
) -> Result<(ParallelCorpus, Vec<usize>)> {
    if tagged_source.len() != dev.len() {
        return Err(Error::LengthMismatch {
            what: "dev corpus vs tagged dev source",
            source_len: dev.len(),
            target_len: tagged_source.len(),
        });
    }
    let kept = (0..dev.len())
        .filter(|&i| {
            let lemmas = lowercase_tokens(tagged_source[i].tokens.iter().map(|t| {
                if t.lemma.is_empty() || t.lemma == "_" {
                    t.form.as_str()
                } else {
                    t.lemma.as_str()
                }
            }));
            keys.iter().any(|k| contains_seq(&lemmas, k))
        })
        .collect();
    Ok(subset(dev, kept))
}

/// Source lemma keys of aligned pairs, for [`extract_mwe_devset_by_lemma`].
pub fn source_lemma_keys(pairs: &[MwePair]) -> Vec<Vec<String>> {
    pairs.iter().map(|p| p.src.lemma_key.clone()).collect()
}

fn subset(dev: &ParallelCorpus, kept: Vec<usize>) -> (ParallelCorpus, Vec<usize>) {
    let corpus = ParallelCorpus::from_pairs(kept.iter().map(|&i| dev.pair(i)));
    (corpus, kept)
}

/// N-grams whose reference-matched count went up (improving) or down
/// (worsening) between a baseline and a new hypothesis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NgramDiff {
    pub improving: BTreeSet<Vec<String>>,
    pub worsening: BTreeSet<Vec<String>>,
    /// Inclusive token spans of `new_hyp` covered by improving n-grams.
    pub new_spans: Vec<(usize, usize)>,
    /// Inclusive token spans of `baseline_hyp` covered by worsening n-grams.
    pub baseline_spans: Vec<(usize, usize)>,
}

fn matched_counts<'a>(
    hyp: &'a [String],
    reference: &[String],
    max_n: usize,
) -> HashMap<&'a [String], usize> {
    let mut out = HashMap::new();
    for n in 1..=max_n {
        let r = ngram_counts(reference, n);
        for (g, c) in ngram_counts(hyp, n) {
            let m = c.min(r.get(g).copied().unwrap_or(0));
            if m > 0 {
                out.insert(g, m);
            }
        }
    }
    out
}

fn coverage_spans(tokens: &[String], grams: &BTreeSet<Vec<String>>) -> Vec<(usize, usize)> {
    let mut covered = vec![false; tokens.len()];
    let orders: HashSet<usize> = grams.iter().map(Vec::len).collect();
    for n in orders {
        for (i, w) in tokens.windows(n).enumerate() {
            if grams.contains(w) {
                covered[i..i + n].iter_mut().for_each(|c| *c = true);
            }
        }
    }
    let mut spans = Vec::new();
    let mut start = None;
    for (i, &c) in covered.iter().enumerate() {
        match (c, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, tokens.len() - 1));
    }
    spans
}

/// Compares reference-clipped n-gram multisets (orders `1..=max_n`) of a
/// baseline and a new hypothesis.
pub fn ngram_diff(
    baseline_hyp: &[String],
    new_hyp: &[String],
    reference: &[String],
    max_n: usize,
) -> Result<NgramDiff> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    let base = matched_counts(baseline_hyp, reference, max_n);
    let new = matched_counts(new_hyp, reference, max_n);
    let improving: BTreeSet<Vec<String>> = new
        .iter()
        .filter(|(g, c)| **c > base.get(*g).copied().unwrap_or(0))
        .map(|(g, _)| g.to_vec())
        .collect();
    let worsening: BTreeSet<Vec<String>> = base
        .iter()
        .filter(|(g, c)| **c > new.get(*g).copied().unwrap_or(0))
        .map(|(g, _)| g.to_vec())
        .collect();
    Ok(NgramDiff {
        new_spans: coverage_spans(new_hyp, &improving),
        baseline_spans: coverage_spans(baseline_hyp, &worsening),
        improving,
        worsening,
    })
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn highlight(tokens: &[String], spans: &[(usize, usize)], class: &str) -> String {
    let mut out = String::new();
    let mut i = 0;
    let mut spans = spans.iter().peekable();
    while i < tokens.len() {
        if i > 0 {
            out.push(' ');
        }
        match spans.peek() {
            Some(&&(s, e)) if s == i => {
                let text: Vec<String> = tokens[s..=e].iter().map(|t| escape_html(t)).collect();
                out.push_str(&format!(
                    "<span class=\"{class}\">{}</span>",
                    text.join(" ")
                ));
                spans.next();
                i = e + 1;
            }
            _ => {
                out.push_str(&escape_html(&tokens[i]));
                i += 1;
            }
        }
    }
    out
}

/// A self-contained HTML page listing, per sentence, the baseline with
/// worsening n-grams in red, the new output with improving n-grams in
/// green, and the reference.
pub fn render_diff_html(
    baseline: &[Vec<String>],
    new: &[Vec<String>],
    refs: &[Vec<String>],
    diffs: &[NgramDiff],
) -> String {
    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>n-gram diff</title>\n<style>\n\
         body { font-family: sans-serif; }\n\
         table { border-collapse: collapse; margin-bottom: 1em; }\n\
         td { padding: 2px 8px; vertical-align: top; }\n\
         .improving { background: #9be39b; }\n\
         .worsening { background: #f29b9b; }\n\
         </style>\n</head>\n<body>\n",
    );
    for (i, d) in diffs.iter().enumerate() {
        out.push_str(&format!("<table id=\"s{}\">\n", i + 1));
        out.push_str(&format!(
            "<tr><th>Baseline</th><td>{}</td></tr>\n",
            highlight(&baseline[i], &d.baseline_spans, "worsening")
        ));
        out.push_str(&format!(
            "<tr><th>New</th><td>{}</td></tr>\n",
            highlight(&new[i], &d.new_spans, "improving")
        ));
        out.push_str(&format!(
            "<tr><th>Reference</th><td>{}</td></tr>\n",
            highlight(&refs[i], &[], "")
        ));
        out.push_str("</table>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn identity_is_100() {
        let c = vec![toks("a b c d e"), toks("the cat sat on the mat")];
        let r = corpus_bleu(&c, &c, BleuOptions::default()).unwrap();
        assert_eq!(r.bleu, 100.0);
        assert_eq!(r.brevity_penalty, 1.0);
    }

    #[test]
    fn hand_example() {
        let r = corpus_bleu(
            &[toks("the quick brown fox jumps")],
            &[toks("the quick brown fox")],
            BleuOptions::default(),
        )
        .unwrap();
        assert_eq!(r.precisions, [4.0 / 5.0, 3.0 / 4.0, 2.0 / 3.0, 0.5]);
        assert_eq!(r.brevity_penalty, 1.0);
        assert!((r.bleu - 100.0 * 0.2f64.powf(0.25)).abs() < 1e-9);
        assert!((r.bleu - 66.87).abs() < 0.01);
    }

    #[test]
    fn disjoint_is_zero() {
        let r = corpus_bleu(
            &[toks("a b c d")],
            &[toks("w x y z")],
            BleuOptions::default(),
        )
        .unwrap();
        assert_eq!(r.bleu, 0.0);
    }

    #[test]
    fn brevity_penalty_applies() {
        let r = corpus_bleu(
            &[toks("a b c d")],
            &[toks("a b c d e f g h")],
            BleuOptions::default(),
        )
        .unwrap();
        assert!((r.brevity_penalty - (-1.0f64).exp()).abs() < 1e-12);
        assert!((r.bleu - 100.0 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn smoothing_rescues_short_sentences() {
        let hyp = [toks("a b c x")];
        let reference = [toks("a b c y")];
        assert_eq!(
            corpus_bleu(&hyp, &reference, BleuOptions::default())
                .unwrap()
                .bleu,
            0.0
        );
        let s = corpus_bleu(&hyp, &reference, BleuOptions { smooth: true }).unwrap();
        // p = 3/4, 3/4, 2/3, 1/2
        let expected = 100.0 * (0.75f64 * 0.75 * (2.0 / 3.0) * 0.5).powf(0.25);
        assert!((s.bleu - expected).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(corpus_bleu(&[], &[], BleuOptions::default()).is_err());
        assert!(corpus_bleu(&[toks("a")], &[], BleuOptions::default()).is_err());
        assert!(corpus_bleu(&[vec![]], &[toks("a")], BleuOptions::default()).is_err());
    }

    fn entry(src: &str) -> LexiconEntry {
        LexiconEntry {
            src_surface: src.into(),
            trg_surface: "x".into(),
            score: 1.0,
            src_freq: 1,
            trg_freq: 1,
            cooc: 1,
        }
    }

    #[test]
    fn devset_keeps_city_bus_sentence() {
        let dev = ParallelCorpus::from_pairs([
            (
                "Just like in a city bus or a tram .",
                "Stejně jako v městském autobuse či tramvaji .",
            ),
            ("The bus is late .", "Autobus má zpoždění ."),
            ("City bus lines", "Linky"),
        ]);
        let (sub, idx) = extract_mwe_devset(&dev, &[entry("city bus")]);
        assert_eq!(idx, [0, 2]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.pair(1), ("City bus lines", "Linky"));
        let (sub, idx) = extract_mwe_devset(&dev, &[]);
        assert!(sub.is_empty() && idx.is_empty());
    }

    #[test]
    fn devset_by_lemma() {
        use crate::corpus_io::parse_conllu;
        let dev = ParallelCorpus::from_pairs([("city buses", "a"), ("red car", "b")]);
        let tagged = parse_conllu(
            "1\tcity\tcity\tNOUN\n2\tbuses\tbus\tNOUN\n\n1\tred\tred\tADJ\n2\tcar\tcar\tNOUN\n",
        )
        .unwrap();
        let keys = vec![vec!["city".to_string(), "bus".to_string()]];
        let (_, idx) = extract_mwe_devset_by_lemma(&dev, &tagged, &keys).unwrap();
        assert_eq!(idx, [0]);
        assert!(extract_mwe_devset_by_lemma(&dev, &tagged[..1], &keys).is_err());
    }

    #[test]
    fn diff_identity_is_empty() {
        let a = toks("a b c");
        let d = ngram_diff(&a, &a, &toks("a b d"), 4).unwrap();
        assert!(d.improving.is_empty() && d.worsening.is_empty());
        assert!(d.new_spans.is_empty());
    }

    #[test]
    fn diff_new_equals_reference() {
        let reference = toks("v městském autobuse");
        let d = ngram_diff(&toks("x y z"), &reference, &reference, 4).unwrap();
        assert_eq!(d.improving.len(), 6);
        assert!(d.worsening.is_empty());
        assert_eq!(d.new_spans, [(0, 2)]);
    }

    #[test]
    fn diff_czech_example() {
        let base = toks("Jako ve městé autobuse nebo tramvaji .");
        let new = toks("Jen jako v městském autobuse nebo tramvaji .");
        let reference = toks("Stejně jako v městském autobuse či tramvaji .");
        let d = ngram_diff(&base, &new, &reference, 4).unwrap();
        assert!(d.improving.contains(&toks("městském")));
        assert!(d.improving.contains(&toks("v městském autobuse")));
        assert!(d.improving.is_disjoint(&d.worsening));
        assert_eq!(d.new_spans, [(1, 4)]);
        assert!(ngram_diff(&base, &new, &reference, 0).is_err());
    }

    #[test]
    fn html_escapes_and_highlights() {
        let base = vec![toks("a <b>")];
        let new = vec![toks("a c")];
        let refs = vec![toks("a c")];
        let d = vec![ngram_diff(&base[0], &new[0], &refs[0], 2).unwrap()];
        let html = render_diff_html(&base, &new, &refs, &d);
        assert!(html.contains("&lt;b&gt;"));
        assert!(html.contains("<span class=\"improving\">a c</span>"));
    }
}
