//! Independent reference implementations used only by the integration tests.
//! None of these call into the library's algorithms; they re-derive each
//! result the slow, obvious way.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use mwe_mt::corpus_io::{TaggedSentence, Token};
use mwe_mt::pattern::{Pattern, PatternItem};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap()
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

pub fn sentence(id: &str, tagged: &[(&str, &str)]) -> TaggedSentence {
    TaggedSentence {
        id: id.to_string(),
        tokens: tagged
            .iter()
            .enumerate()
            .map(|(i, (form, pos))| Token {
                index: i + 1,
                form: form.to_string(),
                lemma: form.to_lowercase(),
                pos: pos.to_string(),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------- patterns

fn item_accepts(item: &PatternItem, tag: &str) -> bool {
    match item {
        PatternItem::Literal(t) => t == tag,
        PatternItem::Alternation(ts) => ts.iter().any(|t| t == tag),
        PatternItem::Wildcard => true,
        PatternItem::Repeat { item, .. } => item_accepts(item, tag),
    }
}

/// True if `items` consume exactly all of `tags`.
pub fn matches_exactly(items: &[PatternItem], tags: &[&str]) -> bool {
    let Some((first, rest)) = items.split_first() else {
        return tags.is_empty();
    };
    match first {
        PatternItem::Repeat { item, min, max } => (*min..=*max).any(|k| {
            k <= tags.len()
                && tags[..k].iter().all(|t| item_accepts(item, t))
                && matches_exactly(rest, &tags[k..])
        }),
        other => {
            !tags.is_empty() && item_accepts(other, tags[0]) && matches_exactly(rest, &tags[1..])
        }
    }
}

/// Every subspan is tried; each start keeps its longest exact match; then
/// spans are taken greedily by (longest, earliest) without overlap.
/// Returns `(pattern index, start, end)` with 1-based inclusive positions,
/// ordered by start then pattern index.
pub fn brute_force_matches(patterns: &[Pattern], tags: &[&str]) -> Vec<(usize, usize, usize)> {
    let n = tags.len();
    let mut out = Vec::new();
    for (p, pattern) in patterns.iter().enumerate() {
        let mut longest: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            if let Some(j) = (i + 1..=n)
                .rev()
                .find(|&j| matches_exactly(pattern.items(), &tags[i..j]))
            {
                longest.push((i, j));
            }
        }
        longest.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
        let mut taken = vec![false; n];
        for (i, j) in longest {
            if taken[i..j].iter().all(|t| !t) {
                taken[i..j].iter_mut().for_each(|t| *t = true);
                out.push((p, i + 1, j));
            }
        }
    }
    out.sort_by_key(|&(p, s, _)| (s, p));
    out
}

fn lemma(t: &Token) -> String {
    if t.lemma.is_empty() || t.lemma == "_" {
        t.form.to_lowercase()
    } else {
        t.lemma.to_lowercase()
    }
}

/// Brute-force candidate table: lemma key -> (first surface, frequency,
/// sorted distinct sentence positions).
pub fn brute_force_candidates(
    patterns: &[Pattern],
    corpus: &[TaggedSentence],
    min_freq: usize,
) -> BTreeMap<Vec<String>, (Vec<String>, usize, Vec<usize>)> {
    let mut table: BTreeMap<Vec<String>, (Vec<String>, usize, BTreeSet<usize>)> = BTreeMap::new();
    for (line, s) in corpus.iter().enumerate() {
        let tags: Vec<&str> = s.tokens.iter().map(|t| t.pos.as_str()).collect();
        for (_, start, end) in brute_force_matches(patterns, &tags) {
            let span = &s.tokens[start - 1..end];
            let key: Vec<String> = span.iter().map(lemma).collect();
            let e = table.entry(key).or_insert_with(|| {
                (
                    span.iter().map(|t| t.form.clone()).collect(),
                    0,
                    BTreeSet::new(),
                )
            });
            e.1 += 1;
            e.2.insert(line);
        }
    }
    table
        .into_iter()
        .filter(|(_, v)| v.1 >= min_freq)
        .map(|(k, (surf, f, lines))| (k, (surf, f, lines.into_iter().collect())))
        .collect()
}

// ---------------------------------------------------------------- shuffle

pub struct HandSplitMix(pub u64);

impl HandSplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

pub fn hand_shuffle(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = HandSplitMix(seed);
    let mut v: Vec<usize> = (0..n).collect();
    let mut i = n;
    while i > 1 {
        i -= 1;
        let j = (rng.next() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
    v
}

// ---------------------------------------------------------------- strings

pub fn levenshtein_dp(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    d[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn fold_oracle(s: &str) -> String {
    s.nfd()
        .filter(|c| !is_combining_mark(*c))
        .collect::<String>()
        .to_lowercase()
}

pub fn similarity_oracle(a: &str, b: &str) -> f64 {
    let (a, b) = (fold_oracle(a), fold_oracle(b));
    let m = a.chars().count().max(b.chars().count());
    if m == 0 {
        1.0
    } else {
        1.0 - levenshtein_dp(&a, &b) as f64 / m as f64
    }
}

// ---------------------------------------------------------------- BLEU

fn count_ngrams(t: &[String], n: usize) -> Vec<(Vec<String>, usize)> {
    let mut out: Vec<(Vec<String>, usize)> = Vec::new();
    if t.len() < n {
        return out;
    }
    for i in 0..=t.len() - n {
        let g = t[i..i + n].to_vec();
        match out.iter_mut().find(|(h, _)| *h == g) {
            Some(e) => e.1 += 1,
            None => out.push((g, 1)),
        }
    }
    out
}

/// Plain corpus BLEU on a 0..100 scale, add-one smoothing for orders >= 2
/// when `smooth` is set.
pub fn bleu_oracle(hyps: &[Vec<String>], refs: &[Vec<String>], smooth: bool) -> f64 {
    let mut m = [0f64; 4];
    let mut tot = [0f64; 4];
    let (mut h, mut r) = (0f64, 0f64);
    for (hy, re) in hyps.iter().zip(refs) {
        h += hy.len() as f64;
        r += re.len() as f64;
        for n in 1..=4 {
            let rc = count_ngrams(re, n);
            for (g, c) in count_ngrams(hy, n) {
                let rcount = rc.iter().find(|(x, _)| *x == g).map_or(0, |x| x.1);
                m[n - 1] += c.min(rcount) as f64;
                tot[n - 1] += c as f64;
            }
        }
    }
    let mut logsum = 0.0;
    for n in 0..4 {
        let (num, den) = if smooth && n > 0 {
            (m[n] + 1.0, tot[n] + 1.0)
        } else {
            (m[n], tot[n])
        };
        if num == 0.0 || den == 0.0 {
            return 0.0;
        }
        logsum += (num / den).ln();
    }
    let bp = if h >= r { 1.0 } else { (1.0 - r / h).exp() };
    100.0 * bp * (logsum / 4.0).exp()
}

// ---------------------------------------------------------------- aligner

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePair {
    pub src_key: Vec<String>,
    pub trg_key: Vec<String>,
    pub cooc: usize,
    pub score: f64,
}

pub type CandTable = BTreeMap<Vec<String>, (Vec<String>, usize, Vec<usize>)>;

/// Enumerates every (source, target) pair, scores it and keeps the best
/// target per source.
pub fn brute_force_align(
    src: &CandTable,
    trg: &CandTable,
    w_dice: f64,
    w_sim: f64,
    threshold: f64,
) -> Vec<OraclePair> {
    let mut out = Vec::new();
    for (sk, (ssurf, sf, slines)) in src {
        let mut best: Option<OraclePair> = None;
        for (tk, (tsurf, tf, tlines)) in trg {
            let cooc = slines.iter().filter(|l| tlines.contains(l)).count();
            if cooc == 0 {
                continue;
            }
            let dice = 2.0 * cooc as f64 / (*sf + *tf) as f64;
            let score =
                w_dice * dice + w_sim * similarity_oracle(&ssurf.join(" "), &tsurf.join(" "));
            let cand = OraclePair {
                src_key: sk.clone(),
                trg_key: tk.clone(),
                cooc,
                score,
            };
            best = match best {
                None => Some(cand),
                Some(b) => {
                    let wins = cand.score > b.score
                        || (cand.score == b.score
                            && (cand.cooc > b.cooc
                                || (cand.cooc == b.cooc && cand.trg_key < b.trg_key)));
                    Some(if wins { cand } else { b })
                }
            };
        }
        if let Some(b) = best.filter(|b| b.score >= threshold) {
            out.push(b);
        }
    }
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.src_key.cmp(&b.src_key))
            .then_with(|| a.trg_key.cmp(&b.trg_key))
    });
    out
}

// ---------------------------------------------------------------- dev set

pub fn devset_oracle(dev_src: &[String], phrases: &[&str]) -> Vec<usize> {
    let mut kept = Vec::new();
    for (i, line) in dev_src.iter().enumerate() {
        let padded = format!(
            " {} ",
            line.split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase()
        );
        if phrases
            .iter()
            .any(|p| padded.contains(&format!(" {} ", p.to_lowercase())))
        {
            kept.push(i);
        }
    }
    kept
}

// ---------------------------------------------------------------- attention

/// Mass from target rows `t0..=t1` into source columns `s0..=s1`, averaged
/// over the rows.
pub fn concentration_oracle(m: &[Vec<f64>], src: (usize, usize), trg: (usize, usize)) -> f64 {
    let mut total = 0.0;
    for row in &m[trg.0..=trg.1] {
        for p in &row[src.0..=src.1] {
            total += p;
        }
    }
    total / (trg.1 - trg.0 + 1) as f64
}

pub fn entropy_oracle(row: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in row {
        if p > 0.0 {
            h -= p * p.ln() / std::f64::consts::LN_2;
        }
    }
    h
}

// ---------------------------------------------------------------- random cases

pub const CASE_TAGS: [&str; 4] = ["ADJ", "NOUN", "ADP", "PROPN"];

pub struct CaseRng(rand_xoshiro::Xoshiro256PlusPlus);

impl CaseRng {
    pub fn new(seed: u64) -> Self {
        use rand_xoshiro::rand_core::SeedableRng;
        CaseRng(rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        use rand_xoshiro::rand_core::Rng;
        (self.0.next_u64() % n as u64) as usize
    }

    fn tag(&mut self) -> String {
        CASE_TAGS[self.below(CASE_TAGS.len())].to_string()
    }

    fn simple_item(&mut self) -> PatternItem {
        match self.below(4) {
            0 | 1 => PatternItem::Literal(self.tag()),
            2 => {
                let a = self.tag();
                let mut b = self.tag();
                while b == a {
                    b = self.tag();
                }
                PatternItem::Alternation(vec![a, b])
            }
            _ => PatternItem::Wildcard,
        }
    }

    fn item(&mut self) -> PatternItem {
        if self.below(3) == 0 {
            let min = self.below(3);
            let max = min + self.below(3);
            PatternItem::Repeat {
                item: Box::new(self.simple_item()),
                min,
                max: max.max(1),
            }
        } else {
            self.simple_item()
        }
    }

    /// A valid pattern of 1 to 4 items.
    pub fn pattern(&mut self, name: &str) -> Pattern {
        loop {
            let n = 1 + self.below(4);
            let items = (0..n).map(|_| self.item()).collect();
            if let Ok(p) = Pattern::new(name, items) {
                return p;
            }
        }
    }

    /// A tag sequence of 0 to 12 tokens.
    pub fn tags(&mut self) -> Vec<&'static str> {
        let n = self.below(13);
        (0..n)
            .map(|_| CASE_TAGS[self.below(CASE_TAGS.len())])
            .collect()
    }

    /// One to three patterns and a sentence.
    pub fn case(&mut self) -> (Vec<Pattern>, Vec<&'static str>) {
        let k = 1 + self.below(3);
        let patterns = (0..k).map(|i| self.pattern(&format!("p{i}"))).collect();
        (patterns, self.tags())
    }
}

pub fn tagged(tags: &[&str]) -> TaggedSentence {
    let pairs: Vec<(String, &str)> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("w{i}"), *t))
        .collect();
    let refs: Vec<(&str, &str)> = pairs.iter().map(|(f, t)| (f.as_str(), *t)).collect();
    sentence("s", &refs)
}
