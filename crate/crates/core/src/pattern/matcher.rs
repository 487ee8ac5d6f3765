use super::{Pattern, PatternItem};
use crate::corpus_io::TaggedSentence;

/// A pattern match over tokens `start..=end` (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PatternMatch {
    /// Index of the pattern within its [`PatternSet`].
    pub pattern: usize,
    pub start: usize,
    pub end: usize,
}

impl PatternMatch {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One position of the expanded pattern: a token test, possibly skippable.
#[derive(Debug, Clone)]
struct Step<'a> {
    test: &'a PatternItem,
    optional: bool,
}

#[derive(Debug, Clone)]
struct Compiled<'a> {
    steps: Vec<Step<'a>>,
}

impl<'a> Compiled<'a> {
    fn new(pattern: &'a Pattern) -> Self {
        let mut steps = Vec::new();
        for item in pattern.items() {
            match item {
                PatternItem::Repeat { item, min, max } => {
                    for k in 0..*max {
                        steps.push(Step {
                            test: item,
                            optional: k >= *min,
                        });
                    }
                }
                other => steps.push(Step {
                    test: other,
                    optional: false,
                }),
            }
        }
        Compiled { steps }
    }

    fn close(&self, states: &mut [bool]) {
        for k in 0..self.steps.len() {
            if states[k] && self.steps[k].optional {
                states[k + 1] = true;
            }
        }
    }

    /// Longest match starting at 0-based `start`, as a 0-based exclusive end.
    fn longest_from(&self, tags: &[&str], start: usize) -> Option<usize> {
        let n = self.steps.len();
        let mut states = vec![false; n + 1];
        states[0] = true;
        self.close(&mut states);
        let mut best = None;
        let mut next = vec![false; n + 1];
        for (j, pos) in tags.iter().enumerate().skip(start) {
            next.iter_mut().for_each(|s| *s = false);
            let mut alive = false;
            for k in 0..n {
                if states[k] && self.steps[k].test.accepts(pos) {
                    next[k + 1] = true;
                    alive = true;
                }
            }
            if !alive {
                break;
            }
            self.close(&mut next);
            std::mem::swap(&mut states, &mut next);
            if states[n] {
                best = Some(j + 1);
            }
        }
        best
    }
}

/// Patterns prepared for matching.
#[derive(Debug, Clone)]
pub struct PatternSet<'a> {
    patterns: &'a [Pattern],
    compiled: Vec<Compiled<'a>>,
}

impl<'a> PatternSet<'a> {
    pub fn new(patterns: &'a [Pattern]) -> Self {
        PatternSet {
            patterns,
            compiled: patterns.iter().map(Compiled::new).collect(),
        }
    }

    pub fn name(&self, pattern: usize) -> &'a str {
        self.patterns[pattern].name()
    }

    /// All matches in a sentence, ordered by start position and then by
    /// pattern order.
    ///
    /// Each pattern first takes its longest match at every start position.
    /// Among the overlapping candidates of one pattern the longest wins, ties
    /// going to the earliest start; a candidate is kept only if it does not
    /// overlap one already kept. Matches of different patterns may overlap.
    pub fn matches(&self, sentence: &TaggedSentence) -> Vec<PatternMatch> {
        let tags: Vec<&str> = sentence.tokens.iter().map(|t| t.pos.as_str()).collect();
        let mut out = Vec::new();
        for (p, compiled) in self.compiled.iter().enumerate() {
            let spans: Vec<(usize, usize)> = (0..tags.len())
                .filter_map(|s| compiled.longest_from(&tags, s).map(|e| (s, e)))
                .collect();
            for (s, e) in select_non_overlapping(spans) {
                out.push(PatternMatch {
                    pattern: p,
                    start: s + 1,
                    end: e,
                });
            }
        }
        out.sort_by_key(|m| (m.start, m.pattern));
        out
    }
}

/// Longest-first, earliest-first greedy selection of half-open spans.
pub(crate) fn select_non_overlapping(mut spans: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    spans.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for (s, e) in spans {
        if kept.iter().all(|&(ks, ke)| e <= ks || s >= ke) {
            kept.push((s, e));
        }
    }
    kept.sort();
    kept
}

/// Convenience wrapper returning `(pattern_name, start, end)` triples with
/// 1-based inclusive token positions.
pub fn match_patterns(
    patterns: &[Pattern],
    sentence: &TaggedSentence,
) -> Vec<(String, usize, usize)> {
    let set = PatternSet::new(patterns);
    set.matches(sentence)
        .into_iter()
        .map(|m| (set.name(m.pattern).to_string(), m.start, m.end))
        .collect()
}
